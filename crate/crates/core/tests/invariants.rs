//! Property tests of the public API across modules.

use nalgebra::DMatrix;
use proptest::prelude::*;

use flagwalk::dimension::{covering_number, pointwise_dims};
use flagwalk::experiments::ExperimentConfig;
use flagwalk::harmonic::{decode_bank, encode_bank, sample_harmonic_measure, BankHeader};
use flagwalk::linalg::{exterior_power_of, grassmann_distance, orthonormalize};
use flagwalk::lyapunov::estimate_spectrum_qr;
use flagwalk::{presets, EmpiricalMeasure, GrassmannPoint, SquareMatrix, WalkMeasure};

fn frame(d: usize, i: usize, entries: &[f64]) -> Option<GrassmannPoint> {
    let m = DMatrix::from_column_slice(d, i, &entries[..d * i]);
    orthonormalize(&m).ok().and_then(|q| GrassmannPoint::from_frame(&q).ok())
}

fn line_cloud(angles: &[f64]) -> EmpiricalMeasure {
    let points = angles.iter().map(|a| GrassmannPoint::from_vectors(&[&[a.cos(), a.sin()]]).unwrap()).collect();
    EmpiricalMeasure::from_points(1, points).unwrap()
}

#[test]
fn thread_count_does_not_change_results() {
    let mu = WalkMeasure::from_finite(&presets::sanov_skewed()).unwrap();
    let run = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| {
            let spec = estimate_spectrum_qr(&mu, 2000, 6, 11).unwrap();
            let nu = sample_harmonic_measure(&mu, 1, 40, 64, 11).unwrap();
            (spec.replica_values, nu.wedges().to_vec())
        })
    };
    assert_eq!(run(1), run(4));
}

#[test]
fn config_rejects_unknown_fields() {
    let text = r#"{"schema_version": 1, "seed": 1, "measure": "m.json", "gamma": {"word": [[0, 1]]},
                  "k_list": [1], "spectrum": {"n": 10, "replicas": 2, "typo": 3}}"#;
    assert!(ExperimentConfig::parse(text, ".").is_err());
    let ok = text.replace(r#", "typo": 3"#, "");
    assert!(ExperimentConfig::parse(&ok, ".").is_ok());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn distance_is_a_bounded_symmetric_metric(
        (d, i) in (2usize..5).prop_flat_map(|d| (Just(d), 1..d)),
        raw in proptest::collection::vec(-1.0f64..1.0, 48),
    ) {
        let m = d * i;
        let (Some(a), Some(b), Some(c)) = (frame(d, i, &raw), frame(d, i, &raw[m..]), frame(d, i, &raw[2 * m..])) else {
            return Ok(());
        };
        let ab = grassmann_distance(&a, &b).unwrap();
        let ba = grassmann_distance(&b, &a).unwrap();
        let ac = grassmann_distance(&a, &c).unwrap();
        let cb = grassmann_distance(&c, &b).unwrap();
        prop_assert!((0.0..=1.0 + 1e-12).contains(&ab));
        prop_assert!((ab - ba).abs() < 1e-12);
        prop_assert!(ab <= ac + cb + 1e-12);
        prop_assert!(grassmann_distance(&a, &a).unwrap() < 1e-7);
    }

    #[test]
    fn distance_is_rotation_invariant(
        angle in -3.0f64..3.0,
        raw in proptest::collection::vec(-1.0f64..1.0, 18),
    ) {
        let (Some(a), Some(b)) = (frame(3, 2, &raw), frame(3, 2, &raw[6..])) else { return Ok(()); };
        let r = SquareMatrix::rotation(3, 0, 2, angle);
        let before = grassmann_distance(&a, &b).unwrap();
        let after = grassmann_distance(&a.act(&r).unwrap(), &b.act(&r).unwrap()).unwrap();
        prop_assert!((before - after).abs() < 1e-9);
    }

    #[test]
    fn exterior_power_is_multiplicative(
        i in 1usize..4,
        a in proptest::collection::vec(-2.0f64..2.0, 16),
        b in proptest::collection::vec(-2.0f64..2.0, 16),
    ) {
        let (g, h) = (DMatrix::from_column_slice(4, 4, &a), DMatrix::from_column_slice(4, 4, &b));
        let lhs = exterior_power_of(&(&g * &h), i).unwrap();
        let rhs = exterior_power_of(&g, i).unwrap() * exterior_power_of(&h, i).unwrap();
        let scale = 1.0 + lhs.amax();
        prop_assert!((lhs - rhs).amax() <= 1e-10 * scale);
    }

    #[test]
    fn bank_roundtrip(
        (d, i) in (2usize..5).prop_flat_map(|d| (Just(d), 1..d)),
        raw in proptest::collection::vec(-1.0f64..1.0, 16..160),
        seed in any::<u64>(),
    ) {
        let m = d * i;
        let points: Vec<GrassmannPoint> = raw.chunks_exact(m).filter_map(|c| frame(d, i, c)).collect();
        prop_assume!(!points.is_empty());
        let nu = EmpiricalMeasure::from_points(i, points).unwrap();
        let header = BankHeader { d, i, n: 10, seed, mu_hash: "abc".into(), count: nu.len() };
        let (h2, nu2) = decode_bank(&encode_bank(&header, &nu).unwrap()).unwrap();
        prop_assert_eq!(h2.count, header.count);
        prop_assert_eq!(h2.seed, seed);
        prop_assert_eq!(nu2.wedges(), nu.wedges());
    }

    #[test]
    fn pointwise_slopes_ignore_sample_order(
        angles in proptest::collection::vec(0.0f64..std::f64::consts::PI, 40..80),
        rotate in 1usize..39,
    ) {
        let n = angles.len();
        let mut shifted = angles.clone();
        shifted.rotate_left(rotate);
        let radii = [0.5, 0.3, 0.2, 0.1];
        let a = pointwise_dims(&line_cloud(&angles), &radii).unwrap();
        let b = pointwise_dims(&line_cloud(&shifted), &radii).unwrap();
        for j in 0..n {
            let (sa, sb) = (a.slopes[(j + rotate) % n], b.slopes[j]);
            prop_assert!(sa == sb || (sa.is_nan() && sb.is_nan()), "{} vs {}", sa, sb);
        }
    }

    #[test]
    fn covering_counts_are_monotone(
        angles in proptest::collection::vec(0.0f64..std::f64::consts::PI, 10..120),
    ) {
        let nu = line_cloud(&angles);
        let radii = [0.05, 0.1, 0.2, 0.4];
        let full: Vec<usize> = radii.iter().map(|&r| covering_number(&nu, r, 0.0).unwrap()).collect();
        prop_assert!(full.windows(2).all(|w| w[1] <= w[0]), "{:?}", full);
        prop_assert!(full[0] <= nu.len());
        let trimmed: Vec<usize> = [0.0, 0.1, 0.3].iter().map(|&e| covering_number(&nu, 0.1, e).unwrap()).collect();
        prop_assert!(trimmed.windows(2).all(|w| w[1] <= w[0]), "{:?}", trimmed);
    }
}
