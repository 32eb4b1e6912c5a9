use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::harmonic::EmpiricalMeasure;
use crate::linalg::wedge_distance;
use crate::stats;
use crate::tolerances;
use crate::walk::WalkMeasure;

pub const BOOTSTRAP_RESAMPLES: usize = 200;

#[derive(Debug, Clone, Serialize)]
pub struct DifferentialEntropyEstimate {
    pub i: usize,
    pub value: f64,
    pub stderr: f64,
    pub k_neighbors: usize,
    pub sample_size: usize,
    pub estimator: &'static str,
}

/// Default neighbor count `ceil(N^(1/3))`.
pub fn default_k(n: usize) -> usize {
    ((n as f64).cbrt().ceil() as usize).max(1)
}

/// Differential (Furstenberg) entropy
/// `E = -sum_g mu(g) int log (d g^{-1} nu / d nu) d nu` on Gr_i.
///
/// The Radon-Nikodym derivative at a sample point `b_j` is estimated by a
/// pooled neighbor count: with `R` the distance from `b_j` to its `2k`-th
/// nearest neighbor in the union of the cloud and the translated cloud
/// `g^{-1} . cloud` (excluding `b_j` and its own translate), the ratio is
/// `(c + 1/2) / (a + 1/2)` where `a` and `c` count cloud and translated
/// points in the closed ball of radius `R`. Counts at a common radius need
/// no dimension exponent, and exact coincidences (atoms) are counted rather
/// than breaking the neighbor search. The standard error is a bootstrap
/// over sample points, i.e. over independent paths.
pub fn differential_entropy(
    mu: &WalkMeasure,
    i: usize,
    nu: &EmpiricalMeasure,
    k_neighbors: usize,
    seed: u64,
) -> Result<DifferentialEntropyEstimate> {
    let n = nu.len();
    if n < 2 {
        return Err(Error::Precondition("need at least two sample points".into()));
    }
    if k_neighbors == 0 {
        return Err(Error::Precondition("need k >= 1".into()));
    }
    if nu.rank() != i {
        return Err(Error::RankMismatch(nu.rank(), i));
    }
    let k = k_neighbors.min(n - 1);
    let width = nu.wedge_len();
    let inv_ext = mu.exterior_inverse_steps(i)?;
    let translated: Vec<Vec<f64>> = inv_ext.iter().map(|steps| nu.push_forward_steps(steps)).collect();
    let weights = mu.weights();
    let coincide = tolerances::current().coincide;

    let per_point: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|j| {
            let z = nu.wedge(j);
            let cloud: Vec<f64> = (0..n).filter(|&l| l != j).map(|l| wedge_distance(z, nu.wedge(l))).collect();
            let mut pooled = Vec::with_capacity(2 * (n - 1));
            let mut total = 0.0;
            for (t, w) in translated.iter().zip(weights) {
                let moved: Vec<f64> = (0..n)
                    .filter(|&l| l != j)
                    .map(|l| wedge_distance(z, &t[l * width..(l + 1) * width]))
                    .collect();
                pooled.clear();
                pooled.extend_from_slice(&cloud);
                pooled.extend_from_slice(&moved);
                let (_, r, _) = pooled.select_nth_unstable_by(2 * k - 1, f64::total_cmp);
                let r = r.max(coincide);
                let a = cloud.iter().filter(|&&x| x <= r).count() as f64;
                let c = moved.iter().filter(|&&x| x <= r).count() as f64;
                total += w * ((c + 0.5) / (a + 0.5)).ln();
            }
            total
        })
        .collect();
    let value = -stats::mean(&per_point);
    let stderr = stats::bootstrap_se(&per_point, BOOTSTRAP_RESAMPLES, seed, i as u64);
    Ok(DifferentialEntropyEstimate {
        i,
        value,
        stderr,
        k_neighbors: k,
        sample_size: n,
        estimator: "pooled-count-ratio",
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harmonic::sample_harmonic_measure;
    use crate::linalg::{GrassmannPoint, SquareMatrix};
    use crate::presets;

    #[test]
    fn identity_action_gives_zero() {
        let mu = WalkMeasure::dirac(SquareMatrix::identity(2)).unwrap();
        let sanov = WalkMeasure::from_finite(&presets::sanov_uniform()).unwrap();
        let nu = sample_harmonic_measure(&sanov, 1, 40, 300, 1).unwrap();
        let e = differential_entropy(&mu, 1, &nu, 5, 0).unwrap();
        assert_eq!(e.value, 0.0);
    }

    #[test]
    fn fixed_point_gives_zero() {
        let mu = WalkMeasure::dirac(SquareMatrix::diagonal(&[4.0, 0.25])).unwrap();
        let pts = vec![GrassmannPoint::coordinate(2, &[0]).unwrap(); 50];
        let nu = EmpiricalMeasure::from_points(1, pts).unwrap();
        let e = differential_entropy(&mu, 1, &nu, 4, 0).unwrap();
        assert!(e.value.abs() < 1e-12);
    }

    #[test]
    fn sanov_entropy_is_positive_and_bounded() {
        let mu = WalkMeasure::from_finite(&presets::sanov_uniform()).unwrap();
        let nu = sample_harmonic_measure(&mu, 1, 80, 2000, 2).unwrap();
        let e = differential_entropy(&mu, 1, &nu, default_k(2000), 0).unwrap();
        assert!(e.stderr > 0.0);
        assert!(e.value > 0.2 && e.value < 4f64.ln(), "{e:?}");
    }

    #[test]
    fn default_k_is_cube_root() {
        assert_eq!(default_k(1000), 10);
        assert_eq!(default_k(10_000), 22);
        assert_eq!(default_k(1), 1);
    }
}
