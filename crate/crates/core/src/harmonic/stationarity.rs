use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::Serialize;

use super::empirical::EmpiricalMeasure;
use crate::error::{Error, Result};
use crate::linalg::{orthonormalize, wedge_distance, GrassmannPoint};
use crate::stats;
use crate::walk::{domain, Stream, WalkMeasure};

#[derive(Debug, Clone, Serialize)]
pub struct StationarityReport {
    /// `|int f d nu - sum_g mu(g) int f o g d nu|` per test function.
    pub discrepancies: Vec<f64>,
    /// Bootstrap standard error of each discrepancy.
    pub stderrs: Vec<f64>,
    pub max_discrepancy: f64,
    pub tol: f64,
    pub passes: bool,
}

/// `count` pseudo-random anchors on Gr_i(R^d) (Gaussian frames).
pub fn default_anchors(d: usize, i: usize, count: usize, seed: u64) -> Result<Vec<GrassmannPoint>> {
    (0..count as u64)
        .map(|a| {
            let mut s = Stream::new(seed, domain::ANCHOR, a);
            GrassmannPoint::from_frame(&orthonormalize(&DMatrix::from_fn(d, i, |_, _| s.gaussian()))?)
        })
        .collect()
}

/// Stationarity `mu * nu = nu` tested on the 1-Lipschitz functions
/// `xi -> rho(xi, zeta_r)` for the given anchors. A function passes when its
/// discrepancy is at most `tol` plus its bootstrap standard error.
pub fn stationarity_check(
    mu: &WalkMeasure,
    nu: &EmpiricalMeasure,
    anchors: &[GrassmannPoint],
    tol: f64,
    seed: u64,
) -> Result<StationarityReport> {
    if nu.is_empty() {
        return Err(Error::EmptyMeasure);
    }
    let i = nu.rank();
    if anchors.iter().any(|a| a.rank() != i) {
        return Err(Error::Invalid("anchors must have the rank of the measure".into()));
    }
    let ext = mu.exterior_steps(i)?;
    let weights = mu.weights();
    let width = nu.wedge_len();
    // images of every point under every atom
    let images: Vec<Vec<f64>> = ext.iter().map(|steps| nu.push_forward_steps(steps)).collect();
    let results: Vec<(f64, f64)> = anchors
        .par_iter()
        .enumerate()
        .map(|(a, zeta)| {
            let z = zeta.wedge().as_slice();
            let per_point: Vec<f64> = (0..nu.len())
                .map(|j| {
                    let f = wedge_distance(z, nu.wedge(j));
                    let pushed: f64 = images
                        .iter()
                        .zip(weights)
                        .map(|(img, w)| w * wedge_distance(z, &img[j * width..(j + 1) * width]))
                        .sum();
                    f - pushed
                })
                .collect();
            (stats::mean(&per_point).abs(), stats::bootstrap_se(&per_point, 200, seed, a as u64))
        })
        .collect();
    let discrepancies: Vec<f64> = results.iter().map(|r| r.0).collect();
    let stderrs: Vec<f64> = results.iter().map(|r| r.1).collect();
    let passes = results.iter().all(|(d, s)| *d <= tol + s);
    let max_discrepancy = discrepancies.iter().copied().fold(0.0, f64::max);
    Ok(StationarityReport { discrepancies, stderrs, max_discrepancy, tol, passes })
}


#[cfg(test)]
mod tests {
    use super::*;
    use crate::harmonic::sample_harmonic_measure;
    use crate::linalg::SquareMatrix;
    use crate::presets;

    #[test]
    fn fixed_point_has_zero_discrepancy() {
        let mu = WalkMeasure::dirac(SquareMatrix::diagonal(&[4.0, 0.25])).unwrap();
        let nu = EmpiricalMeasure::from_points(1, vec![GrassmannPoint::coordinate(2, &[0]).unwrap()]).unwrap();
        let anchors = default_anchors(2, 1, 8, 0).unwrap();
        let rep = stationarity_check(&mu, &nu, &anchors, 1e-12, 0).unwrap();
        assert!(rep.max_discrepancy <= 1e-12 && rep.passes);
    }

    #[test]
    fn non_fixed_point_fails() {
        let mu = WalkMeasure::from_finite(&presets::sanov_uniform()).unwrap();
        let nu = EmpiricalMeasure::from_points(1, vec![GrassmannPoint::from_vectors(&[&[1.0, 0.3]]).unwrap()]).unwrap();
        let anchors = default_anchors(2, 1, 8, 0).unwrap();
        let rep = stationarity_check(&mu, &nu, &anchors, 0.04, 0).unwrap();
        assert!(!rep.passes && rep.max_discrepancy > 0.04);
    }

    #[test]
    fn sampled_measure_is_stationary() {
        let mu = WalkMeasure::from_finite(&presets::sanov_uniform()).unwrap();
        let nu = sample_harmonic_measure(&mu, 1, 60, 4000, 3).unwrap();
        let anchors = default_anchors(2, 1, 16, 9).unwrap();
        let rep = stationarity_check(&mu, &nu, &anchors, 4.0 / (4000f64).sqrt(), 0).unwrap();
        assert!(rep.passes, "{rep:?}");
    }
}
