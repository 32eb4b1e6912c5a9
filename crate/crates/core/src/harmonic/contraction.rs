use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::Serialize;

use super::flags::backward_limit_xi;
use crate::error::{Error, Result};
use crate::linalg::{grassmann_distance, GrassmannPoint};
use crate::stats;
use crate::walk::{domain, increment_indices, product_steps, Stream, WalkMeasure};

/// Contraction of one backward path.
#[derive(Debug, Clone, Serialize)]
pub struct ContractionSample {
    pub sample_index: u64,
    /// `-(1/n) log diam(x_{-n}^{-1} S)` for the sampled sphere points `S`.
    pub rate: f64,
    pub log_diameter: f64,
    pub xi: GrassmannPoint,
}

#[derive(Debug, Clone, Serialize)]
pub struct ContractionReport {
    pub rank: usize,
    pub radius: f64,
    pub n: usize,
    pub samples: Vec<ContractionSample>,
    pub mean: f64,
    pub p05: f64,
    pub median: f64,
    pub p95: f64,
}

const MAX_REJECTIONS: usize = 100_000;

/// Points on the sphere of radius `r` around `xi`: each starts from a
/// Gaussian direction orthogonal to `xi` and is pushed out along it until
/// the distance reaches `r` (the distance grows monotonically along the ray).
pub(crate) fn sphere_points(xi: &GrassmannPoint, r: f64, count: usize, stream: &mut Stream) -> Result<Vec<GrassmannPoint>> {
    let (d, i) = (xi.ambient_dim(), xi.rank());
    let f = xi.frame();
    let proj = DMatrix::<f64>::identity(d, d) - f * f.transpose();
    let mut out = Vec::with_capacity(count);
    let mut rejections = 0;
    while out.len() < count {
        let g = &proj * DMatrix::from_fn(d, i, |_, _| stream.gaussian());
        let dist_at = |t: f64| xi.perturbed(&g, t).and_then(|p| grassmann_distance(&p, xi));
        let mut hi = 1.0;
        let reached = loop {
            match dist_at(hi) {
                Ok(rho) if rho >= r => break true,
                Ok(_) if hi < 1e12 => hi *= 4.0,
                _ => break false,
            }
        };
        if g.norm() < 1e-8 || !reached {
            rejections += 1;
            if rejections > MAX_REJECTIONS {
                return Err(Error::Numeric(format!("ball sampling degenerate after {MAX_REJECTIONS} rejections")));
            }
            continue;
        }
        let mut lo = 0.0;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if dist_at(mid)? < r {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= 1e-15 * hi {
                break;
            }
        }
        out.push(xi.perturbed(&g, hi)?);
    }
    Ok(out)
}

/// Pushes unit Plücker vectors through a sequence of exterior-power
/// matrices and returns `max_{a<b} log rho` of the images, with all scales
/// kept in logarithms so that distances far below `1e-308` are resolved.
///
/// Each vector's own norm is tracked with per-step renormalization; for each
/// pair the 2-frame `[a, b]` is re-orthogonalized every step and the log of
/// the second Gram-Schmidt pivot accumulated. Then
/// `log rho(Ma, Mb) = sum log r22 - log |Mb|`.
pub(crate) fn max_log_distance(ext_seq: &[&DMatrix<f64>], wedges: &[Vec<f64>]) -> f64 {
    let k = wedges.len();
    let mut log_norms = vec![0.0; k];
    for (p, w) in wedges.iter().enumerate() {
        let mut v = w.clone();
        for m in ext_seq {
            v = mat_vec(m, &v);
            let n = norm(&v);
            log_norms[p] += n.ln();
            v.iter_mut().for_each(|x| *x /= n);
        }
    }
    let mut best = f64::NEG_INFINITY;
    for a in 0..k {
        for b in (a + 1)..k {
            let (mut q0, mut q1) = (wedges[a].clone(), wedges[b].clone());
            let mut log_r22 = gram_schmidt(&mut q0, &mut q1);
            for m in ext_seq {
                q0 = mat_vec(m, &q0);
                q1 = mat_vec(m, &q1);
                log_r22 += gram_schmidt(&mut q0, &mut q1);
            }
            best = best.max(log_r22 - log_norms[b]);
        }
    }
    best
}

fn mat_vec(m: &DMatrix<f64>, v: &[f64]) -> Vec<f64> {
    (0..m.nrows()).map(|r| (0..m.ncols()).map(|c| m[(r, c)] * v[c]).sum()).collect()
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Orthonormalizes `(q0, q1)` in place; returns `log r22`. The first pivot
/// is the growth of `q0` alone, which is tracked separately.
fn gram_schmidt(q0: &mut [f64], q1: &mut [f64]) -> f64 {
    let n0 = norm(q0);
    q0.iter_mut().for_each(|x| *x /= n0);
    let c: f64 = q0.iter().zip(q1.iter()).map(|(a, b)| a * b).sum();
    q1.iter_mut().zip(q0.iter()).for_each(|(b, a)| *b -= c * a);
    let n1 = norm(q1);
    q1.iter_mut().for_each(|x| *x /= n1);
    n1.ln()
}

/// Contraction of the ball `B(xi_x, r)` of radius `r` on Gr_i under
/// `x_{-n}^{-1}` along one backward path.
pub fn contraction_rate(
    mu: &WalkMeasure,
    i: usize,
    r: f64,
    n: usize,
    boundary_samples: usize,
    sample_index: u64,
    seed: u64,
) -> Result<ContractionSample> {
    if !(r > 0.0 && r < 1.0) {
        return Err(Error::Precondition(format!("ball radius must lie in (0, 1), got {r}")));
    }
    if boundary_samples < 2 {
        return Err(Error::Precondition("need at least two boundary samples".into()));
    }
    let xi = backward_limit_xi(mu, i, n, sample_index, seed)?;
    let mut stream = Stream::new(seed, domain::PERTURB, sample_index);
    let sphere = sphere_points(&xi, r, boundary_samples, &mut stream)?;
    // x_{-n} = h~_1 ... h~_n with h~ ~ reflected measure, so
    // x_{-n}^{-1} = h~_n^{-1} ... h~_1^{-1}, and each h~^{-1} is an atom of mu;
    // the innermost factor h~_1^{-1} acts first.
    let idx = increment_indices(mu, domain::BACKWARD, n, sample_index, seed);
    let ext = mu.exterior_steps(i)?;
    // action order is the reverse of the product order of x_{-n}^{-1}
    let reversed: Vec<usize> = idx.iter().rev().copied().collect();
    let mut seq = product_steps(&ext, &reversed);
    seq.reverse();
    let wedges: Vec<Vec<f64>> = sphere.iter().map(|p| p.wedge().as_slice().to_vec()).collect();
    let log_diameter = max_log_distance(&seq, &wedges);
    Ok(ContractionSample { sample_index, rate: -log_diameter / n as f64, log_diameter, xi })
}

/// [`contraction_rate`] over backward paths `0..paths`.
pub fn contraction_rates(
    mu: &WalkMeasure,
    i: usize,
    r: f64,
    n: usize,
    boundary_samples: usize,
    paths: usize,
    seed: u64,
) -> Result<ContractionReport> {
    let samples = (0..paths as u64)
        .into_par_iter()
        .map(|s| contraction_rate(mu, i, r, n, boundary_samples, s, seed))
        .collect::<Result<Vec<_>>>()?;
    let rates: Vec<f64> = samples.iter().map(|s| s.rate).collect();
    Ok(ContractionReport {
        rank: i,
        radius: r,
        n,
        mean: stats::mean(&rates),
        p05: stats::quantile(&rates, 0.05),
        median: stats::median(&rates),
        p95: stats::quantile(&rates, 0.95),
        samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::SquareMatrix;
    use std::f64::consts::E;

    #[test]
    fn sphere_points_have_the_radius() {
        let xi = GrassmannPoint::coordinate(4, &[0, 2]).unwrap();
        let mut s = Stream::new(1, domain::PERTURB, 0);
        for p in sphere_points(&xi, 0.7, 10, &mut s).unwrap() {
            assert!((grassmann_distance(&p, &xi).unwrap() - 0.7).abs() < 1e-9);
        }
    }

    #[test]
    fn diagonal_contraction_matches_gap() {
        let mu = WalkMeasure::dirac(SquareMatrix::diagonal(&[E, 1.0 / E])).unwrap();
        let s = contraction_rate(&mu, 1, 0.5, 200, 6, 0, 0).unwrap();
        assert!((s.rate - 2.0).abs() < 0.05, "{}", s.rate);
    }

    #[test]
    fn isometry_does_not_contract() {
        let mu = WalkMeasure::dirac(SquareMatrix::rotation(2, 0, 1, 0.4)).unwrap();
        // an isometry has no limit flag; any xi works for the rate
        let s = contraction_rate(&mu, 1, 0.5, 100, 6, 0, 0).unwrap();
        assert!(s.rate.abs() < 0.02, "{}", s.rate);
    }

    #[test]
    fn rejects_bad_radius() {
        let mu = WalkMeasure::dirac(SquareMatrix::diagonal(&[E, 1.0 / E])).unwrap();
        assert!(contraction_rate(&mu, 1, 1.0, 10, 4, 0, 0).is_err());
    }

    #[test]
    fn log_distances_survive_underflow() {
        // diag(e^5, e^-5) contracts lines towards e_1 by e^-10 per step
        let m = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![5f64.exp(), (-5f64).exp()]));
        let seq: Vec<&DMatrix<f64>> = std::iter::repeat_n(&m, 100).collect();
        let w = vec![vec![0.6, 0.8], vec![0.6, -0.8]];
        let ld = max_log_distance(&seq, &w);
        // tan angle shrinks by e^-10 per step: log rho ~ log(2 tan) - 1000
        let expected = (2.0 * (0.8f64 / 0.6)).ln() - 1000.0;
        assert!((ld - expected).abs() < 1e-6, "{ld} vs {expected}");
    }
}
