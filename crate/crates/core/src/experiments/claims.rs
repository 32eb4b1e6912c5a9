use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::group::{analyze_regularity, Diagonalization, FiniteMeasure, GroupElement};
use crate::harmonic::{sample_harmonic_measure, EmpiricalMeasure};
use crate::linalg::SquareMatrix;
use crate::walk::{domain, Stream, WalkMeasure};

/// Slack allowed below the norm-product bound for rounding.
pub const GK_SLACK: f64 = 1e-6;

#[derive(Debug, Clone, Serialize)]
pub struct GkReport {
    pub k_max: u32,
    pub trials: usize,
    /// `-2 (log ||h|| + log ||h^{-1}||) - slack`.
    pub bound: f64,
    pub violations: usize,
    /// Smallest `log ||g^k v|| + log ||g^{-k} v|| - bound` observed.
    pub min_margin: f64,
    pub worst_k: u32,
}

fn diagonalize(g: &GroupElement) -> Result<Diagonalization> {
    analyze_regularity(&g.to_matrix())?
        .diagonalization
        .ok_or_else(|| Error::Decomposition("gamma is not diagonalizable over R".into()))
}

/// Random audit of `log ||g^k v|| + log ||g^{-k} v|| >= -2 (log ||h|| + log ||h^{-1}||)`
/// for unit `v` and `1 <= k <= k_max`, where `g = h^{-1} delta h`.
///
/// `g^{+-k} v` is computed by applying the exactly rounded `g` and `g^{-1}`
/// step by step with renormalization, so the audit neither overflows for
/// large `k` nor goes through the diagonalization it is checking.
pub fn claim_gk_check(gamma: &GroupElement, k_max: u32, trials: usize, seed: u64) -> Result<GkReport> {
    if k_max == 0 {
        return Err(Error::Precondition("k_max must be positive".into()));
    }
    let diag = diagonalize(gamma)?;
    let bound = -2.0 * (diag.h.op_norm().ln() + diag.h_inv.op_norm().ln()) - GK_SLACK;
    let plus = gamma.to_matrix().into_inner();
    let minus = gamma.inverse()?.to_matrix().into_inner();
    let d = gamma.dim();
    let margins: Vec<(f64, u32)> = (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let mut s = Stream::new(seed, domain::AUDIT, t);
            let k = 1 + s.index(k_max as usize);
            let v = DVector::from_fn(d, |_, _| s.gaussian()).normalize();
            let lhs = log_norm_of_power(&plus, &v, k) + log_norm_of_power(&minus, &v, k);
            (lhs - bound, k as u32)
        })
        .collect();
    let violations = margins.iter().filter(|m| m.0 < 0.0).count();
    let (min_margin, worst_k) = margins.iter().copied().fold((f64::INFINITY, 0), |a, b| if b.0 < a.0 { b } else { a });
    Ok(GkReport { k_max, trials, bound, violations, min_margin, worst_k })
}

/// `log ||g^k v||`, accumulated one factor at a time.
fn log_norm_of_power(g: &DMatrix<f64>, v: &DVector<f64>, k: usize) -> f64 {
    let mut w = v.clone();
    let mut log = 0.0;
    for _ in 0..k {
        w = g * &w;
        let n = w.norm();
        log += n.ln();
        w /= n;
    }
    log + w.norm().ln()
}

/// Membership in the open set of lines `U = { [v] : s (hv)_1 > beta ||hv||
/// and s (hv)_d > beta ||hv|| for a sign s }`.
pub fn in_open_set(h: &SquareMatrix, beta: f64, v: &[f64]) -> bool {
    let w = h.as_matrix() * DVector::from_column_slice(v);
    let (first, last, norm) = (w[0], w[w.len() - 1], w.norm());
    (first > beta * norm && last > beta * norm) || (-first > beta * norm && -last > beta * norm)
}

/// Empirical mass of `U` under a sample of lines.
pub fn open_set_mass(nu: &EmpiricalMeasure, h: &SquareMatrix, beta: f64) -> Result<f64> {
    if nu.rank() != 1 {
        return Err(Error::RankMismatch(nu.rank(), 1));
    }
    if nu.is_empty() {
        return Err(Error::EmptyMeasure);
    }
    let hits = nu.points().iter().filter(|p| in_open_set(h, beta, p.frame().as_slice())).count();
    Ok(hits as f64 / nu.len() as f64)
}

#[derive(Debug, Clone, Serialize)]
pub struct OpensCell {
    pub k: u32,
    pub mass: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct OpensReport {
    pub beta: f64,
    pub samples: usize,
    pub n: usize,
    pub cells: Vec<OpensCell>,
    pub min_mass: f64,
    pub any_zero: bool,
}

/// Harmonic mass `nu_1^k(U)` of the open set built from the diagonalization
/// of `gamma`, for every `k` of the `mu_k` family.
pub fn claim_opens_estimate(
    mu: &FiniteMeasure,
    gamma: &GroupElement,
    ks: &[u32],
    beta: f64,
    n: usize,
    samples: usize,
    seed: u64,
) -> Result<OpensReport> {
    let h = diagonalize(gamma)?.h;
    let cells = ks
        .iter()
        .map(|&k| {
            let walk = WalkMeasure::from_finite(&mu.build_mu_k(gamma, k)?)?;
            let nu = sample_harmonic_measure(&walk, 1, n, samples, seed)?;
            Ok(OpensCell { k, mass: open_set_mass(&nu, &h, beta)? })
        })
        .collect::<Result<Vec<_>>>()?;
    let min_mass = cells.iter().map(|c| c.mass).fold(f64::INFINITY, f64::min);
    Ok(OpensReport { beta, samples, n, any_zero: cells.iter().any(|c| c.mass == 0.0), min_mass, cells })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::Rational;
    use crate::presets;

    fn diag2() -> GroupElement {
        let r = |n: i128, d: i128| Rational::new(n, d).unwrap();
        GroupElement::from_rows(vec![vec![r(2, 1), r(0, 1)], vec![r(0, 1), r(1, 2)]]).unwrap()
    }

    #[test]
    fn diagonal_gamma_has_slack() {
        let rep = claim_gk_check(&diag2(), 20, 2000, 1).unwrap();
        assert_eq!(rep.violations, 0);
        assert!(rep.min_margin > 0.0);
        assert!(rep.bound.abs() < 1e-5);
    }

    #[test]
    fn eigenvector_gives_zero_lhs() {
        let g = diag2().to_matrix().into_inner();
        let gi = diag2().pow(-1).unwrap().to_matrix().into_inner();
        let e1 = DVector::from_column_slice(&[1.0, 0.0]);
        for k in 1..10 {
            let lhs = (g.pow(k) * &e1).norm().ln() + (gi.pow(k) * &e1).norm().ln();
            assert!(lhs.abs() < 1e-12);
        }
    }

    #[test]
    fn hyperbolic_audit() {
        let g = GroupElement::from_integers(&[&[2, 1], &[1, 1]]).unwrap();
        let rep = claim_gk_check(&g, 64, 5000, 2).unwrap();
        assert_eq!(rep.violations, 0, "{rep:?}");
    }

    #[test]
    fn powers_beyond_exact_range() {
        // (AB)^64 has entries near 1e49, far outside exact integer range
        let rep = claim_gk_check(&presets::sanov_gamma(), 64, 5000, 3).unwrap();
        assert_eq!(rep.violations, 0, "{rep:?}");
        assert!(rep.min_margin.is_finite());
    }

    #[test]
    fn stepwise_power_matches_direct() {
        let g = DMatrix::<f64>::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 1.0]);
        let v = DVector::from_column_slice(&[0.6, -0.8]);
        let direct: f64 = (g.pow(7) * &v).norm().ln();
        assert!((log_norm_of_power(&g, &v, 7) - direct).abs() < 1e-12);
    }

    #[test]
    fn parabolic_gamma_rejected() {
        let u = GroupElement::from_integers(&[&[1, 1], &[0, 1]]).unwrap();
        assert!(claim_gk_check(&u, 4, 10, 0).is_err());
    }

    #[test]
    fn open_set_membership() {
        let id = SquareMatrix::identity(2);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert!(in_open_set(&id, 0.5, &[s, s]));
        assert!(in_open_set(&id, 0.5, &[-s, -s]));
        assert!(!in_open_set(&id, 0.5, &[s, -s]));
        assert!(!in_open_set(&id, 0.5, &[1.0, 0.0]));
    }

    #[test]
    fn dirac_walk_masses() {
        // attracting line of rot(pi/4) diag(2, 1/2) rot(-pi/4) is the diagonal
        let rot = SquareMatrix::rotation(2, 0, 1, std::f64::consts::FRAC_PI_4);
        let g = rot.as_matrix() * SquareMatrix::diagonal(&[2.0, 0.5]).as_matrix() * rot.as_matrix().transpose();
        let inside = WalkMeasure::dirac(SquareMatrix::new(g).unwrap()).unwrap();
        let nu = sample_harmonic_measure(&inside, 1, 60, 50, 0).unwrap();
        let id = SquareMatrix::identity(2);
        assert_eq!(open_set_mass(&nu, &id, 0.5).unwrap(), 1.0);
        let outside = WalkMeasure::dirac(SquareMatrix::diagonal(&[2.0, 0.5])).unwrap();
        let nu = sample_harmonic_measure(&outside, 1, 60, 50, 0).unwrap();
        assert_eq!(open_set_mass(&nu, &id, 0.5).unwrap(), 0.0);
    }

    #[test]
    fn sanov_family_charges_the_open_set() {
        let rep =
            claim_opens_estimate(&presets::sanov_uniform(), &presets::sanov_gamma(), &[1, 4], 0.5, 40, 1000, 3).unwrap();
        assert!(!rep.any_zero && rep.min_mass > 0.0, "{rep:?}");
    }
}
