use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::Serialize;

use super::empirical::EmpiricalMeasure;
use crate::error::{Error, Result};
use crate::linalg::{grassmann_distance, orthonormalize, svd_sorted, Flag, GrassmannPoint, ScaledMatrix};
use crate::tolerances;
use crate::walk::{domain, increment_indices, product_steps, StepTable, Stream, WalkMeasure};

/// A limit-flag estimate for one sample path.
#[derive(Debug, Clone, Serialize)]
pub struct FlagSample {
    pub flag: Flag,
    pub n: usize,
    /// `max_i rho(pi_i F_{n/2}, pi_i F_n)`.
    pub convergence_gap: f64,
    /// Two singular values of `x_n` agree to within the flag-gap tolerance,
    /// so the flag is not determined by the path prefix.
    pub degenerate: bool,
}

impl FlagSample {
    pub fn project(&self, i: usize) -> Result<GrassmannPoint> {
        self.flag.project(i)
    }
}

/// Fixed generic reference frame `V*` (depends only on `d`).
///
/// The limit flag of a path is `lim x_n V` for every flag `V` in general
/// position; a fixed pseudo-random `V*` is in general position almost surely
/// and keeps the estimate exactly equivariant: prefixing the path by `g`
/// maps the estimate by `g`.
pub fn reference_frame(d: usize) -> DMatrix<f64> {
    let mut s = Stream::new(0, domain::REFERENCE, d as u64);
    let g = DMatrix::from_fn(d, d, |_, _| s.gaussian());
    orthonormalize(&g).expect("gaussian frame is full rank")
}

/// The flag `h_1 ... h_n V*`, computed from the innermost factor outwards
/// with a re-orthonormalization after every factor, so every member of the
/// flag is resolved even when the singular values of the product spread
/// beyond double-precision range.
///
/// Only the first `d - 1` frame vectors are carried: the last one is the
/// orthogonal complement of the others, and computing it through a single
/// ill-conditioned factor would only lose it to cancellation.
pub fn flag_of_product(factors: &[&DMatrix<f64>]) -> Result<Flag> {
    let d = factors.first().map(|m| m.nrows()).ok_or_else(|| Error::Precondition("empty product".into()))?;
    let mut w = reference_frame(d).columns(0, d - 1).into_owned();
    for m in factors.iter().rev() {
        w = orthonormalize(&(*m * &w))?;
    }
    Flag::from_frame(&complete_frame(&w))
}

/// Appends the unit normal of the span of the `d - 1` orthonormal columns.
fn complete_frame(w: &DMatrix<f64>) -> DMatrix<f64> {
    let d = w.nrows();
    let residual = |j: usize| {
        let mut e = nalgebra::DVector::<f64>::zeros(d);
        e[j] = 1.0;
        let proj = w * (w.transpose() * &e);
        e - proj
    };
    // the coordinate axis farthest from the span gives the best-conditioned normal
    let best = (0..d).map(residual).max_by(|a, b| a.norm().total_cmp(&b.norm())).expect("d >= 2");
    let mut normal = best.normalize();
    // one more projection pass removes the rounding left in the residual
    normal -= w * (w.transpose() * &normal);
    normal.normalize_mut();
    let mut full = w.clone().insert_column(d - 1, 0.0);
    full.set_column(d - 1, &normal);
    full
}

fn max_projection_gap(a: &Flag, b: &Flag) -> Result<f64> {
    let d = a.dim();
    let mut gap: f64 = 0.0;
    for i in 1..d {
        gap = gap.max(grassmann_distance(&a.project(i)?, &b.project(i)?)?);
    }
    Ok(gap)
}

fn limit_flag_from(table: &StepTable, idx: &[usize], d: usize) -> Result<FlagSample> {
    let n = idx.len();
    if n < 2 {
        return Err(Error::Precondition("limit flags need n >= 2".into()));
    }
    let factors = product_steps(table, idx);
    let flag = flag_of_product(&factors)?;
    let half = flag_of_product(&product_steps(table, &idx[..n / 2]))?;
    let convergence_gap = max_projection_gap(&half, &flag)?;

    let mut x = ScaledMatrix::identity(d);
    for f in &factors {
        x.mul_right(f)?;
    }
    let sv = svd_sorted(x.unit())?.singular_values;
    let tol = tolerances::current().flag_gap_rel;
    // pairs below the resolution of the product carry no information
    let degenerate = sv.windows(2).any(|w| w[0] > tol * sv[0] && (w[0] - w[1]) <= tol * w[0]);
    if degenerate {
        log::warn!("limit flag undetermined: near-equal singular values {sv:?}");
    }
    Ok(FlagSample { flag, n, convergence_gap, degenerate })
}

/// Limit-flag estimate of the forward path `sample_index`.
pub fn sample_limit_flag(mu: &WalkMeasure, n: usize, sample_index: u64, seed: u64) -> Result<FlagSample> {
    let idx = increment_indices(mu, domain::FORWARD, n, sample_index, seed);
    limit_flag_from(mu.steps(), &idx, mu.dim())
}

/// Limit-flag estimate of the backward path (the reflected walk on the
/// backward stream of `sample_index`).
pub fn sample_backward_flag(mu: &WalkMeasure, n: usize, sample_index: u64, seed: u64) -> Result<FlagSample> {
    let idx = increment_indices(mu, domain::BACKWARD, n, sample_index, seed);
    limit_flag_from(mu.inverse_steps(), &idx, mu.dim())
}

/// Limit flags of forward paths `0..count`, in sample order.
pub fn sample_flags(mu: &WalkMeasure, n: usize, count: usize, seed: u64) -> Result<Vec<FlagSample>> {
    (0..count as u64).into_par_iter().map(|s| sample_limit_flag(mu, n, s, seed)).collect()
}

/// Projects flag samples to Gr_i.
pub fn project_flags(flags: &[FlagSample], i: usize) -> Result<EmpiricalMeasure> {
    let points = flags.par_iter().map(|f| f.project(i)).collect::<Result<Vec<_>>>()?;
    EmpiricalMeasure::from_points(i, points)
}

/// Empirical harmonic measure on Gr_i from `count` independent paths.
pub fn sample_harmonic_measure(
    mu: &WalkMeasure,
    i: usize,
    n: usize,
    count: usize,
    seed: u64,
) -> Result<EmpiricalMeasure> {
    let d = mu.dim();
    if i == 0 || i >= d {
        return Err(Error::RankOutOfRange { rank: i, max: d - 1, d });
    }
    if count == 0 {
        return Err(Error::Precondition("need at least one sample".into()));
    }
    project_flags(&sample_flags(mu, n, count, seed)?, i)
}

/// `xi_x = (pi_{d-i} of the backward limit flag)^perp`, a point of Gr_i.
pub fn backward_limit_xi(mu: &WalkMeasure, i: usize, n: usize, sample_index: u64, seed: u64) -> Result<GrassmannPoint> {
    let d = mu.dim();
    if i == 0 || i >= d {
        return Err(Error::RankOutOfRange { rank: i, max: d - 1, d });
    }
    sample_backward_flag(mu, n, sample_index, seed)?.project(d - i)?.orthogonal_complement()
}
