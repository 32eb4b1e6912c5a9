//! Lyapunov spectra of random matrix products.
//!
//! The exponents are the limits of `(1/n) log a(x_n)`, where `a(x_n)` are the
//! singular values of the right product `x_n = h_1 ... h_n`. Transposing
//! turns it into the left product `x_n^T = h_n^T ... h_1^T`, for which the
//! classical QR recursion applies: keep an orthonormal `Q_m` with
//! `h_m^T Q_{m-1} = Q_m R_m` and accumulate `log diag R_m`. Then
//! `x_n^T = Q_n R_n ... R_1`, and the accumulated logs divided by `n`
//! converge to the exponents in descending order. Forcing `diag R_m > 0`
//! keeps the logarithms real.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::harmonic::EmpiricalMeasure;
use crate::stats;
use crate::walk::{apply_steps, domain, increment_indices, product_steps, StepTable, Stream, WalkMeasure};

/// A descending vector of exponents; sums to zero for SL(d,R) up to error.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LyapunovSpectrum {
    lambdas: Vec<f64>,
}

impl LyapunovSpectrum {
    pub fn new(lambdas: Vec<f64>) -> Self {
        Self { lambdas }
    }

    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas
    }

    pub fn dim(&self) -> usize {
        self.lambdas.len()
    }

    pub fn sum(&self) -> f64 {
        self.lambdas.iter().sum()
    }

    /// `lambda_i - lambda_{i+1}` for `i = 1..d-1`.
    pub fn gaps(&self) -> Vec<f64> {
        self.lambdas.windows(2).map(|w| w[0] - w[1]).collect()
    }

    /// Non-increasing up to `tol[i]` slack per consecutive pair.
    pub fn is_descending(&self, tol: &[f64]) -> bool {
        self.lambdas.windows(2).enumerate().all(|(j, w)| w[0] >= w[1] - tol.get(j).copied().unwrap_or(0.0))
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SpectrumEstimate {
    pub spectrum: LyapunovSpectrum,
    /// Replica standard error per exponent.
    pub stderr: Vec<f64>,
    pub n: usize,
    pub replicas: usize,
    pub gaps: Vec<f64>,
    pub gap_stderr: Vec<f64>,
    /// Per-replica exponent vectors, in replica order.
    pub replica_values: Vec<Vec<f64>>,
}

impl SpectrumEstimate {
    fn from_replicas(values: Vec<Vec<f64>>, n: usize) -> Self {
        let dim = values[0].len();
        let column = |j: usize| values.iter().map(|v| v[j]).collect::<Vec<f64>>();
        let lambdas: Vec<f64> = (0..dim).map(|j| stats::mean(&column(j))).collect();
        let stderr: Vec<f64> = (0..dim).map(|j| stats::std_err(&column(j))).collect();
        let gap_samples = |j: usize| values.iter().map(|v| v[j] - v[j + 1]).collect::<Vec<f64>>();
        let gaps = (0..dim - 1).map(|j| stats::mean(&gap_samples(j))).collect();
        let gap_stderr = (0..dim - 1).map(|j| stats::std_err(&gap_samples(j))).collect();
        Self {
            spectrum: LyapunovSpectrum::new(lambdas),
            stderr,
            n,
            replicas: values.len(),
            gaps,
            gap_stderr,
            replica_values: values,
        }
    }

    pub fn lambdas(&self) -> &[f64] {
        self.spectrum.lambdas()
    }

    /// `|sum lambda| <= 3 sum stderr`.
    pub fn zero_sum_holds(&self) -> bool {
        self.spectrum.sum().abs() <= 3.0 * self.stderr.iter().sum::<f64>() + 1e-12
    }

    /// Every gap exceeds three of its standard errors.
    pub fn is_simple(&self) -> bool {
        self.gaps.iter().zip(&self.gap_stderr).all(|(g, s)| *g > 3.0 * s)
    }
}

/// Below this ratio to `|R[0,0]|`, the last QR diagonal is at the rounding
/// level of the step and is taken from the determinant instead.
const LAST_DIAGONAL_RESOLUTION: f64 = 1e-9;

/// QR recursion over the given sequence of (already transposed) unimodular
/// increments; returns the accumulated `log diag R`, unnormalized.
///
/// When one increment is so ill-conditioned that the last diagonal entry
/// drowns in cancellation, `|det| = 1` fixes it as
/// `log |R[d-1,d-1]| = -sum_{j<d-1} log |R[j,j]|`.
pub(crate) fn qr_log_accumulators<'a>(
    dim: usize,
    increments_t: impl Iterator<Item = &'a DMatrix<f64>>,
) -> Result<Vec<f64>> {
    let mut q = DMatrix::<f64>::identity(dim, dim);
    let mut acc = vec![0.0; dim];
    let last = dim - 1;
    for ht in increments_t {
        let qr = (ht * &q).qr();
        let r = qr.r();
        q = qr.q();
        let mut head = 0.0;
        for j in 0..dim {
            let rjj = r[(j, j)];
            if j == last && dim > 1 && !(rjj.abs() > LAST_DIAGONAL_RESOLUTION * r[(0, 0)].abs()) {
                acc[j] -= head;
                continue;
            }
            if rjj == 0.0 || !rjj.is_finite() {
                return Err(Error::Numeric(format!("QR step produced R[{j},{j}] = {rjj}")));
            }
            if rjj < 0.0 {
                q.column_mut(j).neg_mut();
            }
            head += rjj.abs().ln();
            acc[j] += rjj.abs().ln();
        }
    }
    Ok(acc)
}

fn estimate_on(
    table: &StepTable,
    mu: &WalkMeasure,
    stream_domain: u64,
    n: usize,
    replicas: usize,
    seed: u64,
) -> Result<SpectrumEstimate> {
    if n == 0 || replicas == 0 {
        return Err(Error::Precondition("need n >= 1 and replicas >= 1".into()));
    }
    let transposed: StepTable = table.iter().map(|steps| steps.iter().map(|a| a.transpose()).collect()).collect();
    let dim = transposed[0][0].nrows();
    let values = (0..replicas as u64)
        .into_par_iter()
        .map(|r| {
            let idx = increment_indices(mu, stream_domain, n, r, seed);
            let acc = qr_log_accumulators(dim, product_steps(&transposed, &idx).into_iter())?;
            // from the identity frame the accumulators come out in the order of
            // the coordinate axes for walks that preserve them (diagonal
            // atoms); singular values are sorted by definition
            let mut l: Vec<f64> = acc.into_iter().map(|a| a / n as f64).collect();
            l.sort_by(|a, b| b.total_cmp(a));
            Ok(l)
        })
        .collect::<Result<Vec<Vec<f64>>>>()?;
    Ok(SpectrumEstimate::from_replicas(values, n))
}

/// Lyapunov spectrum from `replicas` independent forward paths of length `n`.
/// Replica `r` uses the forward stream of sample index `r`.
pub fn estimate_spectrum_qr(mu: &WalkMeasure, n: usize, replicas: usize, seed: u64) -> Result<SpectrumEstimate> {
    estimate_on(mu.steps(), mu, domain::FORWARD, n, replicas, seed)
}

#[derive(Debug, Clone, Serialize)]
pub struct ReflectionReport {
    pub forward: SpectrumEstimate,
    pub reflected: SpectrumEstimate,
    /// `|check-lambda_i + lambda_{d+1-i}|` per `i`.
    pub deviations: Vec<f64>,
    /// Combined standard error per `i`.
    pub sigmas: Vec<f64>,
    pub max_deviation: f64,
    pub passes: bool,
}

/// Compares the spectrum of the reflected walk against the reversed,
/// negated spectrum of the walk itself. The reflected walk runs on the
/// backward streams, independent of the forward ones.
pub fn check_reflection_identity(mu: &WalkMeasure, n: usize, replicas: usize, seed: u64) -> Result<ReflectionReport> {
    let forward = estimate_spectrum_qr(mu, n, replicas, seed)?;
    let reflected = estimate_on(mu.inverse_steps(), mu, domain::BACKWARD, n, replicas, seed)?;
    let d = mu.dim();
    let (l, lr) = (forward.lambdas(), reflected.lambdas());
    let deviations: Vec<f64> = (0..d).map(|i| (lr[i] + l[d - 1 - i]).abs()).collect();
    let sigmas: Vec<f64> =
        (0..d).map(|i| (reflected.stderr[i].powi(2) + forward.stderr[d - 1 - i].powi(2)).sqrt()).collect();
    let passes = deviations.iter().zip(&sigmas).all(|(dev, s)| *dev <= 3.0 * s + 1e-12);
    let max_deviation = deviations.iter().copied().fold(0.0, f64::max);
    Ok(ReflectionReport { forward, reflected, deviations, sigmas, max_deviation, passes })
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct PartialSumEstimate {
    pub value: f64,
    pub stderr: f64,
    pub samples: usize,
}

/// `lambda_1 + ... + lambda_i = sum_g mu(g) int log ||wedge^i g . v|| d nu_i(v)`
/// with `nu_i` replaced by the empirical measure. At most `mc_samples`
/// sample points are used (a keyed random subset when fewer than all).
pub fn furstenberg_partial_sum(
    mu: &WalkMeasure,
    i: usize,
    nu: &EmpiricalMeasure,
    mc_samples: usize,
    seed: u64,
) -> Result<PartialSumEstimate> {
    if nu.is_empty() {
        return Err(Error::EmptyMeasure);
    }
    let d = mu.dim();
    if i == 0 || i > d {
        return Err(Error::RankOutOfRange { rank: i, max: d, d });
    }
    if nu.rank() != i {
        return Err(Error::RankMismatch(nu.rank(), i));
    }
    let ext = mu.exterior_steps(i)?;
    let weights = mu.weights();
    let n_pts = nu.len();
    let picks: Vec<usize> = if mc_samples >= n_pts {
        (0..n_pts).collect()
    } else {
        let mut s = Stream::new(seed, domain::SUBSAMPLE, i as u64);
        (0..mc_samples.max(1)).map(|_| s.index(n_pts)).collect()
    };
    let values: Vec<f64> = picks
        .par_iter()
        .map(|&j| {
            let w = nu.wedge(j);
            ext.iter().zip(weights).map(|(steps, p)| p * apply_steps(steps, w).1).sum()
        })
        .collect();
    Ok(PartialSumEstimate { value: stats::mean(&values), stderr: stats::std_err(&values), samples: values.len() })
}

#[derive(Debug, Clone, Serialize)]
pub struct ExteriorReport {
    pub rank: usize,
    pub base: SpectrumEstimate,
    pub exterior: SpectrumEstimate,
    /// `lambda_1 + ... + lambda_i`.
    pub predicted_top: f64,
    /// `lambda_1 + ... + lambda_{i-1} + lambda_{i+1}`.
    pub predicted_second: f64,
    pub top_deviation: f64,
    pub second_deviation: f64,
    pub top_sigma: f64,
    pub second_sigma: f64,
    /// `lambda_i - lambda_{i+1}` from the base walk, with its standard error.
    pub gap: f64,
    pub gap_stderr: f64,
    pub passes: bool,
}

/// Runs the walk pushed forward to `wedge^i` on the same paths as the base
/// walk and compares its two top exponents with the predicted sums.
pub fn exterior_spectrum_check(
    mu: &WalkMeasure,
    i: usize,
    n: usize,
    replicas: usize,
    seed: u64,
) -> Result<ExteriorReport> {
    let d = mu.dim();
    if i == 0 || i >= d {
        return Err(Error::RankOutOfRange { rank: i, max: d - 1, d });
    }
    let base = estimate_spectrum_qr(mu, n, replicas, seed)?;
    let ext_steps = mu.exterior_steps(i)?;
    let exterior = estimate_on(&ext_steps, mu, domain::FORWARD, n, replicas, seed)?;
    let top_of = |v: &[f64]| v[..i].iter().sum::<f64>();
    let second_of = |v: &[f64]| v[..i - 1].iter().sum::<f64>() + v[i];
    let tops: Vec<f64> = base.replica_values.iter().map(|v| top_of(v)).collect();
    let seconds: Vec<f64> = base.replica_values.iter().map(|v| second_of(v)).collect();
    let predicted_top = stats::mean(&tops);
    let predicted_second = stats::mean(&seconds);
    let top_sigma = (stats::std_err(&tops).powi(2) + exterior.stderr[0].powi(2)).sqrt();
    let second_sigma = (stats::std_err(&seconds).powi(2) + exterior.stderr[1].powi(2)).sqrt();
    let top_deviation = (exterior.lambdas()[0] - predicted_top).abs();
    let second_deviation = (exterior.lambdas()[1] - predicted_second).abs();
    let passes = top_deviation <= 3.0 * top_sigma + 1e-9 && second_deviation <= 3.0 * second_sigma + 1e-9;
    Ok(ExteriorReport {
        rank: i,
        gap: base.gaps[i - 1],
        gap_stderr: base.gap_stderr[i - 1],
        base,
        exterior,
        predicted_top,
        predicted_second,
        top_deviation,
        second_deviation,
        top_sigma,
        second_sigma,
        passes,
    })
}
