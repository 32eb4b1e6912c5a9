use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::harmonic::EmpiricalMeasure;
use crate::linalg::{wedge_distance, GrassmannPoint, ScaledMatrix};
use crate::stats;
use crate::walk::{domain, increment_indices, WalkMeasure};

/// A closed ball `B(center, radius)` on a Grassmannian.
#[derive(Debug, Clone, Serialize)]
pub struct BallSpec {
    pub center: GrassmannPoint,
    pub radius: f64,
}

impl BallSpec {
    /// Ball around sample point `j` holding (at least) the fraction `q` of
    /// the empirical measure.
    pub fn quantile_ball(nu: &EmpiricalMeasure, j: usize, q: f64) -> Self {
        let d = nu.distances_from(nu.wedge(j));
        Self { center: nu.point(j).clone(), radius: stats::quantile(&d, q) }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct DecayReport {
    pub initial_mass: f64,
    /// Per backward path, `-(1/n) log nu(x_{-n}^{-1} A)` at `n = n_max`
    /// (`+inf` when the translated ball holds no sample point).
    pub rates: Vec<f64>,
    /// `(n, median, 90th percentile)` of the rates for `n = 1..=n_max`.
    pub quantiles_by_n: Vec<(usize, f64, f64)>,
    pub p90: f64,
    pub empty_paths: usize,
}

/// Decay of the translated masses `x_{-n} nu (A) = nu(x_{-n}^{-1} A)`: the
/// fraction of sample points `b` with `x_{-n} b` in `A`, along independent
/// backward paths.
pub fn translated_mass_decay(
    mu: &WalkMeasure,
    i: usize,
    nu: &EmpiricalMeasure,
    ball: &BallSpec,
    n_max: usize,
    paths: usize,
    seed: u64,
) -> Result<DecayReport> {
    if nu.rank() != i || ball.center.rank() != i {
        return Err(Error::RankMismatch(nu.rank(), i));
    }
    let z = ball.center.wedge().as_slice();
    let initial = nu.ball_count(z, ball.radius);
    if initial == 0 {
        return Err(Error::Precondition("the ball is empirically null".into()));
    }
    let n_pts = nu.len() as f64;
    let width = nu.wedge_len();
    let inv_ext = mu.exterior_inverse_steps(i)?;
    // curves[p][n-1]: rate of path p after n steps
    let curves: Vec<Vec<f64>> = (0..paths as u64)
        .into_par_iter()
        .map(|p| {
            let idx = increment_indices(mu, domain::BACKWARD, n_max, p, seed);
            let mut m = ScaledMatrix::identity(width);
            let mut out = Vec::with_capacity(n_max);
            for (step, &j) in idx.iter().enumerate() {
                for factor in &inv_ext[j] {
                    m.mul_right(factor)?;
                }
                let pushed = nu.push_forward_wedges(m.unit());
                let hits = pushed.chunks_exact(width).filter(|w| wedge_distance(z, w) <= ball.radius).count();
                let rate = if hits == 0 { f64::INFINITY } else { -(hits as f64 / n_pts).ln() / (step + 1) as f64 };
                out.push(rate);
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;
    let quantiles_by_n = (0..n_max)
        .map(|k| {
            let col: Vec<f64> = curves.iter().map(|c| c[k]).collect();
            (k + 1, stats::median(&col), stats::quantile(&col, 0.9))
        })
        .collect::<Vec<_>>();
    let rates: Vec<f64> = curves.iter().map(|c| c[n_max - 1]).collect();
    let empty_paths = rates.iter().filter(|r| r.is_infinite()).count();
    Ok(DecayReport {
        initial_mass: initial as f64 / n_pts,
        p90: stats::quantile(&rates, 0.9),
        rates,
        quantiles_by_n,
        empty_paths,
    })
}
