use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::harmonic::EmpiricalMeasure;
use crate::linalg::wedge_distance;
use crate::stats;

/// Constant in the resolution floor `c * N^(-1/m)`.
pub const FLOOR_CONSTANT: f64 = 2.0;

/// Smallest radius at which empirical ball masses are trusted for `n`
/// points on a manifold of dimension `m`.
pub fn resolution_floor(n: usize, m: usize) -> f64 {
    FLOOR_CONSTANT * (n.max(1) as f64).powf(-1.0 / m.max(1) as f64)
}

/// `count` log-spaced radii from `r_max` down to `r_min`.
pub fn log_grid(r_max: f64, r_min: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![r_max];
    }
    let (a, b) = (r_max.ln(), r_min.ln());
    (0..count).map(|k| (a + (b - a) * k as f64 / (count - 1) as f64).exp()).collect()
}

/// Decreasing radii split at the resolution floor.
#[derive(Debug, Clone, Serialize)]
pub struct RadiusWindow {
    pub radii: Vec<f64>,
    pub floor: f64,
    pub excluded: Vec<f64>,
}

impl RadiusWindow {
    pub fn new(nu: &EmpiricalMeasure, radii: &[f64]) -> Result<Self> {
        if radii.iter().any(|&r| !(r > 0.0 && r < 1.0)) {
            return Err(Error::Precondition("radii must lie in (0, 1)".into()));
        }
        if radii.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::Precondition("radii must be strictly decreasing".into()));
        }
        let floor = resolution_floor(nu.len(), nu.manifold_dim());
        let (radii, excluded): (Vec<f64>, Vec<f64>) = radii.iter().partition(|&&r| r >= floor);
        Ok(Self { radii, floor, excluded })
    }

    /// Radii from `r_max` down to the floor, log-spaced.
    pub fn down_to_floor(nu: &EmpiricalMeasure, r_max: f64, count: usize) -> Result<Self> {
        let floor = resolution_floor(nu.len(), nu.manifold_dim());
        if floor >= r_max {
            return Err(Error::Precondition(format!("resolution floor {floor} is above r_max {r_max}")));
        }
        Self::new(nu, &log_grid(r_max, floor, count))
    }
}

/// Per-point ball-mass curves. `masses[j][k]` is the leave-one-out mass
/// of `B(z_j, radii[k])`; a curve stops at the first empty ball.
#[derive(Debug, Clone, Serialize)]
pub struct PointwiseCurves {
    pub radii: Vec<f64>,
    pub masses: Vec<Vec<f64>>,
    /// `log m B(z, r) / log r` along each curve.
    pub ratios: Vec<Vec<f64>>,
    /// Least-squares slope of `log m B(z, r)` against `log r` per point
    /// (NaN when fewer than two radii survive).
    pub slopes: Vec<f64>,
    /// Number of curves cut short by an empty ball.
    pub truncated: usize,
}

impl PointwiseCurves {
    pub fn finite_slopes(&self) -> Vec<f64> {
        self.slopes.iter().copied().filter(|s| s.is_finite()).collect()
    }
}

/// Ball-mass curves of every sample point over the reliable part of `radii`.
pub fn pointwise_dims(nu: &EmpiricalMeasure, radii: &[f64]) -> Result<PointwiseCurves> {
    let window = RadiusWindow::new(nu, radii)?;
    pointwise_on_window(nu, &window.radii)
}

pub(crate) fn pointwise_on_window(nu: &EmpiricalMeasure, radii: &[f64]) -> Result<PointwiseCurves> {
    let n = nu.len();
    if n < 2 {
        return Err(Error::Precondition("need at least two sample points".into()));
    }
    let log_r: Vec<f64> = radii.iter().map(|r| r.ln()).collect();
    let curves: Vec<(Vec<f64>, Vec<f64>, f64)> = (0..n)
        .into_par_iter()
        .map(|j| {
            let z = nu.wedge(j);
            let mut dist: Vec<f64> = (0..n).filter(|&l| l != j).map(|l| wedge_distance(z, nu.wedge(l))).collect();
            dist.sort_unstable_by(f64::total_cmp);
            let mut masses = Vec::with_capacity(radii.len());
            for &r in radii {
                let c = dist.partition_point(|&x| x <= r);
                if c == 0 {
                    break;
                }
                masses.push(c as f64 / (n - 1) as f64);
            }
            let log_m: Vec<f64> = masses.iter().map(|m| m.ln()).collect();
            let ratios = log_m.iter().zip(&log_r).map(|(m, r)| m / r).collect();
            // masses grow with r, so slopes are nonnegative up to rounding (and -0 becomes 0)
            let slope = stats::ls_slope(&log_r[..log_m.len()], &log_m).map_or(f64::NAN, |s| s.max(0.0) + 0.0);
            (masses, ratios, slope)
        })
        .collect();
    let truncated = curves.iter().filter(|c| c.0.len() < radii.len()).count();
    let mut masses = Vec::with_capacity(n);
    let mut ratios = Vec::with_capacity(n);
    let mut slopes = Vec::with_capacity(n);
    for (m, r, s) in curves {
        masses.push(m);
        ratios.push(r);
        slopes.push(s);
    }
    Ok(PointwiseCurves { radii: radii.to_vec(), masses, ratios, slopes, truncated })
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct MeanDimInterval {
    pub lower: f64,
    pub upper: f64,
    pub q: f64,
}

pub const DEFAULT_MASS_TAIL: f64 = 0.05;

/// Lower and upper mean dimensions: the `q` and `1 - q` quantiles of the
/// per-point slopes, i.e. the levels below and above which the sample
/// mass of pointwise estimates is at most `q`.
pub fn mean_dimension_interval(curves: &PointwiseCurves, q: f64) -> Result<MeanDimInterval> {
    if !(q > 0.0 && q < 0.5) {
        return Err(Error::Precondition("mass tail q must lie in (0, 0.5)".into()));
    }
    let s = curves.finite_slopes();
    if s.is_empty() {
        return Err(Error::Precondition("no pointwise curve spans two radii".into()));
    }
    Ok(MeanDimInterval { lower: stats::quantile(&s, q), upper: stats::quantile(&s, 1.0 - q), q })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dimension::benchmarks;

    #[test]
    fn floor_and_grid() {
        assert!((resolution_floor(10_000, 2) - 0.02).abs() < 1e-15);
        let g = log_grid(0.3, 0.01, 5);
        assert_eq!(g.len(), 5);
        assert!((g[0] - 0.3).abs() < 1e-15 && (g[4] - 0.01).abs() < 1e-15);
        assert!(g.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn radii_below_floor_are_excluded() {
        let nu = benchmarks::circle(10_000, std::f64::consts::FRAC_PI_4, 1).unwrap();
        let w = RadiusWindow::new(&nu, &log_grid(0.3, 0.01, 10)).unwrap();
        assert!(w.radii.iter().all(|&r| r >= 0.02));
        assert!(!w.excluded.is_empty());
        assert!(RadiusWindow::new(&nu, &[0.1, 0.2]).is_err());
        assert!(RadiusWindow::new(&nu, &[1.5]).is_err());
    }

    #[test]
    fn atom_has_zero_dimension() {
        let nu = benchmarks::atom(200, 2);
        let c = pointwise_dims(&nu, &[0.5, 0.2, 0.1]).unwrap();
        assert!(c.ratios.iter().flatten().all(|&x| x == 0.0));
        let iv = mean_dimension_interval(&c, 0.05).unwrap();
        assert_eq!((iv.lower, iv.upper), (0.0, 0.0));
    }

    #[test]
    fn circle_curves_have_unit_slope() {
        let nu = benchmarks::circle(4000, std::f64::consts::FRAC_PI_4, 2).unwrap();
        let w = RadiusWindow::down_to_floor(&nu, 0.3, 10).unwrap();
        let c = pointwise_on_window(&nu, &w.radii).unwrap();
        let med = stats::median(&c.slopes);
        assert!((med - 1.0).abs() < 0.1, "{med}");
        assert_eq!(c.truncated, 0);
    }

    #[test]
    fn bad_tail_rejected() {
        let nu = benchmarks::atom(10, 2);
        let c = pointwise_dims(&nu, &[0.5, 0.2]).unwrap();
        assert!(mean_dimension_interval(&c, 0.6).is_err());
    }
}
