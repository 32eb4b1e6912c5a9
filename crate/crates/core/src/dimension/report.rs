use std::path::Path;

use serde::{Deserialize, Serialize};

use super::covering::{ledrappier_box_summary, LedrappierBoxSummary};
use super::pointwise::{mean_dimension_interval, pointwise_on_window, MeanDimInterval, PointwiseCurves, RadiusWindow};
use crate::entropy::DifferentialEntropyEstimate;
use crate::error::{Error, Result};
use crate::harmonic::EmpiricalMeasure;
use crate::persist;
use crate::stats;

/// Upper bound `E_i / (lambda_i - lambda_{i+1})` with first-order error.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct BoundEstimate {
    pub value: f64,
    pub stderr: f64,
}

/// Dimension bound from an entropy estimate and a spectral gap; undefined
/// unless the gap exceeds three of its standard errors.
pub fn dimension_bound(e: &DifferentialEntropyEstimate, gap: f64, gap_stderr: f64) -> Result<BoundEstimate> {
    bound_from_parts(e.value, e.stderr, gap, gap_stderr)
}

pub fn bound_from_parts(e: f64, e_stderr: f64, gap: f64, gap_stderr: f64) -> Result<BoundEstimate> {
    if !(gap > 0.0 && gap > 3.0 * gap_stderr) {
        return Err(Error::BoundUndefined { gap, stderr: gap_stderr });
    }
    let value = e / gap;
    let stderr = ((e_stderr / gap).powi(2) + (e * gap_stderr / (gap * gap)).powi(2)).sqrt();
    Ok(BoundEstimate { value, stderr })
}

/// Mass fraction above the Hausdorff proxy. The dimension of a measure is
/// the essential sup of its lower pointwise dimensions; per-point slopes at
/// finite N scatter around their limits, so a thin tail such as the 5%
/// used for the mean interval would report sampling noise instead.
pub const HAUSDORFF_TAIL: f64 = 0.25;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DimensionSettings {
    pub r_max: f64,
    pub grid_len: usize,
    pub mass_tail: f64,
    pub epsilons: Vec<f64>,
}

impl Default for DimensionSettings {
    fn default() -> Self {
        Self { r_max: 0.3, grid_len: 10, mass_tail: super::DEFAULT_MASS_TAIL, epsilons: vec![0.02, 0.05, 0.1, 0.2] }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BoxEstimate {
    pub r: f64,
    pub eps: f64,
    pub count: usize,
    pub value: f64,
}

/// Every dimension proxy for one sample cloud, with the radius window and
/// sample size needed to judge them.
#[derive(Debug, Clone, Serialize)]
pub struct DimensionReport {
    pub rank: usize,
    pub ambient_dim: usize,
    pub sample_size: usize,
    pub window: RadiusWindow,
    pub settings: DimensionSettings,
    #[serde(skip)]
    pub pointwise: PointwiseCurves,
    pub slope_median: f64,
    pub mean_dim_interval: MeanDimInterval,
    pub box_estimates: Vec<BoxEstimate>,
    pub covering: LedrappierBoxSummary,
    /// Essential-sup-style proxy: the per-point slope level exceeded on a
    /// quarter of the sample ([`HAUSDORFF_TAIL`]).
    pub hausdorff_proxy: f64,
    pub bound: Option<BoundEstimate>,
}

impl DimensionReport {
    pub fn compute(nu: &EmpiricalMeasure, settings: &DimensionSettings) -> Result<Self> {
        let window = RadiusWindow::down_to_floor(nu, settings.r_max, settings.grid_len)?;
        let pointwise = pointwise_on_window(nu, &window.radii)?;
        let mean_dim_interval = mean_dimension_interval(&pointwise, settings.mass_tail)?;
        let covering = ledrappier_box_summary(nu, &window.radii, &settings.epsilons)?;
        let t = &covering.table;
        let box_estimates = t
            .epsilons
            .iter()
            .enumerate()
            .flat_map(|(row, &eps)| {
                t.ratios(row)
                    .into_iter()
                    .zip(&t.radii)
                    .zip(&t.counts[row])
                    .map(move |((value, &r), &count)| BoxEstimate { r, eps, count, value })
                    .collect::<Vec<_>>()
            })
            .collect();
        let slopes = pointwise.finite_slopes();
        Ok(Self {
            rank: nu.rank(),
            ambient_dim: nu.ambient_dim(),
            sample_size: nu.len(),
            window,
            settings: settings.clone(),
            slope_median: stats::median(&slopes),
            hausdorff_proxy: stats::quantile(&slopes, 1.0 - HAUSDORFF_TAIL),
            pointwise,
            mean_dim_interval,
            box_estimates,
            covering,
            bound: None,
        })
    }

    pub fn with_bound(mut self, bound: BoundEstimate) -> Self {
        self.bound = Some(bound);
        self
    }

    /// One row per `(point, radius)`: `point,radius,mass,ratio`.
    pub fn to_csv(&self) -> Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["point", "radius", "mass", "ratio"]).map_err(csv_err)?;
        for (j, (m, q)) in self.pointwise.masses.iter().zip(&self.pointwise.ratios).enumerate() {
            for ((r, m), q) in self.pointwise.radii.iter().zip(m).zip(q) {
                w.serialize((j, r, m, q)).map_err(csv_err)?;
            }
        }
        w.into_inner().map_err(|e| Error::Invalid(e.to_string()))
    }

    pub fn write(&self, json_path: &Path, csv_path: &Path) -> Result<()> {
        persist::write_json_atomic(json_path, self)?;
        persist::write_atomic(csv_path, &self.to_csv()?)
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Invalid(e.to_string())
}
