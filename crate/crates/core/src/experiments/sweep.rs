use rayon::prelude::*;
use serde::Serialize;

use super::config::ExperimentConfig;
use crate::dimension::{bound_from_parts, mean_dimension_interval, pointwise_dims, RadiusWindow};
use crate::entropy::differential_entropy;
use crate::error::{Error, Result};
use crate::group::{is_r_regular, FiniteMeasure, GroupElement};
use crate::harmonic::sample_harmonic_measure;
use crate::lyapunov::estimate_spectrum_qr;
use crate::walk::WalkMeasure;

/// Settings a sweep cell was computed with; enough to re-run it alone.
#[derive(Debug, Clone, Serialize)]
pub struct CellSettings {
    pub seed: u64,
    pub spectrum_n: usize,
    pub replicas: usize,
    pub flag_n: usize,
    pub samples: usize,
    pub k_neighbors: usize,
}

/// Results for one rank `i` of one cell.
#[derive(Debug, Clone, Serialize)]
pub struct RankResult {
    pub i: usize,
    pub entropy: f64,
    pub entropy_stderr: f64,
    /// `NaN` when the gap is not resolved (see `note`).
    pub bound: f64,
    pub bound_stderr: f64,
    /// Upper mean-dimension estimate; `NaN` when the dimension stage is off.
    pub upper_dimension: f64,
    pub note: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    /// `0` stands for the base measure.
    pub k: u32,
    pub support: usize,
    pub shannon_entropy: f64,
    pub lambdas: Vec<f64>,
    pub stderr: Vec<f64>,
    pub gaps: Vec<f64>,
    pub gap_stderr: Vec<f64>,
    pub ranks: Vec<RankResult>,
    pub min_bound: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepCell {
    pub k: u32,
    pub settings: CellSettings,
    pub row: Option<SweepRow>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepReport {
    pub d: usize,
    pub measure_hash: String,
    pub gamma: Vec<f64>,
    pub cells: Vec<SweepCell>,
}

impl SweepReport {
    pub fn rows(&self) -> impl Iterator<Item = &SweepRow> {
        self.cells.iter().filter_map(|c| c.row.as_ref())
    }

    pub fn row(&self, k: u32) -> Option<&SweepRow> {
        self.rows().find(|r| r.k == k)
    }

    /// Flat table: one line per cell, failed cells keep their key columns
    /// and the error text.
    pub fn to_csv(&self) -> Result<Vec<u8>> {
        let d = self.d;
        let mut header = vec!["k".to_string(), "H_mu_k".into()];
        header.extend((1..=d).map(|j| format!("lambda_{j}")));
        header.extend((1..=d).map(|j| format!("stderr_{j}")));
        header.extend((1..d).map(|j| format!("gap_{j}")));
        header.extend((1..d).map(|j| format!("gap_stderr_{j}")));
        header.extend((1..d).map(|i| format!("E_{i}")));
        header.extend((1..d).map(|i| format!("E_stderr_{i}")));
        header.extend((1..d).map(|i| format!("bound_{i}")));
        header.extend((1..d).map(|i| format!("upper_dim_{i}")));
        header.extend(["min_bound", "support", "seed", "n", "replicas", "flag_n", "N", "k_neighbors", "status", "error"].map(String::from));
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&header).map_err(csv_err)?;
        for cell in &self.cells {
            let mut rec = vec![cell.k.to_string()];
            match &cell.row {
                Some(r) => {
                    rec.push(num(r.shannon_entropy));
                    rec.extend(r.lambdas.iter().chain(&r.stderr).chain(&r.gaps).chain(&r.gap_stderr).map(|&x| num(x)));
                    let per_rank = |f: &dyn Fn(&RankResult) -> f64| -> Vec<String> {
                        (1..d).map(|i| r.ranks.iter().find(|x| x.i == i).map_or_else(String::new, |x| num(f(x)))).collect()
                    };
                    rec.extend(per_rank(&|x| x.entropy));
                    rec.extend(per_rank(&|x| x.entropy_stderr));
                    rec.extend(per_rank(&|x| x.bound));
                    rec.extend(per_rank(&|x| x.upper_dimension));
                    rec.push(num(r.min_bound));
                    rec.push(r.support.to_string());
                }
                None => rec.extend(std::iter::repeat_n(String::new(), 1 + 2 * d + 6 * (d - 1) + 2)),
            }
            let s = &cell.settings;
            rec.extend([s.seed, s.spectrum_n as u64, s.replicas as u64, s.flag_n as u64, s.samples as u64, s.k_neighbors as u64].map(|x| x.to_string()));
            rec.push(if cell.row.is_some() { "ok".into() } else { "failed".into() });
            rec.push(cell.error.clone().unwrap_or_default());
            w.write_record(&rec).map_err(csv_err)?;
        }
        w.into_inner().map_err(|e| Error::Invalid(e.to_string()))
    }
}

fn num(x: f64) -> String {
    if x.is_nan() {
        String::new()
    } else {
        format!("{x:.12e}")
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Invalid(e.to_string())
}

/// Estimates every quantity of the `mu_k` family for the configured `k`:
/// the Shannon entropy, the Lyapunov spectrum, per rank the differential
/// entropy of the harmonic measure and the bound `E_i / gap_i`, and
/// optionally the upper mean dimension. Cells fail independently.
pub fn run_singularity_sweep(cfg: &ExperimentConfig) -> Result<SweepReport> {
    let mu = cfg.load_measure()?;
    let gamma = cfg.gamma_element(&mu)?;
    sweep_with(cfg, &mu, &gamma)
}

pub fn sweep_with(cfg: &ExperimentConfig, mu: &FiniteMeasure, gamma: &GroupElement) -> Result<SweepReport> {
    let (regular, eig) = is_r_regular(gamma)?;
    if !regular {
        return Err(Error::Precondition(format!("gamma is not R-regular (eigenvalues {eig:?})")));
    }
    let d = mu.dim();
    let ranks = cfg.ranks(d)?;
    let settings = CellSettings {
        seed: cfg.seed,
        spectrum_n: cfg.spectrum.n,
        replicas: cfg.spectrum.replicas,
        flag_n: cfg.harmonic.n,
        samples: cfg.harmonic.samples,
        k_neighbors: cfg.k_neighbors(),
    };
    let mut ks: Vec<u32> = cfg.k_list.clone();
    if cfg.include_base {
        ks.insert(0, 0);
    }
    let cells = ks
        .par_iter()
        .map(|&k| {
            let measure = if k == 0 { Ok(mu.clone()) } else { mu.build_mu_k(gamma, k) };
            let row = measure.and_then(|m| sweep_cell(cfg, &m, k, &ranks, &settings));
            if let Err(e) = &row {
                log::warn!("sweep cell k = {k} failed: {e}");
            }
            SweepCell { k, settings: settings.clone(), error: row.as_ref().err().map(|e| e.to_string()), row: row.ok() }
        })
        .collect();
    Ok(SweepReport {
        d,
        measure_hash: mu.fingerprint(),
        gamma: gamma.to_matrix().as_matrix().as_slice().to_vec(),
        cells,
    })
}

fn sweep_cell(cfg: &ExperimentConfig, m: &FiniteMeasure, k: u32, ranks: &[usize], s: &CellSettings) -> Result<SweepRow> {
    let walk = WalkMeasure::from_finite(m)?;
    let spec = estimate_spectrum_qr(&walk, s.spectrum_n, s.replicas, s.seed)?;
    let mut results = Vec::with_capacity(ranks.len());
    for &i in ranks {
        let nu = sample_harmonic_measure(&walk, i, s.flag_n, s.samples, s.seed)?;
        let e = differential_entropy(&walk, i, &nu, s.k_neighbors, s.seed)?;
        let (bound, bound_stderr, note) = match bound_from_parts(e.value, e.stderr, spec.gaps[i - 1], spec.gap_stderr[i - 1]) {
            Ok(b) => (b.value, b.stderr, None),
            Err(err) => (f64::NAN, f64::NAN, Some(err.to_string())),
        };
        let upper_dimension = if cfg.dimension.enabled {
            let st = &cfg.dimension.settings;
            RadiusWindow::down_to_floor(&nu, st.r_max, st.grid_len)
                .and_then(|w| pointwise_dims(&nu, &w.radii))
                .and_then(|c| mean_dimension_interval(&c, st.mass_tail))
                .map_or(f64::NAN, |iv| iv.upper)
        } else {
            f64::NAN
        };
        results.push(RankResult { i, entropy: e.value, entropy_stderr: e.stderr, bound, bound_stderr, upper_dimension, note });
    }
    let min_bound = results.iter().map(|r| r.bound).filter(|b| !b.is_nan()).fold(f64::NAN, f64::min);
    Ok(SweepRow {
        k,
        support: m.len(),
        shannon_entropy: m.shannon_entropy(),
        lambdas: spec.lambdas().to_vec(),
        stderr: spec.stderr.clone(),
        gaps: spec.gaps.clone(),
        gap_stderr: spec.gap_stderr.clone(),
        ranks: results,
        min_bound,
    })
}
