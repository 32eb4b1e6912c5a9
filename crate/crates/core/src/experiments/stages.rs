use std::str::FromStr;

use serde::Serialize;

use super::claims::{claim_gk_check, claim_opens_estimate, GkReport, OpensReport};
use super::config::ExperimentConfig;
use super::output::Outputs;
use super::sweep::{sweep_with, SweepReport};
use crate::dimension::{bound_from_parts, DimensionReport};
use crate::entropy::{asymptotic_entropy_capped, differential_entropy, AsymptoticEntropyEstimate, DifferentialEntropyEstimate};
use crate::error::{Error, Result};
use crate::group::{FiniteMeasure, GroupElement};
use crate::harmonic::{
    default_anchors, load_bank, project_flags, sample_flags, save_bank, stationarity_check, BankHeader, EmpiricalMeasure,
    StationarityReport,
};
use crate::lyapunov::{check_reflection_identity, ReflectionReport, SpectrumEstimate};
use crate::walk::WalkMeasure;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Spectrum,
    Harmonic,
    Entropy,
    Dimension,
    Sweep,
    Claims,
}

impl Stage {
    pub const ALL: [Stage; 6] = [Stage::Spectrum, Stage::Harmonic, Stage::Entropy, Stage::Dimension, Stage::Sweep, Stage::Claims];

    pub fn name(self) -> &'static str {
        match self {
            Stage::Spectrum => "spectrum",
            Stage::Harmonic => "harmonic",
            Stage::Entropy => "entropy",
            Stage::Dimension => "dimension",
            Stage::Sweep => "sweep",
            Stage::Claims => "claims",
        }
    }
}

impl FromStr for Stage {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Stage::ALL
            .into_iter()
            .find(|st| st.name() == s)
            .ok_or_else(|| Error::Invalid(format!("unknown stage {s:?}")))
    }
}

/// Everything a stage needs: the config, the measure in exact and float
/// form, and the output tree.
#[derive(Debug, Clone)]
pub struct Lab {
    pub cfg: ExperimentConfig,
    pub mu: FiniteMeasure,
    pub walk: WalkMeasure,
    pub out: Outputs,
}

#[derive(Debug, Clone, Serialize)]
pub struct HarmonicRank {
    pub i: usize,
    pub samples: usize,
    pub bank: String,
    pub stationarity: StationarityReport,
}

#[derive(Debug, Clone, Serialize)]
pub struct HarmonicStageReport {
    pub n: usize,
    pub samples: usize,
    pub degenerate_flags: usize,
    pub max_convergence_gap: f64,
    pub ranks: Vec<HarmonicRank>,
}

#[derive(Debug, Clone, Serialize)]
pub struct EntropyStageReport {
    pub shannon: f64,
    pub asymptotic: Option<AsymptoticEntropyEstimate>,
    pub asymptotic_error: Option<String>,
    pub differential: Vec<DifferentialEntropyEstimate>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ClaimsReport {
    pub gk: GkReport,
    pub opens: OpensReport,
}

impl Lab {
    pub fn open(cfg: ExperimentConfig) -> Result<Self> {
        let mu = cfg.load_measure()?;
        let walk = WalkMeasure::from_finite(&mu)?;
        let out = Outputs::new(cfg.output_path());
        Ok(Self { cfg, mu, walk, out })
    }

    pub fn gamma(&self) -> Result<GroupElement> {
        self.cfg.gamma_element(&self.mu)
    }

    fn bank_header(&self, i: usize) -> BankHeader {
        BankHeader {
            d: self.mu.dim(),
            i,
            n: self.cfg.harmonic.n,
            seed: self.cfg.seed,
            mu_hash: self.mu.fingerprint(),
            count: self.cfg.harmonic.samples,
        }
    }

    /// Lyapunov spectrum with the reflected-walk comparison; the forward
    /// estimate is the spectrum estimate.
    pub fn spectrum_stage(&self) -> Result<ReflectionReport> {
        let rep = check_reflection_identity(&self.walk, self.cfg.spectrum.n, self.cfg.spectrum.replicas, self.cfg.seed)?;
        self.out.write_report("spectrum", &rep)?;
        Ok(rep)
    }

    /// Samples limit flags, saves one bank per rank and checks stationarity.
    pub fn harmonic_stage(&self) -> Result<(HarmonicStageReport, Vec<EmpiricalMeasure>)> {
        let h = &self.cfg.harmonic;
        let flags = sample_flags(&self.walk, h.n, h.samples, self.cfg.seed)?;
        let mut ranks = Vec::new();
        let mut clouds = Vec::new();
        for i in self.cfg.ranks(self.mu.dim())? {
            let nu = project_flags(&flags, i)?;
            let path = self.out.bank_path(&format!("rank{i}"));
            save_bank(&path, &self.bank_header(i), &nu)?;
            let anchors = default_anchors(self.mu.dim(), i, h.stationarity_anchors, self.cfg.seed)?;
            let stationarity = stationarity_check(&self.walk, &nu, &anchors, h.stationarity_tol, self.cfg.seed)?;
            ranks.push(HarmonicRank { i, samples: nu.len(), bank: format!("banks/rank{i}.flags"), stationarity });
            clouds.push(nu);
        }
        let report = HarmonicStageReport {
            n: h.n,
            samples: h.samples,
            degenerate_flags: flags.iter().filter(|f| f.degenerate).count(),
            max_convergence_gap: flags.iter().map(|f| f.convergence_gap).fold(0.0, f64::max),
            ranks,
        };
        self.out.write_report("harmonic", &report)?;
        Ok((report, clouds))
    }

    /// Harmonic samples per rank: reloaded from matching banks when present,
    /// sampled (and banked) otherwise.
    pub fn clouds(&self) -> Result<Vec<EmpiricalMeasure>> {
        let ranks = self.cfg.ranks(self.mu.dim())?;
        let mut loaded = Vec::new();
        for &i in &ranks {
            match load_bank(self.out.bank_path(&format!("rank{i}"))) {
                Ok((header, nu)) if header == self.bank_header(i) => loaded.push(nu),
                _ => return Ok(self.harmonic_stage()?.1),
            }
        }
        Ok(loaded)
    }

    pub fn entropy_stage(&self, clouds: &[EmpiricalMeasure]) -> Result<EntropyStageReport> {
        let e = &self.cfg.entropy;
        let (asymptotic, asymptotic_error) = match asymptotic_entropy_capped(&self.mu, e.n_max, e.support_cap) {
            Ok(a) => (Some(a), None),
            Err(err) => (None, Some(err.to_string())),
        };
        let k = self.cfg.k_neighbors();
        let differential = clouds
            .iter()
            .map(|nu| differential_entropy(&self.walk, nu.rank(), nu, k, self.cfg.seed))
            .collect::<Result<Vec<_>>>()?;
        let report = EntropyStageReport { shannon: self.mu.shannon_entropy(), asymptotic, asymptotic_error, differential };
        self.out.write_report("entropy", &report)?;
        Ok(report)
    }

    /// Dimension reports per rank, with the entropy/gap bound attached when
    /// both estimates are supplied.
    pub fn dimension_stage(
        &self,
        clouds: &[EmpiricalMeasure],
        spectrum: Option<&SpectrumEstimate>,
        entropy: Option<&EntropyStageReport>,
    ) -> Result<Vec<DimensionReport>> {
        let mut reports = Vec::new();
        for nu in clouds {
            let i = nu.rank();
            let mut rep = DimensionReport::compute(nu, &self.cfg.dimension.settings)?;
            if let (Some(sp), Some(en)) = (spectrum, entropy) {
                if let Some(e) = en.differential.iter().find(|e| e.i == i) {
                    match bound_from_parts(e.value, e.stderr, sp.gaps[i - 1], sp.gap_stderr[i - 1]) {
                        Ok(b) => rep = rep.with_bound(b),
                        Err(err) => log::warn!("rank {i}: {err}"),
                    }
                }
            }
            let name = format!("dimension_rank{i}");
            self.out.write_report(&name, &rep)?;
            self.out.write_table(&name, &rep.to_csv()?)?;
            reports.push(rep);
        }
        Ok(reports)
    }

    pub fn sweep_stage(&self) -> Result<SweepReport> {
        let rep = sweep_with(&self.cfg, &self.mu, &self.gamma()?)?;
        self.out.write_report("sweep", &rep)?;
        self.out.write_table("sweep", &rep.to_csv()?)?;
        Ok(rep)
    }

    pub fn claims_stage(&self) -> Result<ClaimsReport> {
        let c = &self.cfg.claims;
        let gamma = self.gamma()?;
        let gk = claim_gk_check(&gamma, c.k_max, c.trials, self.cfg.seed)?;
        let opens = claim_opens_estimate(&self.mu, &gamma, &c.opens_k, c.beta, c.flag_n, c.samples, self.cfg.seed)?;
        let rep = ClaimsReport { gk, opens };
        self.out.write_report("claims", &rep)?;
        Ok(rep)
    }

    /// Runs one stage on its own, writing its outputs; returns a JSON summary.
    pub fn run_stage(&self, stage: Stage) -> Result<serde_json::Value> {
        Ok(match stage {
            Stage::Spectrum => serde_json::to_value(self.spectrum_stage()?)?,
            Stage::Harmonic => serde_json::to_value(self.harmonic_stage()?.0)?,
            Stage::Entropy => serde_json::to_value(self.entropy_stage(&self.clouds()?)?)?,
            Stage::Dimension => serde_json::to_value(self.dimension_stage(&self.clouds()?, None, None)?)?,
            Stage::Sweep => serde_json::to_value(self.sweep_stage()?)?,
            Stage::Claims => serde_json::to_value(self.claims_stage()?)?,
        })
    }
}
