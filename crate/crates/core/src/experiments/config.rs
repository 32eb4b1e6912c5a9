use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::dimension::DimensionSettings;
use crate::error::{Error, Result};
use crate::group::{load_measure, FiniteMeasure, GroupElement, Rational, Word, DEFAULT_SUPPORT_CAP};
use crate::tolerances::Tolerances;

pub const SCHEMA_VERSION: u32 = 1;

/// The element `gamma` used to build the `mu_k` family: an explicit matrix,
/// or a word in the generators labelled in the measure file.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum GammaSpec {
    Matrix(Vec<Vec<Rational>>),
    Word(Word),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpectrumStage {
    pub n: usize,
    pub replicas: usize,
}

impl Default for SpectrumStage {
    fn default() -> Self {
        Self { n: 100_000, replicas: 16 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HarmonicStage {
    /// Path length used to approximate each limit flag.
    pub n: usize,
    /// Number of independent flags (`N`).
    pub samples: usize,
    /// Ranks to project to; all of `1..d` when absent.
    pub ranks: Option<Vec<usize>>,
    pub stationarity_anchors: usize,
    pub stationarity_tol: f64,
}

impl Default for HarmonicStage {
    fn default() -> Self {
        Self { n: 80, samples: 10_000, ranks: None, stationarity_anchors: 16, stationarity_tol: 0.02 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EntropyStage {
    pub n_max: usize,
    /// Neighbor count of the differential entropy estimator; `ceil(N^(1/3))` when absent.
    pub k_neighbors: Option<usize>,
    pub support_cap: usize,
}

impl Default for EntropyStage {
    fn default() -> Self {
        Self { n_max: 10, k_neighbors: None, support_cap: DEFAULT_SUPPORT_CAP }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DimensionStage {
    pub enabled: bool,
    pub settings: DimensionSettings,
}

impl Default for DimensionStage {
    fn default() -> Self {
        Self { enabled: true, settings: DimensionSettings::default() }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClaimsStage {
    pub k_max: u32,
    pub trials: usize,
    pub beta: f64,
    pub opens_k: Vec<u32>,
    pub samples: usize,
    pub flag_n: usize,
}

impl Default for ClaimsStage {
    fn default() -> Self {
        Self { k_max: 64, trials: 100_000, beta: 0.5, opens_k: (1..=16).collect(), samples: 10_000, flag_n: 60 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub seed: u64,
    /// Measure file, relative to the config file.
    pub measure: PathBuf,
    pub gamma: GammaSpec,
    pub k_list: Vec<u32>,
    /// Also run the sweep cell of the base measure (reported as `k = 0`).
    #[serde(default = "yes")]
    pub include_base: bool,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub spectrum: SpectrumStage,
    #[serde(default)]
    pub harmonic: HarmonicStage,
    #[serde(default)]
    pub entropy: EntropyStage,
    #[serde(default)]
    pub dimension: DimensionStage,
    #[serde(default)]
    pub claims: ClaimsStage,
    /// Overrides of the tolerance table; unspecified entries keep their defaults.
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(skip)]
    base_dir: PathBuf,
}

fn yes() -> bool {
    true
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

impl ExperimentConfig {
    pub fn parse(text: &str, base_dir: impl Into<PathBuf>) -> Result<Self> {
        let mut cfg: Self = serde_json::from_str(text)?;
        cfg.base_dir = base_dir.into();
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::parse(&text, base)
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::Invalid(format!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        if self.k_list.is_empty() || self.k_list.contains(&0) {
            return Err(Error::Invalid("k_list must be a nonempty list of positive integers".into()));
        }
        let positive = [
            ("spectrum.n", self.spectrum.n),
            ("spectrum.replicas", self.spectrum.replicas),
            ("harmonic.n", self.harmonic.n),
            ("harmonic.samples", self.harmonic.samples),
            ("entropy.n_max", self.entropy.n_max),
            ("claims.trials", self.claims.trials),
            ("claims.samples", self.claims.samples),
            ("claims.flag_n", self.claims.flag_n),
        ];
        if let Some((name, _)) = positive.iter().find(|(_, v)| *v == 0) {
            return Err(Error::Invalid(format!("{name} must be positive")));
        }
        if self.spectrum.replicas < 2 {
            return Err(Error::Invalid("spectrum.replicas must be at least 2 for standard errors".into()));
        }
        if !(self.claims.beta > 0.0 && self.claims.beta < 1.0) {
            return Err(Error::Invalid("claims.beta must lie in (0, 1)".into()));
        }
        if self.claims.k_max == 0 || self.claims.opens_k.contains(&0) {
            return Err(Error::Invalid("claim k values must be positive".into()));
        }
        Ok(())
    }

    /// Resolves a path from the config against the config file's directory.
    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    pub fn output_path(&self) -> PathBuf {
        self.resolve(&self.output_dir)
    }

    pub fn load_measure(&self) -> Result<FiniteMeasure> {
        load_measure(self.resolve(&self.measure))
    }

    /// The element `gamma` in the group of `mu`.
    pub fn gamma_element(&self, mu: &FiniteMeasure) -> Result<GroupElement> {
        let g = match &self.gamma {
            GammaSpec::Matrix(rows) => GroupElement::from_rows(rows.clone())?,
            GammaSpec::Word(word) => {
                let mut acc = GroupElement::identity(mu.dim());
                for &(gen, exp) in word {
                    acc = acc.mul(&generator(mu, gen)?.pow(exp)?)?;
                }
                acc
            }
        };
        if g.dim() != mu.dim() {
            return Err(Error::DimensionMismatch(g.dim(), mu.dim()));
        }
        Ok(g)
    }

    /// Ranks `i` to study on `Gr_i(R^d)`.
    pub fn ranks(&self, d: usize) -> Result<Vec<usize>> {
        let ranks = self.harmonic.ranks.clone().unwrap_or_else(|| (1..d).collect());
        if let Some(&i) = ranks.iter().find(|&&i| i == 0 || i >= d) {
            return Err(Error::RankOutOfRange { rank: i, max: d - 1, d });
        }
        Ok(ranks)
    }

    pub fn k_neighbors(&self) -> usize {
        self.entropy.k_neighbors.unwrap_or_else(|| crate::entropy::default_k(self.harmonic.samples))
    }
}

/// The atom labelled with the word `(gen, 1)`, or the inverse of the atom
/// labelled `(gen, -1)`.
fn generator(mu: &FiniteMeasure, gen: usize) -> Result<GroupElement> {
    for (g, _) in mu.atoms() {
        match g.word().map(|w| w.as_slice()) {
            Some([(k, 1)]) if *k == gen => return Ok(g.clone()),
            Some([(k, -1)]) if *k == gen => return g.inverse(),
            _ => {}
        }
    }
    Err(Error::Invalid(format!("no atom of the measure is labelled as generator {gen}")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::measure_to_json;
    use crate::presets;

    fn write_sanov(dir: &Path) {
        std::fs::write(dir.join("sanov.json"), measure_to_json(&presets::sanov_uniform()).unwrap()).unwrap();
    }

    fn minimal(gamma: &str) -> String {
        format!(r#"{{"schema_version": 1, "seed": 7, "measure": "sanov.json", "gamma": {gamma}, "k_list": [1, 2]}}"#)
    }

    #[test]
    fn parses_with_defaults_and_resolves_paths() {
        let dir = tempfile::tempdir().unwrap();
        write_sanov(dir.path());
        let cfg = ExperimentConfig::parse(&minimal(r#"{"word": [[0, 1], [1, 1]]}"#), dir.path()).unwrap();
        assert_eq!(cfg.spectrum.n, 100_000);
        assert_eq!(cfg.output_path(), dir.path().join("out"));
        let mu = cfg.load_measure().unwrap();
        assert_eq!(cfg.gamma_element(&mu).unwrap(), presets::sanov_gamma());
        assert_eq!(cfg.ranks(2).unwrap(), vec![1]);
        assert_eq!(cfg.k_neighbors(), 22);
    }

    #[test]
    fn matrix_gamma_and_inverse_generators() {
        let dir = tempfile::tempdir().unwrap();
        write_sanov(dir.path());
        let cfg = ExperimentConfig::parse(&minimal(r#"{"matrix": [[5, 2], [2, 1]]}"#), dir.path()).unwrap();
        let mu = cfg.load_measure().unwrap();
        assert_eq!(cfg.gamma_element(&mu).unwrap(), presets::sanov_gamma());
        let inv = ExperimentConfig::parse(&minimal(r#"{"word": [[1, -1], [0, -1]]}"#), dir.path()).unwrap();
        assert_eq!(inv.gamma_element(&mu).unwrap(), presets::sanov_gamma().inverse().unwrap());
    }

    #[test]
    fn rejects_bad_configs() {
        let bad = [
            r#"{"schema_version": 2, "seed": 1, "measure": "m.json", "gamma": {"word": []}, "k_list": [1]}"#,
            r#"{"schema_version": 1, "seed": 1, "measure": "m.json", "gamma": {"word": []}, "k_list": [0]}"#,
            r#"{"schema_version": 1, "seed": 1, "measure": "m.json", "gamma": {"word": []}, "k_list": [1], "bogus": 1}"#,
            r#"{"schema_version": 1, "seed": 1, "measure": "m.json", "gamma": {"word": []}, "k_list": [1], "spectrum": {"replicas": 1}}"#,
            r#"{"schema_version": 1, "seed": 1, "measure": "m.json", "gamma": {"word": []}, "k_list": [1], "claims": {"beta": 1.5}}"#,
        ];
        for b in bad {
            assert!(ExperimentConfig::parse(b, ".").is_err(), "{b}");
        }
    }

    #[test]
    fn non_unimodular_gamma_rejected() {
        let dir = tempfile::tempdir().unwrap();
        write_sanov(dir.path());
        let cfg = ExperimentConfig::parse(&minimal(r#"{"matrix": [[2, 0], [0, 1]]}"#), dir.path()).unwrap();
        assert!(cfg.gamma_element(&cfg.load_measure().unwrap()).is_err());
    }

    #[test]
    fn tolerance_overrides_are_partial() {
        let text = r#"{"schema_version": 1, "seed": 1, "measure": "m.json", "gamma": {"word": []}, "k_list": [1], "tolerances": {"det": 1e-6}}"#;
        let cfg = ExperimentConfig::parse(text, ".").unwrap();
        assert_eq!(cfg.tolerances.det, 1e-6);
        assert_eq!(cfg.tolerances.unit_norm, Tolerances::default().unit_norm);
    }
}
