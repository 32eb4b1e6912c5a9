//! Configuration-driven runs: the `mu_k` singularity sweep, the two
//! quantitative claims about `gamma`, the per-stage runners behind the
//! command line, and the verification suite.

mod claims;
mod config;
mod output;
mod stages;
mod sweep;
mod verify;

pub use claims::{
    claim_gk_check, claim_opens_estimate, in_open_set, open_set_mass, GkReport, OpensCell, OpensReport, GK_SLACK,
};
pub use config::{
    ClaimsStage, DimensionStage, EntropyStage, ExperimentConfig, GammaSpec, HarmonicStage, SpectrumStage, SCHEMA_VERSION,
};
pub use output::{compare_outputs, strip_timestamp, Outputs, TIMESTAMP_PREFIX};
pub use stages::{ClaimsReport, EntropyStageReport, HarmonicRank, HarmonicStageReport, Lab, Stage};
pub use sweep::{run_singularity_sweep, sweep_with, CellSettings, RankResult, SweepCell, SweepReport, SweepRow};
pub use verify::{verify_all, Check, VerifyReport, DIMENSION_SLACK};
