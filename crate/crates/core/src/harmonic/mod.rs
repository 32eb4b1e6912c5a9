//! Limit flags, empirical harmonic measures, and the checks built on them:
//! stationarity, contraction of balls, and persisted sample banks.

mod bank;
mod contraction;
mod empirical;
mod flags;
mod stationarity;

pub use bank::{decode_bank, encode_bank, load_bank, save_bank, BankHeader};
pub use contraction::{contraction_rate, contraction_rates, ContractionReport, ContractionSample};
pub use empirical::EmpiricalMeasure;
pub use flags::{
    backward_limit_xi, flag_of_product, project_flags, reference_frame, sample_backward_flag, sample_flags,
    sample_harmonic_measure, sample_limit_flag, FlagSample,
};
pub use stationarity::{default_anchors, stationarity_check, StationarityReport};
