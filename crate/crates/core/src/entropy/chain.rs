use std::fmt;

use serde::Serialize;

use super::{AsymptoticEntropyEstimate, DifferentialEntropyEstimate};

/// The entropy inequalities `0 <= E <= h <= H(mu)`, with the estimated
/// differential entropy allowed three standard errors of slack.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct EntropyChain {
    pub differential: f64,
    pub sigma: f64,
    pub asymptotic: f64,
    pub shannon: f64,
    pub holds: bool,
}

impl EntropyChain {
    pub fn new(e: &DifferentialEntropyEstimate, h: &AsymptoticEntropyEstimate, shannon: f64) -> Self {
        let slack = 3.0 * e.stderr;
        let holds = e.value >= 0.0 && e.value <= h.h_estimate + slack && h.h_estimate + slack <= shannon + slack;
        Self { differential: e.value, sigma: e.stderr, asymptotic: h.h_estimate, shannon, holds }
    }
}

impl fmt::Display for EntropyChain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "0 <= E = {:.6} (+- {:.6}) <= h = {:.6} <= H = {:.6}",
            self.differential, self.sigma, self.asymptotic, self.shannon
        )
    }
}
