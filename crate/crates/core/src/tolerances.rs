//! Central table of numerical tolerances.
//!
//! Every threshold that decides a pass/fail or a degeneracy lives here. A run
//! may install overrides once (for example from an experiment config) through
//! [`install`]; afterwards [`current`] returns the active table.

use serde::{Deserialize, Serialize};
use std::sync::OnceLock;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Allowed |det - 1| for floating group elements.
    pub det: f64,
    /// Allowed deviation of ScaledMatrix unit norm from 1.
    pub unit_norm: f64,
    /// Allowed deviation of frame^T frame from the identity.
    pub orthonormal: f64,
    /// Allowed deviation of a wedge vector norm from 1.
    pub wedge_norm: f64,
    /// Entrywise round-trip error of the Cartan decomposition.
    pub cartan_roundtrip: f64,
    /// Relative singular value below which a matrix counts as singular.
    pub singular_rel: f64,
    /// Relative |R_jj| below which an action counts as rank-deficient.
    pub degenerate_action: f64,
    /// Relative imaginary part under which an eigenvalue counts as real.
    pub eigen_imag_rel: f64,
    /// Relative margin separating distinct eigenvalue moduli.
    pub eigen_moduli_rel: f64,
    /// Relative singular value gap under which a limit flag is degenerate.
    pub flag_gap_rel: f64,
    /// Bound on |logScale| before a running product is declared unstable.
    pub log_scale_max: f64,
    /// Sum-of-weights tolerance for floating measures.
    pub weight_sum: f64,
    /// Slack allowed in exact monotonicity checks of entropy sequences.
    pub entropy_monotone: f64,
    /// Distance at or below which two Grassmann points coincide.
    pub coincide: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            det: 1e-9,
            unit_norm: 1e-12,
            orthonormal: 1e-10,
            wedge_norm: 1e-12,
            cartan_roundtrip: 1e-9,
            singular_rel: 1e-14,
            degenerate_action: 1e-13,
            eigen_imag_rel: 1e-9,
            eigen_moduli_rel: 1e-6,
            flag_gap_rel: 1e-12,
            log_scale_max: 1e8,
            weight_sum: 1e-12,
            entropy_monotone: 1e-12,
            coincide: 1e-14,
        }
    }
}

static ACTIVE: OnceLock<Tolerances> = OnceLock::new();

/// Installs the tolerance table for the rest of the process. Returns `false`
/// when a table was already installed (the first one wins).
pub fn install(t: Tolerances) -> bool {
    ACTIVE.set(t).is_ok()
}

pub fn current() -> &'static Tolerances {
    ACTIVE.get_or_init(Tolerances::default)
}
