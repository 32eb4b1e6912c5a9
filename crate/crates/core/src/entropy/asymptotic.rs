use serde::Serialize;

use crate::error::{Error, Result};
use crate::group::{FiniteMeasure, DEFAULT_SUPPORT_CAP};
use crate::tolerances;

#[derive(Debug, Clone, Serialize)]
pub struct AsymptoticEntropyEstimate {
    /// `H(mu^{*n})` for `n = 1..=n_max`.
    pub entropies: Vec<f64>,
    /// `H(mu^{*n}) / n` for `n = 1..=n_max`.
    pub h_values: Vec<f64>,
    /// `H(mu^{*n}) - H(mu^{*(n-1)})` for `n = 1..=n_max`.
    pub h_diffs: Vec<f64>,
    /// Support size of `mu^{*n}`.
    pub support_sizes: Vec<usize>,
    pub n_max: usize,
    /// Last difference minus the Gaussian fluctuation term
    /// `(1/2) log(n_max / (n_max - 1))`.
    pub h_estimate: f64,
    /// The uncorrected last difference.
    pub last_diff: f64,
    /// `H/n` non-increasing (Fekete).
    pub values_monotone: bool,
    /// Differences non-increasing and not below the estimate.
    pub diffs_monotone: bool,
    /// `H(n + m) <= H(n) + H(m)` on all pairs with `n + m <= n_max`.
    pub subadditive: bool,
}

/// Entropy of the exact convolution powers `mu^{*n}`, `n <= n_max`.
///
/// The increments `H(mu^{*n}) - H(mu^{*(n-1)})` decrease to the asymptotic
/// entropy `h`. When the walk has a one-dimensional Gaussian fluctuation
/// around its drift (free groups, Z), `H(mu^{*n}) = h n + (1/2) log n + O(1)`,
/// so the increments overshoot `h` by about `1/(2n)`; the reported estimate
/// removes that term, while the raw last increment is kept in `last_diff`.
pub fn asymptotic_entropy(mu: &FiniteMeasure, n_max: usize) -> Result<AsymptoticEntropyEstimate> {
    asymptotic_entropy_capped(mu, n_max, DEFAULT_SUPPORT_CAP)
}

pub fn asymptotic_entropy_capped(mu: &FiniteMeasure, n_max: usize, cap: usize) -> Result<AsymptoticEntropyEstimate> {
    if n_max < 2 {
        return Err(Error::Precondition("need n_max >= 2".into()));
    }
    let mut entropies = Vec::with_capacity(n_max);
    let mut support_sizes = Vec::with_capacity(n_max);
    let mut power = mu.clone();
    entropies.push(power.shannon_entropy());
    support_sizes.push(power.len());
    for n in 2..=n_max {
        power = match power.convolve_capped(mu, cap) {
            Ok(p) => p,
            Err(Error::SupportCap { cap, .. }) => return Err(Error::SupportCap { cap, achieved_n: n - 1 }),
            Err(e) => return Err(e),
        };
        entropies.push(power.shannon_entropy());
        support_sizes.push(power.len());
        log::debug!("H(mu^*{n}) = {:.12} on {} atoms", entropies[n - 1], power.len());
    }
    let h_values: Vec<f64> = entropies.iter().enumerate().map(|(k, h)| h / (k + 1) as f64).collect();
    let h_diffs: Vec<f64> =
        entropies.iter().enumerate().map(|(k, h)| if k == 0 { *h } else { h - entropies[k - 1] }).collect();
    let last_diff = h_diffs[n_max - 1];
    let nm = n_max as f64;
    let h_estimate = (last_diff - 0.5 * (nm / (nm - 1.0)).ln()).max(0.0);
    let tol = tolerances::current().entropy_monotone;
    let values_monotone = h_values.windows(2).all(|w| w[1] <= w[0] + tol);
    let diffs_monotone =
        h_diffs.windows(2).all(|w| w[1] <= w[0] + tol) && h_diffs.iter().all(|d| *d >= h_estimate - tol);
    let mut subadditive = true;
    for a in 1..n_max {
        for b in 1..=(n_max - a) {
            subadditive &= entropies[a + b - 1] <= entropies[a - 1] + entropies[b - 1] + tol;
        }
    }
    Ok(AsymptoticEntropyEstimate {
        entropies,
        h_values,
        h_diffs,
        support_sizes,
        n_max,
        h_estimate,
        last_diff,
        values_monotone,
        diffs_monotone,
        subadditive,
    })
}
