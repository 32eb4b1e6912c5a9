use serde::Serialize;

use super::config::ExperimentConfig;
use super::stages::Lab;
use crate::entropy::EntropyChain;
use crate::error::Result;
use crate::group::is_r_regular;
use crate::harmonic::load_bank;

/// Additive slack of the empirical inequality checks on dimensions.
pub const DIMENSION_SLACK: f64 = 0.5;

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub passed: bool,
    pub checks: Vec<Check>,
}

impl VerifyReport {
    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

#[derive(Default)]
struct Checks(Vec<Check>);

impl Checks {
    fn add(&mut self, name: impl Into<String>, passed: bool, detail: impl Into<String>) -> bool {
        self.0.push(Check { name: name.into(), passed, detail: detail.into() });
        passed
    }

    /// Records a failed check for an error and returns `None`.
    fn run<T>(&mut self, name: &str, r: Result<T>) -> Option<T> {
        match r {
            Ok(v) => Some(v),
            Err(e) => {
                self.add(name, false, e.to_string());
                None
            }
        }
    }
}

/// Runs every stage on the config and checks their invariants; writes all
/// outputs plus `reports/verify.json`. Failures are reported, not raised,
/// except when the report itself cannot be written.
pub fn verify_all(cfg: &ExperimentConfig) -> Result<VerifyReport> {
    let mut c = Checks::default();
    let out = super::output::Outputs::new(cfg.output_path());
    if let Some(lab) = c.run("measure", Lab::open(cfg.clone())) {
        c.add("measure", true, format!("{} atoms in SL({}, Q), fingerprint {}", lab.mu.len(), lab.mu.dim(), lab.mu.fingerprint()));
        run_checks(&lab, &mut c);
    }
    let report = VerifyReport { passed: c.0.iter().all(|x| x.passed), checks: c.0 };
    out.write_report("verify", &report)?;
    Ok(report)
}

fn run_checks(lab: &Lab, c: &mut Checks) {
    let gamma = lab.gamma().and_then(|g| Ok((is_r_regular(&g)?.0, g)));
    let gamma_ok = match c.run("gamma_regular", gamma) {
        Some((regular, g)) => c.add("gamma_regular", regular, format!("gamma = {:?}", g.to_matrix().as_matrix().as_slice())),
        None => false,
    };

    let spectrum = c.run("spectrum", lab.spectrum_stage());
    if let Some(rep) = &spectrum {
        let f = &rep.forward;
        c.add("spectrum_zero_sum", f.zero_sum_holds(), format!("sum {:e}, lambdas {:?}", f.spectrum.sum(), f.lambdas()));
        c.add("spectrum_simple", f.is_simple(), format!("gaps {:?} +- {:?}", f.gaps, f.gap_stderr));
        c.add("reflection_identity", rep.passes, format!("max deviation {:e}, sigmas {:?}", rep.max_deviation, rep.sigmas));
    }

    let harmonic = c.run("harmonic", lab.harmonic_stage());
    if let Some((rep, clouds)) = &harmonic {
        for r in &rep.ranks {
            let st = &r.stationarity;
            c.add(format!("stationarity_rank{}", r.i), st.passes, format!("max discrepancy {:e} (tol {})", st.max_discrepancy, st.tol));
        }
        for nu in clouds {
            let i = nu.rank();
            let same = load_bank(lab.out.bank_path(&format!("rank{i}"))).map(|(_, b)| b.wedges() == nu.wedges());
            if let Some(same) = c.run(&format!("bank_roundtrip_rank{i}"), same) {
                c.add(format!("bank_roundtrip_rank{i}"), same, "reloaded bank equals the sampled cloud");
            }
        }
    }
    let clouds = harmonic.map(|h| h.1).unwrap_or_default();

    let entropy = c.run("entropy", lab.entropy_stage(&clouds));
    if let Some(en) = &entropy {
        match &en.asymptotic {
            Some(a) => {
                let ok = a.values_monotone && a.diffs_monotone && a.subadditive;
                c.add("entropy_monotone", ok, format!("h = {:.6}, H(mu^n) = {:?}", a.h_estimate, a.entropies));
                if let Some(e1) = en.differential.iter().find(|e| e.i == 1) {
                    let chain = EntropyChain::new(e1, a, en.shannon);
                    c.add("entropy_chain", chain.holds, chain.to_string());
                }
            }
            None => {
                c.add("entropy_monotone", false, en.asymptotic_error.clone().unwrap_or_default());
            }
        }
    }

    if lab.cfg.dimension.enabled {
        let dims = c.run("dimension", lab.dimension_stage(&clouds, spectrum.as_ref().map(|s| &s.forward), entropy.as_ref()));
        for rep in dims.iter().flatten() {
            let iv = &rep.mean_dim_interval;
            let cap = (rep.rank * (rep.ambient_dim - rep.rank)) as f64 + DIMENSION_SLACK;
            let cov = &rep.covering;
            let values = [iv.lower, iv.upper, rep.hausdorff_proxy, cov.lower_ledrappier, cov.upper_ledrappier, cov.lower_box, cov.upper_box];
            let ok = iv.lower <= iv.upper && values.iter().all(|&v| (0.0..=cap).contains(&v));
            c.add(format!("dimension_ranges_rank{}", rep.rank), ok, format!("interval [{:.4}, {:.4}], proxies {values:?}", iv.lower, iv.upper));
        }
    }

    if gamma_ok {
        if let Some(sw) = c.run("sweep", lab.sweep_stage()) {
            let failed: Vec<String> = sw.cells.iter().filter_map(|x| x.error.as_ref().map(|e| format!("k={}: {e}", x.k))).collect();
            let detail = if failed.is_empty() {
                format!("{} cells computed", sw.cells.len())
            } else {
                failed.join("; ")
            };
            c.add("sweep_rows_complete", failed.is_empty(), detail);
            let base_h = lab.mu.shannon_entropy();
            let limit = 0.5 * base_h + 1.5 * std::f64::consts::LN_2 + 1e-9;
            let family: Vec<_> = sw.rows().filter(|r| r.k > 0).collect();
            let worst = family.iter().map(|r| r.shannon_entropy).fold(f64::NEG_INFINITY, f64::max);
            c.add("sweep_entropy_bounded", family.iter().all(|r| r.shannon_entropy <= limit), format!("max H(mu_k) {worst:.12} <= {limit:.12}"));
            if let (Some(first), Some(last)) = (family.first(), family.last()) {
                let grow = last.lambdas[0] - first.lambdas[0];
                let sigma = (last.stderr[0].powi(2) + first.stderr[0].powi(2)).sqrt();
                c.add("sweep_lambda_growth", grow > 3.0 * sigma, format!("lambda_1 from {:.6} to {:.6} (sigma {sigma:e})", first.lambdas[0], last.lambdas[0]));
                c.add(
                    "sweep_bound_trend",
                    last.min_bound < first.min_bound,
                    format!("min bound {:.6} at k={} vs {:.6} at k={}", last.min_bound, last.k, first.min_bound, first.k),
                );
            }
        }
        if let Some(cl) = c.run("claims", lab.claims_stage()) {
            c.add("claim_gk", cl.gk.violations == 0, format!("{} violations in {} trials, min margin {:e}", cl.gk.violations, cl.gk.trials, cl.gk.min_margin));
            c.add("claim_opens", !cl.opens.any_zero && cl.opens.min_mass > 0.0, format!("min mass {:.6} over k {:?}", cl.opens.min_mass, lab.cfg.claims.opens_k));
        }
    }
}
