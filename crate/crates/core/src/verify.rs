//! Seeded oracle-equivalence and certificate suite.
//!
//! For every builtin function, `trials` random instances are drawn. Trial
//! `k` of function `b` uses ChaCha stream `b·2³² + k` of the seed, so the
//! instance set only depends on `(seed, b, k)`. Each instance is checked
//! four ways against the prox engine under test:
//!
//! * threshold: `(j*, t*)` equals the sequential scan on the same spectrum,
//! * spectral oracle: the singular values of `X̂` match projected gradient on
//!   the reduced problem,
//! * certificate: the subgradient optimality check passes,
//! * matrix oracle (every tenth trial): direct entrywise minimization does
//!   not beat `X̂` and gets within a relative `1e-3` of it.

use std::fmt::Write as _;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::functions::{make_builtin, SpectralFunction, BUILTIN_SPECS};
use crate::linalg::{
    certify_optimality, default_rank_tol, generalized_svt, prox_objective, singular_values, thin_svd, DenseMatrix,
    ProxResult,
};
use crate::oracle::{matrix_prox_oracle, spectral_prox_oracle, MATRIX_ORACLE_ITERS, MATRIX_ORACLE_MAX_DIM};
use crate::spectrum::linear_scan_threshold;
use crate::synthetic::{matrix_with_spectrum, random_spectrum, trial_rng};

pub const DEFAULT_TRIALS: usize = 50;
pub const THRESHOLD_TOL: f64 = 1e-10;
pub const SPECTRAL_ORACLE_TOL: f64 = 1e-6;
pub const CERTIFICATE_TOL: f64 = 1e-7;
/// The matrix oracle may undershoot the prox objective by at most this much.
pub const MATRIX_GAP_FLOOR: f64 = 1e-6;
/// Relative amount by which the matrix oracle may overshoot.
pub const MATRIX_GAP_CEILING: f64 = 1e-3;
pub const MATRIX_ORACLE_EVERY: usize = 10;
pub const SPECTRAL_ORACLE_ITERS: usize = 1_000_000;
const MAX_DIM: usize = 8;

/// Prox implementation under test.
pub type ProxEngine = fn(&DenseMatrix, &SpectralFunction, f64) -> Result<ProxResult>;

/// A generated test instance.
#[derive(Debug, Clone)]
pub struct Instance {
    pub function_index: usize,
    pub trial: usize,
    pub y: DenseMatrix,
    pub tau: f64,
}

/// Draws trial `trial` for builtin function `function_index`.
///
/// Sizes go up to 8×8 except on matrix-oracle trials, which stay within
/// 4×4. `τ` is log-uniform in `[0.02, 1.5]·σ¹`, so some instances land on
/// the zero-output branch.
pub fn instance(seed: u64, function_index: usize, trial: usize) -> Instance {
    let mut rng = trial_rng(seed, ((function_index as u64) << 32) | trial as u64);
    let max_dim = if uses_matrix_oracle(trial) { MATRIX_ORACLE_MAX_DIM } else { MAX_DIM };
    let rows = rng.random_range(1..=max_dim);
    let cols = rng.random_range(1..=max_dim);
    let spectrum = random_spectrum(&mut rng, rows.min(cols), true);
    let y = matrix_with_spectrum(&mut rng, rows, cols, spectrum.values());
    let sigma1 = spectrum.largest().expect("spectrum has positive rank");
    let tau = sigma1 * rng.random_range(0.02f64.ln()..1.5f64.ln()).exp();
    Instance { function_index, trial, y, tau }
}

pub fn uses_matrix_oracle(trial: usize) -> bool {
    trial.is_multiple_of(MATRIX_ORACLE_EVERY)
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct FunctionSummary {
    pub function: String,
    pub trials: usize,
    pub threshold_passed: usize,
    pub spectral_passed: usize,
    pub certificate_passed: usize,
    pub matrix_trials: usize,
    pub matrix_passed: usize,
    pub zero_outputs: usize,
    pub max_threshold_diff: f64,
    pub max_spectral_diff: f64,
    pub max_certificate_excess: f64,
    pub max_matrix_gap: f64,
}

impl FunctionSummary {
    pub fn passed(&self) -> bool {
        self.threshold_passed == self.trials
            && self.spectral_passed == self.trials
            && self.certificate_passed == self.trials
            && self.matrix_passed == self.matrix_trials
    }
}

/// Everything needed to rerun a failing instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Repro {
    pub seed: u64,
    pub function: String,
    pub trial: usize,
    pub tau: f64,
    pub rows: usize,
    pub cols: usize,
    /// `Y` in row-major order.
    pub y: Vec<f64>,
    pub failures: Vec<String>,
}

impl Repro {
    pub fn matrix(&self) -> Result<DenseMatrix> {
        DenseMatrix::from_row_major(self.rows, self.cols, self.y.clone())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("repro serializes")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifySummary {
    pub seed: u64,
    pub trials: usize,
    pub functions: Vec<FunctionSummary>,
    pub first_failure: Option<Repro>,
}

impl VerifySummary {
    pub fn passed(&self) -> bool {
        self.first_failure.is_none()
    }

    /// Fixed-width table; identical runs render identical bytes.
    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "verify: seed {}, {} trials per function", self.seed, self.trials);
        if self.trials == 0 {
            let _ = writeln!(out, "0 trials requested, nothing to check");
            let _ = writeln!(out, "result: PASS");
            return out;
        }
        let _ = writeln!(
            out,
            "{:<22} {:>7} {:>9} {:>9} {:>9} {:>9} {:>6} {:>10} {:>10} {:>10} {:>10}",
            "function", "trials", "thresh", "spectral", "cert", "matrix", "zero", "max|dt|", "max|ds|", "cert-exc", "max-gap"
        );
        for s in &self.functions {
            let _ = writeln!(
                out,
                "{:<22} {:>7} {:>9} {:>9} {:>9} {:>9} {:>6} {:>10.2e} {:>10.2e} {:>10.2e} {:>10.2e}",
                s.function,
                s.trials,
                format!("{}/{}", s.threshold_passed, s.trials),
                format!("{}/{}", s.spectral_passed, s.trials),
                format!("{}/{}", s.certificate_passed, s.trials),
                format!("{}/{}", s.matrix_passed, s.matrix_trials),
                s.zero_outputs,
                s.max_threshold_diff,
                s.max_spectral_diff,
                s.max_certificate_excess,
                s.max_matrix_gap,
            );
        }
        let _ = writeln!(out, "result: {}", if self.passed() { "PASS" } else { "FAIL" });
        out
    }
}

/// Runs the suite against [`generalized_svt`].
pub fn run_suite(seed: u64, trials: usize) -> Result<VerifySummary> {
    run_suite_with(seed, trials, generalized_svt)
}

pub fn run_suite_with(seed: u64, trials: usize, engine: ProxEngine) -> Result<VerifySummary> {
    let mut functions = Vec::with_capacity(BUILTIN_SPECS.len());
    let mut first_failure = None;
    for (index, spec) in BUILTIN_SPECS.iter().enumerate() {
        let func = make_builtin(spec)?;
        let mut summary = FunctionSummary { function: spec.to_string(), ..Default::default() };
        for trial in 0..trials {
            let inst = instance(seed, index, trial);
            let failures = check_instance(&inst, &func, engine, &mut summary)?;
            if !failures.is_empty() && first_failure.is_none() {
                log::info!("{spec} trial {trial} failed: {failures:?}");
                first_failure = Some(Repro {
                    seed,
                    function: spec.to_string(),
                    trial,
                    tau: inst.tau,
                    rows: inst.y.rows(),
                    cols: inst.y.cols(),
                    y: inst.y.row_major(),
                    failures,
                });
            }
        }
        functions.push(summary);
    }
    Ok(VerifySummary { seed, trials, functions, first_failure })
}

/// Runs the checks on one instance, updating `summary`, and returns the
/// list of failed checks.
fn check_instance(
    inst: &Instance,
    func: &SpectralFunction,
    engine: ProxEngine,
    summary: &mut FunctionSummary,
) -> Result<Vec<String>> {
    summary.trials += 1;
    let matrix_trial = uses_matrix_oracle(inst.trial);
    if matrix_trial {
        summary.matrix_trials += 1;
    }
    let result = match engine(&inst.y, func, inst.tau) {
        Ok(result) => result,
        Err(err) => return Ok(vec![format!("prox failed: {err}")]),
    };
    let mut failures = Vec::new();
    if result.retained_rank == 0 {
        summary.zero_outputs += 1;
    }

    let svd = thin_svd(&inst.y, default_rank_tol(inst.y.rows(), inst.y.cols()))?;
    let scan = linear_scan_threshold(func, &svd.sigma, inst.tau)?;
    let dt = (scan.t_star - result.threshold.t_star).abs();
    summary.max_threshold_diff = summary.max_threshold_diff.max(dt);
    if scan.j_star == result.threshold.j_star && dt <= THRESHOLD_TOL {
        summary.threshold_passed += 1;
    } else {
        failures.push(format!(
            "threshold: scan gives j*={} t*={:e}, prox gives j*={} t*={:e}",
            scan.j_star, scan.t_star, result.threshold.j_star, result.threshold.t_star
        ));
    }

    let oracle = spectral_prox_oracle(&svd.sigma, func, inst.tau, SPECTRAL_ORACLE_ITERS)?;
    let expected = oracle.spectral_values().expect("spectral oracle returns values");
    let got = singular_values(result.x_hat.as_nalgebra())?;
    let ds = expected
        .iter()
        .enumerate()
        .map(|(i, e)| (e - got.get(i).copied().unwrap_or(0.0)).abs())
        .chain(got.iter().skip(expected.len()).map(|g| g.abs()))
        .fold(0.0, f64::max);
    summary.max_spectral_diff = summary.max_spectral_diff.max(ds);
    if oracle.converged && ds <= SPECTRAL_ORACLE_TOL {
        summary.spectral_passed += 1;
    } else {
        failures.push(format!(
            "spectral oracle: max deviation {ds:e} (oracle converged: {})",
            oracle.converged
        ));
    }

    let cert = certify_optimality(&inst.y, &result, func, inst.tau, CERTIFICATE_TOL)?;
    let excess = [cert.ut_w_max, cert.w_v_max, cert.w_spectral_norm - 1.0].into_iter().fold(f64::MIN, f64::max);
    summary.max_certificate_excess = summary.max_certificate_excess.max(excess);
    if cert.passed {
        summary.certificate_passed += 1;
    } else {
        failures.push(format!(
            "certificate: |UᵀW| {:e}, |WV| {:e}, ‖W‖₂ {:.12}",
            cert.ut_w_max, cert.w_v_max, cert.w_spectral_norm
        ));
    }

    if matrix_trial {
        let prox_value = prox_objective(inst.y.as_nalgebra(), result.x_hat.as_nalgebra(), func, inst.tau)?;
        let oracle = matrix_prox_oracle(&inst.y, func, inst.tau, MATRIX_ORACLE_ITERS)?;
        let gap = oracle.objective - prox_value;
        let relative = gap / prox_value.abs().max(f64::MIN_POSITIVE);
        summary.max_matrix_gap = summary.max_matrix_gap.max(relative);
        if gap >= -MATRIX_GAP_FLOOR && relative <= MATRIX_GAP_CEILING {
            summary.matrix_passed += 1;
        } else {
            failures.push(format!(
                "matrix oracle: objective {:.12e} vs prox {prox_value:.12e}",
                oracle.objective
            ));
        }
    }
    Ok(failures)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Result;

    #[test]
    fn instances_are_reproducible() {
        let a = instance(5, 1, 3);
        let b = instance(5, 1, 3);
        assert_eq!(a.y, b.y);
        assert_eq!(a.tau, b.tau);
        assert_ne!(instance(5, 2, 3).y, a.y);
        let m = instance(5, 0, 10);
        assert!(m.y.rows() <= MATRIX_ORACLE_MAX_DIM && m.y.cols() <= MATRIX_ORACLE_MAX_DIM);
    }

    #[test]
    fn empty_suite_passes() {
        let summary = run_suite(1, 0).unwrap();
        assert!(summary.passed());
        assert!(summary.render().contains("0 trials"));
    }

    fn shifted_threshold(y: &DenseMatrix, func: &SpectralFunction, tau: f64) -> Result<ProxResult> {
        generalized_svt(y, func, tau * 1.01)
    }

    #[test]
    fn shifted_engine_is_caught() {
        let summary = run_suite_with(3, 2, shifted_threshold).unwrap();
        let repro = summary.first_failure.clone().expect("a failure is reported");
        assert!(!summary.passed());
        assert!(summary.render().ends_with("result: FAIL\n"));
        let inst = instance(3, BUILTIN_SPECS.iter().position(|s| *s == repro.function).unwrap(), repro.trial);
        assert_eq!(repro.matrix().unwrap(), inst.y);
        let back: Repro = serde_json::from_str(&repro.to_json()).unwrap();
        assert_eq!(back, repro);
    }
}
