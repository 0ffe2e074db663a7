//! Threshold computation on the singular-value vector.
//!
//! For a spectrum `σ¹ ≥ … ≥ σʳ > 0`, a weight `τ` and a derivative `g`, the
//! prox of `τ·f(‖·‖_*)` shrinks every singular value by a common threshold
//! `t*`. It is the root of `τ·g(S_j − j·t) = t` (with `S_j` the sum of the
//! `j` largest values) for the unique index `j*` whose root lands in
//! `[σ^{j+1}, σ^j)`, where `σ^{r+1}` compares as `−∞`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functions::SpectralFunction;

/// Bracket width at which bisection is allowed to stop.
pub const BRACKET_TOL: f64 = 1e-12;
/// Default residual acceptance, relative to `max(1, t)`.
pub const RESIDUAL_TOL: f64 = 1e-10;
pub const MAX_BISECTION_ITERS: usize = 200;

/// Singular values above the rank cutoff, sorted nonincreasing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct SingularSpectrum {
    values: Vec<f64>,
}

impl SingularSpectrum {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(v) = values.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
            return Err(Error::InvalidSpectrum(format!(
                "singular values must be finite and positive, got {v}"
            )));
        }
        if values.windows(2).any(|w| w[1] > w[0]) {
            return Err(Error::InvalidSpectrum("singular values must be nonincreasing".into()));
        }
        Ok(Self { values })
    }

    pub fn empty() -> Self {
        Self { values: Vec::new() }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn rank(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn largest(&self) -> Option<f64> {
        self.values.first().copied()
    }

    /// One-based access `σ^j`; indices past the rank read as `−∞`.
    pub fn sigma(&self, j: usize) -> f64 {
        assert!(j >= 1, "singular values are indexed from 1");
        self.values.get(j - 1).copied().unwrap_or(f64::NEG_INFINITY)
    }
}

impl TryFrom<Vec<f64>> for SingularSpectrum {
    type Error = Error;

    fn try_from(values: Vec<f64>) -> Result<Self> {
        Self::new(values)
    }
}

impl From<SingularSpectrum> for Vec<f64> {
    fn from(s: SingularSpectrum) -> Self {
        s.values
    }
}

/// The retained count `j*` and threshold `t*`, plus solver diagnostics.
///
/// `j_star = 0` encodes the degenerate branch where nothing survives; then
/// `t_star = σ¹` and the residual is reported as zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdResult {
    pub j_star: usize,
    pub t_star: f64,
    pub equation_residual: f64,
    pub bisection_iterations: usize,
    pub equation_solves: usize,
    /// Interval tests performed while locating `j*`.
    pub probes: usize,
}

impl ThresholdResult {
    fn degenerate(sigma1: f64) -> Self {
        Self {
            j_star: 0,
            t_star: sigma1,
            equation_residual: 0.0,
            bisection_iterations: 0,
            equation_solves: 0,
            probes: 1,
        }
    }
}

/// Root of the scalar threshold equation for a fixed index.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RootSolve {
    pub t: f64,
    pub residual: f64,
    pub iterations: usize,
}

/// `S_j = σ¹ + … + σ^j` for `j = 1..=r`.
pub fn partial_sums(spectrum: &SingularSpectrum) -> Vec<f64> {
    spectrum
        .values()
        .iter()
        .scan(0.0, |acc, &v| {
            *acc += v;
            Some(*acc)
        })
        .collect()
}

/// Solves `τ·g(S_j − j·t) = t` for `t ≥ 0` by bisection.
///
/// `φ(t) = τ·g(S_j − j·t) − t` is strictly decreasing when `g` is
/// nondecreasing, with `φ(0) = τ·g(S_j) ≥ 0`. Both `τ·g(S_j)` and
/// `max(S_j/j, τ·g(0))` make `φ` nonpositive, so the smaller of the two closes
/// the bracket (the second one stays finite when `g(S_j)` overflows).
///
/// Bisection runs until the bracket is narrower than [`BRACKET_TOL`] and the
/// residual is at most `tol·max(1, t)`, or until floating point cannot split
/// the bracket further.
pub fn solve_scalar_equation(
    func: &SpectralFunction,
    partial_sum: f64,
    j: usize,
    tau: f64,
    tol: f64,
) -> Result<RootSolve> {
    if j == 0 {
        return Err(Error::InvalidArgument("equation index j must be at least 1".into()));
    }
    if !(tau.is_finite() && tau > 0.0) {
        return Err(Error::InvalidArgument(format!("tau must be positive and finite, got {tau}")));
    }
    if !(partial_sum.is_finite() && partial_sum > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "partial sum must be positive and finite, got {partial_sum}"
        )));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")));
    }

    let jf = j as f64;
    let phi = |t: f64| tau * func.derivative(partial_sum - jf * t) - t;

    let phi_lo = phi(0.0);
    if phi_lo.is_nan() || phi_lo < 0.0 {
        return Err(Error::InvalidFunction(format!(
            "{}: g({partial_sum}) is negative or undefined",
            func.label()
        )));
    }
    if phi_lo == 0.0 {
        return Ok(RootSolve { t: 0.0, residual: 0.0, iterations: 0 });
    }

    let cap = (partial_sum / jf).max(tau * func.derivative(0.0));
    let mut hi = (tau * func.derivative(partial_sum)).min(cap);
    if !(hi.is_finite() && hi > 0.0) {
        return Err(Error::InvalidFunction(format!(
            "{}: cannot bracket the threshold equation",
            func.label()
        )));
    }
    let mut phi_hi = phi(hi);
    if phi_hi.is_nan() || phi_hi > 0.0 {
        return Err(Error::InvalidFunction(format!(
            "{}: threshold equation is not decreasing (g not nondecreasing?)",
            func.label()
        )));
    }
    if phi_hi == 0.0 {
        return Ok(RootSolve { t: hi, residual: 0.0, iterations: 0 });
    }
    let mut lo = 0.0;
    let mut phi_lo = phi_lo;

    let best = |lo: f64, phi_lo: f64, hi: f64, phi_hi: f64| {
        if phi_lo.abs() <= phi_hi.abs() {
            (lo, phi_lo.abs())
        } else {
            (hi, phi_hi.abs())
        }
    };

    let mut iterations = 0;
    while iterations < MAX_BISECTION_ITERS {
        let (t, residual) = best(lo, phi_lo, hi, phi_hi);
        if hi - lo <= BRACKET_TOL && residual <= tol * t.max(1.0) {
            break;
        }
        let mid = lo + 0.5 * (hi - lo);
        if mid <= lo || mid >= hi {
            break;
        }
        iterations += 1;
        let value = phi(mid);
        if value == 0.0 {
            return Ok(RootSolve { t: mid, residual: 0.0, iterations });
        } else if value > 0.0 {
            lo = mid;
            phi_lo = value;
        } else {
            hi = mid;
            phi_hi = value;
        }
    }

    let (t, residual) = best(lo, phi_lo, hi, phi_hi);
    if residual <= tol * t.max(1.0) {
        Ok(RootSolve { t, residual, iterations })
    } else {
        Err(Error::NonConvergence { iterations, t, residual })
    }
}

fn is_degenerate(func: &SpectralFunction, spectrum: &SingularSpectrum, tau: f64) -> Result<Option<f64>> {
    if !(tau.is_finite() && tau > 0.0) {
        return Err(Error::InvalidArgument(format!("tau must be positive and finite, got {tau}")));
    }
    let sigma1 = spectrum
        .largest()
        .ok_or_else(|| Error::InvalidArgument("threshold search needs a nonempty spectrum".into()))?;
    // Nothing survives exactly when τ·g(0) ≥ σ¹; for g(0) = 1 this is τ ≥ σ¹.
    Ok((tau * func.derivative(0.0) >= sigma1).then_some(sigma1))
}

/// `q_k = Σ_{i<k} (σ^i − σ^k)` for `k = 1..=r`, accumulated from the
/// nonnegative gaps `k·(σ^k − σ^{k+1})` so the sequence is nondecreasing in
/// floating point as well.
fn gap_sums(spectrum: &SingularSpectrum) -> Vec<f64> {
    let v = spectrum.values();
    let mut q = Vec::with_capacity(v.len());
    let mut acc = 0.0;
    for k in 0..v.len() {
        if k > 0 {
            acc += k as f64 * (v[k - 1] - v[k]);
        }
        q.push(acc);
    }
    q
}

/// Interval tests for the threshold index.
///
/// `φ_m(t) = τ·g(S_m − m·t) − t` is decreasing, so the root `t_m` lies
/// below `σ^k` exactly when `φ_m(σ^k) < 0`. At `t = σ^k` the argument
/// `S_m − m·σ^k` equals `q_k` for both `m = k − 1` and `m = k`, so
/// `t_{k−1} < σ^k ⟺ τ·g(q_k) < σ^k ⟺ t_k < σ^k`. That predicate holds for
/// `k = 1..=j*` and fails afterwards, which pins down `j*` with exact
/// comparisons and without depending on how accurately any root was solved.
struct IntervalTest<'a> {
    func: &'a SpectralFunction,
    spectrum: &'a SingularSpectrum,
    q: Vec<f64>,
    tau: f64,
}

impl<'a> IntervalTest<'a> {
    fn new(func: &'a SpectralFunction, spectrum: &'a SingularSpectrum, tau: f64) -> Self {
        Self { func, spectrum, q: gap_sums(spectrum), tau }
    }

    /// `j* ≥ k`. Always false past the rank, where `σ^{r+1} = −∞`.
    fn keeps(&self, k: usize) -> bool {
        k <= self.q.len() && self.tau * self.func.derivative(self.q[k - 1]) < self.spectrum.sigma(k)
    }

    /// Where `t_m` sits relative to `[σ^{m+1}, σ^m)`.
    fn classify(&self, m: usize) -> std::cmp::Ordering {
        use std::cmp::Ordering::*;
        if !self.keeps(m) {
            Less // t_m ≥ σ^m: j* < m
        } else if self.keeps(m + 1) {
            Greater // t_m < σ^{m+1}: j* > m
        } else {
            Equal
        }
    }

    /// Solves the equation at the located index and places the root inside
    /// `[σ^{j+1}, σ^j)`, where the exact root is known to lie.
    fn finish(&self, j: usize, probes: usize) -> Result<ThresholdResult> {
        let s = partial_sums(self.spectrum)[j - 1];
        let root = solve_scalar_equation(self.func, s, j, self.tau, RESIDUAL_TOL)?;
        let upper = self.spectrum.sigma(j);
        let t = root.t.min(upper.next_down()).max(self.spectrum.sigma(j + 1));
        let residual = if t == root.t {
            root.residual
        } else {
            (self.tau * self.func.derivative(s - j as f64 * t) - t).abs()
        };
        Ok(ThresholdResult {
            j_star: j,
            t_star: t,
            equation_residual: residual,
            bisection_iterations: root.iterations,
            equation_solves: 1,
            probes,
        })
    }
}

/// Binary search for `(j*, t*)`.
///
/// Keeps `j* ∈ [lo, hi]` and strictly shrinks the interval on every probe,
/// so at most `⌊log₂ r⌋ + 1` probes are made; the threshold equation is then
/// solved once, at `j*`.
pub fn find_threshold(func: &SpectralFunction, spectrum: &SingularSpectrum, tau: f64) -> Result<ThresholdResult> {
    if let Some(sigma1) = is_degenerate(func, spectrum, tau)? {
        return Ok(ThresholdResult::degenerate(sigma1));
    }
    let test = IntervalTest::new(func, spectrum, tau);
    let (mut lo, mut hi) = (1, spectrum.rank());
    let mut probes = 0;

    while lo <= hi {
        let m = (lo + hi).div_ceil(2);
        probes += 1;
        match test.classify(m) {
            std::cmp::Ordering::Less => hi = m - 1,
            std::cmp::Ordering::Greater => lo = m + 1,
            std::cmp::Ordering::Equal => return test.finish(m, probes),
        }
    }
    Err(Error::NoThresholdIndex)
}

/// Sequential reference for [`find_threshold`]: tries `j = 1, 2, …, r` and
/// returns the first index whose interval holds its root.
pub fn linear_scan_threshold(
    func: &SpectralFunction,
    spectrum: &SingularSpectrum,
    tau: f64,
) -> Result<ThresholdResult> {
    if let Some(sigma1) = is_degenerate(func, spectrum, tau)? {
        return Ok(ThresholdResult::degenerate(sigma1));
    }
    let test = IntervalTest::new(func, spectrum, tau);
    for j in 1..=spectrum.rank() {
        if test.classify(j).is_eq() {
            return test.finish(j, j);
        }
    }
    Err(Error::NoThresholdIndex)
}

/// Root of the threshold equation for one index, and whether that index's
/// interval holds the exact root (decided by the interval test, not by
/// comparing the rounded `t`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Candidate {
    pub j: usize,
    pub t: f64,
    pub residual: f64,
    pub in_interval: bool,
}

/// Solves the equation for every `j = 1..=r` without stopping early.
pub fn candidate_thresholds(
    func: &SpectralFunction,
    spectrum: &SingularSpectrum,
    tau: f64,
) -> Result<Vec<Candidate>> {
    is_degenerate(func, spectrum, tau)?;
    let test = IntervalTest::new(func, spectrum, tau);
    (1..)
        .zip(partial_sums(spectrum))
        .map(|(j, s)| {
            let root = solve_scalar_equation(func, s, j, tau, RESIDUAL_TOL)?;
            Ok(Candidate {
                j,
                t: root.t,
                residual: root.residual,
                in_interval: test.classify(j).is_eq(),
            })
        })
        .collect()
}

/// Soft shrinkage `(σⁱ − t)₊`, elementwise.
pub fn shrink(spectrum: &SingularSpectrum, t: f64) -> Vec<f64> {
    spectrum.values().iter().map(|&s| (s - t).max(0.0)).collect()
}
