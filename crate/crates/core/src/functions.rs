//! Scalar regularizers `f` applied to the nuclear norm, paired with their
//! exact derivatives `g = f'`.
//!
//! The thresholding machinery needs `g >= 0`, `g` nondecreasing and
//! `g(0) <= 1`. Builtins satisfy these analytically; user-supplied functions
//! can be screened with [`validate`], which samples a grid over `[0, 100]`
//! and therefore cannot prove convexity globally.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A regularizer `f` together with its derivative `g`.
///
/// Both maps are defined on all of ℝ: bisection probes inside the root
/// solver may evaluate `g` at negative arguments even though the solution
/// never lands there.
#[derive(Clone)]
pub struct SpectralFunction {
    label: String,
    f: ScalarFn,
    g: ScalarFn,
}

impl SpectralFunction {
    /// Wraps a user-supplied pair. `g` must be the exact derivative of `f`;
    /// it is never approximated by differencing.
    pub fn new<F, G>(label: impl Into<String>, f: F, g: G) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
        G: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self {
            label: label.into(),
            f: Arc::new(f),
            g: Arc::new(g),
        }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    #[inline]
    pub fn value(&self, x: f64) -> f64 {
        (self.f)(x)
    }

    #[inline]
    pub fn derivative(&self, x: f64) -> f64 {
        (self.g)(x)
    }
}

impl fmt::Debug for SpectralFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SpectralFunction")
            .field("label", &self.label)
            .finish_non_exhaustive()
    }
}

/// Builds one of the builtin regularizers from its spec string:
/// `linear | quadratic | exp | poly:<c1>,<c2>,...` where `ci` multiplies `x^i`.
pub fn make_builtin(spec: &str) -> Result<SpectralFunction> {
    let spec = spec.trim();
    match spec {
        "linear" => Ok(SpectralFunction::new("linear", |x| x, |_| 1.0)),
        "quadratic" => Ok(SpectralFunction::new("quadratic", |x| x * x, |x| 2.0 * x)),
        "exp" => Ok(SpectralFunction::new("exp", f64::exp, f64::exp)),
        _ => match spec.strip_prefix("poly:") {
            Some(coeffs) => polynomial(spec, coeffs),
            None => Err(Error::UnknownFunctionSpec(spec.to_string())),
        },
    }
}

fn polynomial(spec: &str, coeffs: &str) -> Result<SpectralFunction> {
    let coeffs = coeffs
        .split(',')
        .map(|c| {
            c.trim().parse::<f64>().map_err(|_| {
                Error::InvalidFunction(format!("`{spec}`: coefficient `{}` is not a number", c.trim()))
            })
        })
        .collect::<Result<Vec<f64>>>()?;

    if let Some(c) = coeffs.iter().find(|c| !c.is_finite() || **c < 0.0) {
        return Err(Error::InvalidFunction(format!(
            "`{spec}`: coefficients must be finite and nonnegative, got {c}"
        )));
    }
    if coeffs[0] > 1.0 {
        return Err(Error::InvalidFunction(format!(
            "`{spec}`: linear coefficient {} violates g(0) <= 1",
            coeffs[0]
        )));
    }

    // Below zero the polynomial is continued by its tangent line at 0, which
    // keeps f convex and g nondecreasing on all of ℝ (odd powers would not).
    let fc = Arc::new(coeffs);
    let gc = Arc::clone(&fc);
    Ok(SpectralFunction::new(
        spec,
        move |x| {
            if x < 0.0 {
                fc[0] * x
            } else {
                // f(x) = x * (c1 + x * (c2 + x * (...)))
                x * fc.iter().rev().fold(0.0, |acc, c| acc * x + c)
            }
        },
        move |x| {
            if x < 0.0 {
                gc[0]
            } else {
                gc.iter()
                    .enumerate()
                    .rev()
                    .fold(0.0, |acc, (i, c)| acc * x + (i + 1) as f64 * c)
            }
        },
    ))
}

/// First hypothesis a function failed during [`validate`].
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    NonFinite { x: f64 },
    NegativeDerivative { x: f64, g: f64 },
    DecreasingDerivative { x0: f64, x1: f64 },
    DerivativeAtZero { g0: f64 },
    DerivativeMismatch { x: f64, finite_difference: f64, g: f64 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NonFinite { x } => write!(f, "f or g is not finite at x = {x}"),
            Violation::NegativeDerivative { x, g } => {
                write!(f, "g(x) ≥ 0 violated at x = {x} (g = {g})")
            }
            Violation::DecreasingDerivative { x0, x1 } => {
                write!(f, "g nondecreasing violated: g({x1}) < g({x0})")
            }
            Violation::DerivativeAtZero { g0 } => write!(f, "g(0) ≤ 1 violated (g(0) = {g0})"),
            Violation::DerivativeMismatch { x, finite_difference, g } => write!(
                f,
                "g does not match the finite difference of f at x = {x} ({finite_difference} vs {g})"
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub samples: usize,
    pub violation: Option<Violation>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.violation.is_none()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.violation {
            None => write!(f, "pass ({} samples)", self.samples),
            Some(v) => write!(f, "fail: {v}"),
        }
    }
}

pub const VALIDATION_RANGE: f64 = 100.0;
pub const DIFFERENCE_STEP: f64 = 1e-5;
pub const DIFFERENCE_RTOL: f64 = 1e-6;

/// Numerical derivative of `f` used only as a cross-check against `g`.
///
/// Central differences everywhere except next to zero, where a second-order
/// one-sided stencil keeps the probes inside the validated domain.
pub fn finite_difference(func: &SpectralFunction, x: f64, h: f64) -> f64 {
    if x >= h {
        (func.value(x + h) - func.value(x - h)) / (2.0 * h)
    } else {
        (-3.0 * func.value(x) + 4.0 * func.value(x + h) - func.value(x + 2.0 * h)) / (2.0 * h)
    }
}

/// Checks the hypotheses on a uniform grid of `sample_count` points over
/// `[0, 100]` (at least two points are always used). Violations are
/// reported in a fixed order: finiteness, `g >= 0`, monotonicity of `g`,
/// `g(0) <= 1`, then agreement with finite differences.
pub fn validate(func: &SpectralFunction, sample_count: usize) -> ValidationReport {
    let n = sample_count.max(2);
    let grid: Vec<f64> = (0..n)
        .map(|i| VALIDATION_RANGE * i as f64 / (n - 1) as f64)
        .collect();
    let gs: Vec<f64> = grid.iter().map(|&x| func.derivative(x)).collect();
    let report = |violation| ValidationReport { samples: n, violation: Some(violation) };

    for (&x, &g) in grid.iter().zip(&gs) {
        if !g.is_finite() || !func.value(x).is_finite() {
            return report(Violation::NonFinite { x });
        }
    }
    for (&x, &g) in grid.iter().zip(&gs) {
        if g < 0.0 {
            return report(Violation::NegativeDerivative { x, g });
        }
    }
    for (xs, pair) in grid.windows(2).zip(gs.windows(2)) {
        if pair[1] < pair[0] {
            return report(Violation::DecreasingDerivative { x0: xs[0], x1: xs[1] });
        }
    }
    if gs[0] > 1.0 {
        return report(Violation::DerivativeAtZero { g0: gs[0] });
    }
    for (&x, &g) in grid.iter().zip(&gs) {
        let fd = finite_difference(func, x, DIFFERENCE_STEP);
        if (fd - g).abs() > DIFFERENCE_RTOL * g.abs().max(1.0) {
            return report(Violation::DerivativeMismatch { x, finite_difference: fd, g });
        }
    }
    ValidationReport { samples: n, violation: None }
}

/// The builtin specs exercised by the verification suite.
pub const BUILTIN_SPECS: [&str; 4] = ["linear", "quadratic", "exp", "poly:0.5,0.25,0.125"];
