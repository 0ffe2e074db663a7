//! Brute-force minimizers used to certify the thresholding prox.
//!
//! Neither oracle touches the threshold search or the shrinkage code. The
//! spectral oracle minimizes the reduced problem on singular values directly
//! and is tight. The matrix oracle runs subgradient descent over raw matrix
//! entries and is loose, but independent of any spectral reasoning.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::functions::SpectralFunction;
use crate::linalg::{thin_svd, DenseMatrix};
use crate::spectrum::SingularSpectrum;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleMethod {
    SpectralProjectedGradient,
    MatrixSubgradient,
}

impl OracleMethod {
    pub fn as_str(&self) -> &'static str {
        match self {
            OracleMethod::SpectralProjectedGradient => "spectral-projected-gradient",
            OracleMethod::MatrixSubgradient => "matrix-subgradient",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Minimizer {
    Spectral(Vec<f64>),
    Matrix(DenseMatrix),
}

#[derive(Debug, Clone)]
pub struct OracleSolution {
    pub minimizer: Minimizer,
    pub objective: f64,
    pub method: OracleMethod,
    pub iterations: usize,
    /// Spectral oracle: final projected-gradient norm. Matrix oracle: unused (NaN).
    pub stationarity: f64,
    pub converged: bool,
}

impl OracleSolution {
    pub fn spectral_values(&self) -> Option<&[f64]> {
        match &self.minimizer {
            Minimizer::Spectral(s) => Some(s),
            Minimizer::Matrix(_) => None,
        }
    }

    pub fn matrix(&self) -> Option<&DenseMatrix> {
        match &self.minimizer {
            Minimizer::Matrix(m) => Some(m),
            Minimizer::Spectral(_) => None,
        }
    }
}

pub const SPECTRAL_STATIONARITY_TOL: f64 = 1e-9;
const SLOPE_GRID: usize = 1000;

fn spectral_objective(s: &[f64], sigma: &[f64], func: &SpectralFunction, tau: f64) -> f64 {
    let fit: f64 = s.iter().zip(sigma).map(|(a, b)| (a - b) * (a - b)).sum();
    tau * func.value(s.iter().sum()) + 0.5 * fit
}

/// Range `[0, B]` that contains `Σ sᵢ` at the minimizer.
///
/// `B ≤ Σσ`, and wherever some `sᵢ > 0` stationarity forces `τ·g(Σs) ≤ σ¹`,
/// so the first grid point where `τ·g` exceeds `σ¹` also bounds the sum.
fn sum_bound(sigma: &[f64], func: &SpectralFunction, tau: f64) -> f64 {
    let total: f64 = sigma.iter().sum();
    let sigma1 = sigma[0];
    (0..=SLOPE_GRID)
        .map(|k| total * k as f64 / SLOPE_GRID as f64)
        .find(|&x| tau * func.derivative(x) > sigma1)
        .unwrap_or(total)
}

/// Largest secant slope of `g` on a grid over `[0, upper]`, padded by 10%
/// to cover curvature between grid points.
fn slope_bound(func: &SpectralFunction, upper: f64) -> f64 {
    if upper <= 0.0 {
        return 0.0;
    }
    let h = upper / SLOPE_GRID as f64;
    let max_secant = (0..SLOPE_GRID)
        .map(|k| {
            let x = k as f64 * h;
            ((func.derivative(x + h) - func.derivative(x)) / h).abs()
        })
        .fold(0.0, f64::max);
    1.1 * max_secant
}

/// Minimizes `ψ(s) = τ·f(Σ sᵢ) + ½Σ(sᵢ − σᵢ)²` over `0 ≤ sᵢ ≤ σᵢ` by
/// projected gradient descent with step `1 / (1 + r·τ·L_g)`.
///
/// The upper bound `sᵢ ≤ σᵢ` loses nothing: lowering any `sᵢ > σᵢ` to `σᵢ`
/// reduces both terms because `f` is nondecreasing on `[0, ∞)`. Stops once
/// the projected gradient is below [`SPECTRAL_STATIONARITY_TOL`].
pub fn spectral_prox_oracle(
    sigma: &SingularSpectrum,
    func: &SpectralFunction,
    tau: f64,
    iters: usize,
) -> Result<OracleSolution> {
    if iters == 0 {
        return Err(Error::InvalidArgument("oracle needs at least one iteration".into()));
    }
    let sv = sigma.values();
    let r = sv.len();
    if r == 0 {
        return Ok(OracleSolution {
            minimizer: Minimizer::Spectral(Vec::new()),
            objective: tau * func.value(0.0),
            method: OracleMethod::SpectralProjectedGradient,
            iterations: 0,
            stationarity: 0.0,
            converged: true,
        });
    }

    let bound = sum_bound(sv, func, tau);
    let lipschitz = slope_bound(func, bound);
    let step = 1.0 / (1.0 + r as f64 * tau * lipschitz);

    let mut s = vec![0.0; r];
    let mut grad = vec![0.0; r];
    let mut stationarity = f64::INFINITY;
    let mut iterations = 0;
    while iterations < iters {
        let shared = tau * func.derivative(s.iter().sum());
        for ((gi, si), sigma_i) in grad.iter_mut().zip(&s).zip(sv) {
            *gi = shared + si - sigma_i;
        }
        stationarity = s
            .iter()
            .zip(&grad)
            .zip(sv)
            .map(|((si, gi), sigma_i)| (si - (si - gi).clamp(0.0, *sigma_i)).abs())
            .fold(0.0, f64::max);
        if stationarity <= SPECTRAL_STATIONARITY_TOL {
            break;
        }
        for ((si, gi), sigma_i) in s.iter_mut().zip(&grad).zip(sv) {
            *si = (*si - step * gi).clamp(0.0, *sigma_i);
        }
        iterations += 1;
    }

    Ok(OracleSolution {
        objective: spectral_objective(&s, sv, func, tau),
        minimizer: Minimizer::Spectral(s),
        method: OracleMethod::SpectralProjectedGradient,
        iterations,
        stationarity,
        converged: stationarity <= SPECTRAL_STATIONARITY_TOL,
    })
}

pub const MATRIX_ORACLE_MAX_DIM: usize = 4;
/// Step-length constant `c`, relative to `‖Y‖_F`.
pub const MATRIX_ORACLE_STEP: f64 = 0.03;
pub const MATRIX_ORACLE_ITERS: usize = 100_000;
/// Singular directions below this fraction of `σ¹` are left out of the subgradient.
const POLAR_RANK_TOL: f64 = 1e-14;

/// Minimizes `τ·f(‖X‖_*) + ½‖X − Y‖_F²` over the entries of `X` by projected
/// subgradient descent with step lengths `c·max(1, ‖Y‖_F)/√k`, returning the
/// best iterate.
///
/// The subgradient of the nuclear-norm term is `f'(‖X‖_*)·U Vᵀ` over the
/// nonzero singular directions of the iterate (the `W = 0` selection).
/// Iterates are projected onto the ball `‖X − Y‖_F ≤ ‖Y‖_F`, which holds the
/// minimizer because the objective at `X = 0` bounds `½‖X − Y‖²` there.
pub fn matrix_prox_oracle(
    y: &DenseMatrix,
    func: &SpectralFunction,
    tau: f64,
    iters: usize,
) -> Result<OracleSolution> {
    if y.rows() > MATRIX_ORACLE_MAX_DIM || y.cols() > MATRIX_ORACLE_MAX_DIM {
        return Err(Error::InvalidArgument(format!(
            "matrix oracle is limited to {MATRIX_ORACLE_MAX_DIM}x{MATRIX_ORACLE_MAX_DIM}, got {}x{}",
            y.rows(),
            y.cols()
        )));
    }
    if iters == 0 {
        return Err(Error::InvalidArgument("oracle needs at least one iteration".into()));
    }
    let target = y.as_nalgebra();
    let radius = target.norm();
    let step_scale = MATRIX_ORACLE_STEP * radius.max(1.0);

    let mut x = DMatrix::zeros(y.rows(), y.cols());
    let mut best = (f64::INFINITY, x.clone());
    for k in 1..=iters {
        let svd = thin_svd(&DenseMatrix::from_nalgebra(x.clone())?, POLAR_RANK_TOL)?;
        let nuclear: f64 = svd.sigma.values().iter().sum();
        let objective = tau * func.value(nuclear) + 0.5 * (&x - target).norm_squared();
        if objective < best.0 {
            best = (objective, x.clone());
        }

        let polar = &svd.u * svd.v.transpose();
        let subgradient = polar * (tau * func.derivative(nuclear)) + (&x - target);
        let norm = subgradient.norm();
        if norm == 0.0 {
            break;
        }
        // Step length c/√k in Frobenius norm, never longer than the raw step.
        let length = (step_scale / (k as f64).sqrt()).min(norm);
        x -= subgradient * (length / norm);

        let offset = &x - target;
        let dist = offset.norm();
        if dist > radius {
            x = target + offset * (radius / dist);
        }
    }

    Ok(OracleSolution {
        minimizer: Minimizer::Matrix(DenseMatrix::from_nalgebra(best.1)?),
        objective: best.0,
        method: OracleMethod::MatrixSubgradient,
        iterations: iters,
        stationarity: f64::NAN,
        converged: true,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functions::make_builtin;

    fn spectrum(v: &[f64]) -> SingularSpectrum {
        SingularSpectrum::new(v.to_vec()).unwrap()
    }

    #[test]
    fn spectral_linear_is_soft_threshold() {
        let sol = spectral_prox_oracle(&spectrum(&[3.0, 1.0]), &make_builtin("linear").unwrap(), 0.5, 100_000)
            .unwrap();
        assert!(sol.converged);
        let s = sol.spectral_values().unwrap();
        assert!((s[0] - 2.5).abs() < 1e-8 && (s[1] - 0.5).abs() < 1e-8, "{s:?}");
    }

    #[test]
    fn spectral_quadratic() {
        let sol = spectral_prox_oracle(&spectrum(&[3.0, 1.0]), &make_builtin("quadratic").unwrap(), 1.0, 100_000)
            .unwrap();
        let s = sol.spectral_values().unwrap();
        assert!((s[0] - 1.0).abs() < 1e-8 && s[1].abs() < 1e-8, "{s:?}");
        assert!((sol.objective - 3.5).abs() < 1e-8);
    }

    #[test]
    fn spectral_quadratic_large_tau_keeps_mass() {
        // minimizer of 10s² + ½(s − 1)² is 1/21
        let sol = spectral_prox_oracle(&spectrum(&[1.0]), &make_builtin("quadratic").unwrap(), 10.0, 100_000)
            .unwrap();
        assert!((sol.spectral_values().unwrap()[0] - 1.0 / 21.0).abs() < 1e-9);
    }

    #[test]
    fn spectral_degenerate_exp() {
        let sol = spectral_prox_oracle(&spectrum(&[2.0]), &make_builtin("exp").unwrap(), 3.0, 100_000).unwrap();
        assert_eq!(sol.spectral_values().unwrap(), &[0.0]);
        assert!(sol.converged);
        assert_eq!(sol.method.as_str(), "spectral-projected-gradient");
    }

    #[test]
    fn matrix_oracle_examples() {
        let linear = make_builtin("linear").unwrap();
        let y = DenseMatrix::from_diagonal(&[3.0, 1.0]).unwrap();
        // optimum diag(2.5, 0.5): 0.5·3 + ½(0.25 + 0.25)
        let sol = matrix_prox_oracle(&y, &linear, 0.5, MATRIX_ORACLE_ITERS).unwrap();
        assert!((sol.objective - 1.75).abs() < 1e-4, "{}", sol.objective);

        let exp = make_builtin("exp").unwrap();
        let y = DenseMatrix::from_diagonal(&[2.0]).unwrap();
        let sol = matrix_prox_oracle(&y, &exp, 3.0, MATRIX_ORACLE_ITERS).unwrap();
        assert!((sol.objective - 5.0).abs() < 5e-3, "{}", sol.objective);
        assert!(sol.matrix().unwrap().get(0, 0).abs() < 1e-2);
    }

    #[test]
    fn matrix_oracle_rejects_large_input() {
        let y = DenseMatrix::zeros(5, 2);
        assert!(matrix_prox_oracle(&y, &make_builtin("linear").unwrap(), 1.0, 10).is_err());
    }
}
