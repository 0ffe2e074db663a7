//! Matrix-level operators: thin SVD, soft thresholding `D_τ`, the
//! generalized thresholding prox `H_τ`, and the subgradient certificate
//! that checks its optimality.
//!
//! Singular vectors are unique only up to sign (and rotation inside tied
//! subspaces), so callers should compare reconstructed matrices or singular
//! values rather than factors.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::functions::SpectralFunction;
use crate::spectrum::{find_threshold, SingularSpectrum, ThresholdResult};

/// Dense real matrix with at least one row and one column and finite entries.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix(DMatrix<f64>);

impl DenseMatrix {
    /// Builds a matrix from entries in row-major order.
    pub fn from_row_major(rows: usize, cols: usize, entries: Vec<f64>) -> Result<Self> {
        if rows * cols != entries.len() {
            return Err(Error::Dimension(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                entries.len()
            )));
        }
        Self::from_nalgebra(DMatrix::from_row_slice(rows, cols, &entries))
    }

    pub fn from_nalgebra(m: DMatrix<f64>) -> Result<Self> {
        if m.nrows() == 0 || m.ncols() == 0 {
            return Err(Error::Dimension("matrix must have at least one row and column".into()));
        }
        if m.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("matrix entries must be finite".into()));
        }
        Ok(Self(m))
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "matrix must have at least one row and column");
        Self(DMatrix::zeros(rows, cols))
    }

    /// Square diagonal matrix.
    pub fn from_diagonal(diag: &[f64]) -> Result<Self> {
        Self::from_nalgebra(DMatrix::from_diagonal(&DVector::from_column_slice(diag)))
    }

    pub fn rows(&self) -> usize {
        self.0.nrows()
    }

    pub fn cols(&self) -> usize {
        self.0.ncols()
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.0[(row, col)]
    }

    pub fn as_nalgebra(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_nalgebra(self) -> DMatrix<f64> {
        self.0
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.norm()
    }

    pub fn row_major(&self) -> Vec<f64> {
        self.0.transpose().as_slice().to_vec()
    }

    pub fn max_abs_diff(&self, other: &DenseMatrix) -> f64 {
        (&self.0 - &other.0).amax()
    }
}

/// `Y ≈ U·diag(σ)·Vᵀ` truncated to the numeric rank.
#[derive(Debug, Clone)]
pub struct ThinSvd {
    /// `n1 × r`, orthonormal columns.
    pub u: DMatrix<f64>,
    pub sigma: SingularSpectrum,
    /// `n2 × r`, orthonormal columns.
    pub v: DMatrix<f64>,
}

impl ThinSvd {
    pub fn rank(&self) -> usize {
        self.sigma.rank()
    }

    /// `U·diag(values)·Vᵀ` for replacement singular values of the same length.
    pub fn reconstruct_with(&self, values: &[f64]) -> DMatrix<f64> {
        reconstruct(&self.u, values, &self.v)
    }
}

pub(crate) fn reconstruct(u: &DMatrix<f64>, values: &[f64], v: &DMatrix<f64>) -> DMatrix<f64> {
    debug_assert_eq!(u.ncols(), values.len());
    debug_assert_eq!(v.ncols(), values.len());
    let mut scaled = u.clone();
    for (mut col, &s) in scaled.column_iter_mut().zip(values) {
        col *= s;
    }
    scaled * v.transpose()
}

/// Default relative rank cutoff `max(n1, n2)·ε`.
pub fn default_rank_tol(rows: usize, cols: usize) -> f64 {
    rows.max(cols) as f64 * f64::EPSILON
}

fn to_faer(m: &DMatrix<f64>) -> faer::Mat<f64> {
    faer::Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

fn from_faer(m: faer::MatRef<'_, f64>) -> DMatrix<f64> {
    DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

/// Thin SVD keeping singular values above `rank_tol·σ¹`.
pub fn thin_svd(y: &DenseMatrix, rank_tol: f64) -> Result<ThinSvd> {
    if !(rank_tol >= 0.0) {
        return Err(Error::InvalidArgument(format!("rank tolerance must be nonnegative, got {rank_tol}")));
    }
    let svd = to_faer(y.as_nalgebra()).thin_svd().map_err(|_| Error::Svd)?;
    let values: Vec<f64> = svd.S().column_vector().iter().copied().collect();
    let sigma1 = values.iter().copied().fold(0.0, f64::max);
    let cutoff = rank_tol * sigma1;
    let rank = if sigma1 > 0.0 {
        values.iter().take_while(|&&s| s > cutoff).count()
    } else {
        0
    };
    Ok(ThinSvd {
        u: from_faer(svd.U().get(.., ..rank)),
        sigma: SingularSpectrum::new(values[..rank].to_vec())?,
        v: from_faer(svd.V().get(.., ..rank)),
    })
}

/// All `min(n1, n2)` singular values, nonincreasing.
pub fn singular_values(m: &DMatrix<f64>) -> Result<Vec<f64>> {
    if m.is_empty() {
        return Ok(Vec::new());
    }
    to_faer(m).singular_values().map_err(|_| Error::Svd)
}

pub fn nuclear_norm(m: &DMatrix<f64>) -> Result<f64> {
    Ok(singular_values(m)?.iter().sum())
}

/// Largest singular value; zero for an empty matrix.
pub fn spectral_norm(m: &DMatrix<f64>) -> Result<f64> {
    if m.is_empty() {
        return Ok(0.0);
    }
    Ok(singular_values(m)?.into_iter().fold(0.0, f64::max))
}

/// `τ·f(‖X‖_*) + ½‖X − Y‖_F²`.
pub fn prox_objective(y: &DMatrix<f64>, x: &DMatrix<f64>, func: &SpectralFunction, tau: f64) -> Result<f64> {
    Ok(tau * func.value(nuclear_norm(x)?) + 0.5 * (x - y).norm_squared())
}

/// Singular value soft thresholding `U·diag((σⁱ − τ)₊)·Vᵀ`, the prox of
/// `τ‖·‖_*`.
pub fn soft_threshold_matrix(y: &DenseMatrix, tau: f64) -> Result<DenseMatrix> {
    if !(tau >= 0.0 && tau.is_finite()) {
        return Err(Error::InvalidArgument(format!("tau must be nonnegative and finite, got {tau}")));
    }
    let svd = thin_svd(y, default_rank_tol(y.rows(), y.cols()))?;
    let shrunk = crate::spectrum::shrink(&svd.sigma, tau);
    DenseMatrix::from_nalgebra(svd.reconstruct_with(&shrunk))
}

/// Singular vectors and shrunk values that survive thresholding.
#[derive(Debug, Clone)]
pub struct RetainedFactors {
    pub u: DMatrix<f64>,
    pub values: Vec<f64>,
    pub v: DMatrix<f64>,
}

/// Minimizer of `τ·f(‖X‖_*) + ½‖X − Y‖_F²` with its diagnostics.
#[derive(Debug, Clone)]
pub struct ProxResult {
    pub x_hat: DenseMatrix,
    pub threshold: ThresholdResult,
    pub retained_rank: usize,
    /// `Σ_{i ≤ j*} (σⁱ − t*)`
    pub nuclear_norm: f64,
    pub objective: f64,
    pub factors: RetainedFactors,
    /// Numeric rank of the input.
    pub input_rank: usize,
}

/// Generalized singular value thresholding: shrinks the spectrum of `Y` by
/// the data-dependent threshold from [`find_threshold`].
pub fn generalized_svt(y: &DenseMatrix, func: &SpectralFunction, tau: f64) -> Result<ProxResult> {
    if !(tau.is_finite() && tau > 0.0) {
        return Err(Error::InvalidArgument(format!("tau must be positive and finite, got {tau}")));
    }
    let svd = thin_svd(y, default_rank_tol(y.rows(), y.cols()))?;
    let threshold = if svd.rank() == 0 {
        ThresholdResult {
            j_star: 0,
            t_star: 0.0,
            equation_residual: 0.0,
            bisection_iterations: 0,
            equation_solves: 0,
            probes: 0,
        }
    } else {
        find_threshold(func, &svd.sigma, tau)?
    };

    let j = threshold.j_star;
    let values: Vec<f64> = svd.sigma.values()[..j].iter().map(|s| s - threshold.t_star).collect();
    let factors = RetainedFactors {
        u: svd.u.columns(0, j).into_owned(),
        values,
        v: svd.v.columns(0, j).into_owned(),
    };
    let x_hat = reconstruct(&factors.u, &factors.values, &factors.v);
    let nuclear_norm: f64 = factors.values.iter().sum();
    let objective = tau * func.value(nuclear_norm) + 0.5 * (&x_hat - y.as_nalgebra()).norm_squared();

    log::debug!(
        "generalized_svt: rank {} -> {}, t* = {}, {} probes, {} bisection steps",
        svd.rank(),
        j,
        threshold.t_star,
        threshold.probes,
        threshold.bisection_iterations
    );

    Ok(ProxResult {
        x_hat: DenseMatrix::from_nalgebra(x_hat)?,
        threshold,
        retained_rank: j,
        nuclear_norm,
        objective,
        factors,
        input_rank: svd.rank(),
    })
}

/// Outcome of the subgradient optimality check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CertificateReport {
    pub passed: bool,
    /// `τ·g(‖X̂‖_*)`, the multiplier of the nuclear-norm subgradient.
    pub scale: f64,
    /// `‖U_aᵀ W‖_max`
    pub ut_w_max: f64,
    /// `‖W V_a‖_max`
    pub w_v_max: f64,
    /// `‖W‖₂`
    pub w_spectral_norm: f64,
    /// `‖Y − X̂‖_F`, only consulted when `scale` is zero.
    pub residual_norm: f64,
}

/// Checks `Y − X̂ = τ·g(‖X̂‖_*)·(U_a V_aᵀ + W)` with `U_aᵀW = 0`, `W V_a = 0`
/// and `‖W‖₂ ≤ 1`, where `U_a`, `V_a` are the retained singular vectors.
///
/// `W` is solved for explicitly and the three constraints are tested at
/// `tol`. When nothing is retained `W = Y / (τ·g(0))`. A zero scale leaves
/// only `Y = X̂`, tested as `‖Y − X̂‖_F ≤ tol`.
pub fn certify_optimality(
    y: &DenseMatrix,
    result: &ProxResult,
    func: &SpectralFunction,
    tau: f64,
    tol: f64,
) -> Result<CertificateReport> {
    let diff = y.as_nalgebra() - result.x_hat.as_nalgebra();
    let residual_norm = diff.norm();
    let scale = tau * func.derivative(result.nuclear_norm);

    if !(scale > 0.0) {
        return Ok(CertificateReport {
            passed: residual_norm <= tol,
            scale,
            ut_w_max: 0.0,
            w_v_max: 0.0,
            w_spectral_norm: 0.0,
            residual_norm,
        });
    }

    let (u_a, v_a) = (&result.factors.u, &result.factors.v);
    let w = if u_a.ncols() == 0 {
        diff / scale
    } else {
        (diff - u_a * v_a.transpose() * scale) / scale
    };
    let max_abs = |m: DMatrix<f64>| if m.is_empty() { 0.0 } else { m.amax() };
    let ut_w_max = max_abs(u_a.transpose() * &w);
    let w_v_max = max_abs(&w * v_a);
    let w_spectral_norm = spectral_norm(&w)?;

    Ok(CertificateReport {
        passed: ut_w_max <= tol && w_v_max <= tol && w_spectral_norm <= 1.0 + tol,
        scale,
        ut_w_max,
        w_v_max,
        w_spectral_norm,
        residual_norm,
    })
}
