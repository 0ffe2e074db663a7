//! Proximal gradient solvers for nuclear-norm-regularized matrix completion,
//!
//! ```text
//! minimize  ½ Σ_{(i,j) ∈ Ω} (X_ij − M_ij)²  +  λ·f(‖X‖_*)
//! ```
//!
//! The data term's gradient is the residual on the observed mask, which is
//! 1-Lipschitz, so both solvers take unit steps and call the prox with
//! `τ = λ`. Iteration starts from `X₀ = 0`.

use std::collections::HashSet;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::functions::SpectralFunction;
use crate::io::Observation;
use crate::linalg::{generalized_svt, nuclear_norm, DenseMatrix, ProxResult};

pub const STEP: f64 = 1.0;
/// Relative iterate change below which a run counts as a fixed point.
pub const FIXED_POINT_TOL: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct CompletionProblem {
    rows: usize,
    cols: usize,
    observed: Vec<Observation>,
    lambda: f64,
    func: SpectralFunction,
}

impl CompletionProblem {
    pub fn new(
        rows: usize,
        cols: usize,
        observed: Vec<Observation>,
        lambda: f64,
        func: SpectralFunction,
    ) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Dimension("completion problem needs positive dimensions".into()));
        }
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(Error::InvalidArgument(format!("lambda must be positive and finite, got {lambda}")));
        }
        let mut seen = HashSet::with_capacity(observed.len());
        for &(i, j, v) in &observed {
            if i >= rows || j >= cols {
                return Err(Error::Dimension(format!(
                    "observed entry ({i}, {j}) is outside a {rows}x{cols} matrix"
                )));
            }
            if !v.is_finite() {
                return Err(Error::InvalidArgument(format!("observed entry ({i}, {j}) is not finite")));
            }
            if !seen.insert((i, j)) {
                return Err(Error::InvalidArgument(format!("duplicate observed position ({i}, {j})")));
            }
        }
        Ok(Self { rows, cols, observed, lambda, func })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn observed(&self) -> &[Observation] {
        &self.observed
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn func(&self) -> &SpectralFunction {
        &self.func
    }

    /// Same data with a different regularization weight.
    pub fn with_lambda(&self, lambda: f64) -> Result<Self> {
        Self::new(self.rows, self.cols, self.observed.clone(), lambda, self.func.clone())
    }

    fn data_term(&self, x: &DMatrix<f64>) -> f64 {
        0.5 * self
            .observed
            .iter()
            .map(|&(i, j, m)| (x[(i, j)] - m).powi(2))
            .sum::<f64>()
    }

    fn check_shape(&self, x: &DenseMatrix) -> Result<()> {
        if x.rows() != self.rows || x.cols() != self.cols {
            return Err(Error::Dimension(format!(
                "expected a {}x{} iterate, got {}x{}",
                self.rows,
                self.cols,
                x.rows(),
                x.cols()
            )));
        }
        Ok(())
    }
}

/// `½ Σ_Ω (X_ij − M_ij)² + λ·f(‖X‖_*)`.
pub fn objective(problem: &CompletionProblem, x: &DenseMatrix) -> Result<f64> {
    problem.check_shape(x)?;
    let m = x.as_nalgebra();
    Ok(problem.data_term(m) + problem.lambda * problem.func.value(nuclear_norm(m)?))
}

#[derive(Debug, Clone)]
pub struct SolveReport {
    pub x: DenseMatrix,
    /// Objective after each iteration.
    pub objective_trace: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// `‖X_k − X_{k−1}‖_F / max(1, ‖X_{k−1}‖_F)` at the last iteration.
    pub final_relative_change: f64,
    pub retained_rank: usize,
}

impl SolveReport {
    pub fn final_objective(&self) -> f64 {
        self.objective_trace.last().copied().unwrap_or(f64::NAN)
    }
}

/// One prox evaluation inside a solve, handed to observers.
#[derive(Debug)]
pub struct ProxStep<'a> {
    pub iteration: usize,
    /// Point the prox was applied to, `Z − s·∇g(Z)`.
    pub input: &'a DenseMatrix,
    pub tau: f64,
    pub result: &'a ProxResult,
}

/// Proximal gradient descent. The objective trace is nonincreasing.
///
/// Stops when `|F_k − F_{k−1}| ≤ tol·max(1, |F_{k−1}|)`, when the iterate
/// stops moving (relative change ≤ [`FIXED_POINT_TOL`]), or after
/// `max_iters` iterations with `converged = false`.
pub fn solve_pgd(problem: &CompletionProblem, max_iters: usize, tol: f64) -> Result<SolveReport> {
    solve_pgd_observed(problem, max_iters, tol, |_| {})
}

pub fn solve_pgd_observed(
    problem: &CompletionProblem,
    max_iters: usize,
    tol: f64,
    observer: impl FnMut(&ProxStep<'_>),
) -> Result<SolveReport> {
    run(problem, max_iters, tol, false, observer)
}

/// Accelerated proximal gradient with the standard `θ_{k+1} = (1 + √(1 + 4θ_k²))/2`
/// momentum schedule and no restarts. The first step is identical to
/// [`solve_pgd`]; later objective values may go up.
pub fn solve_accelerated(problem: &CompletionProblem, max_iters: usize, tol: f64) -> Result<SolveReport> {
    solve_accelerated_observed(problem, max_iters, tol, |_| {})
}

pub fn solve_accelerated_observed(
    problem: &CompletionProblem,
    max_iters: usize,
    tol: f64,
    observer: impl FnMut(&ProxStep<'_>),
) -> Result<SolveReport> {
    run(problem, max_iters, tol, true, observer)
}

fn run(
    problem: &CompletionProblem,
    max_iters: usize,
    tol: f64,
    accelerated: bool,
    mut observer: impl FnMut(&ProxStep<'_>),
) -> Result<SolveReport> {
    if max_iters == 0 {
        return Err(Error::InvalidArgument("max_iters must be at least 1".into()));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")));
    }
    let tau = problem.lambda * STEP;
    let mut x = DMatrix::zeros(problem.rows, problem.cols);
    let mut z = x.clone();
    let mut theta = 1.0_f64;
    let mut previous = problem.data_term(&x) + problem.lambda * problem.func.value(0.0);

    let mut trace = Vec::new();
    let mut converged = false;
    let mut relative_change = f64::INFINITY;
    let mut retained_rank = 0;

    for iteration in 1..=max_iters {
        let mut point = z.clone();
        for &(i, j, m) in &problem.observed {
            point[(i, j)] -= STEP * (z[(i, j)] - m);
        }
        let input = DenseMatrix::from_nalgebra(point)?;
        let prox = generalized_svt(&input, &problem.func, tau)?;
        observer(&ProxStep { iteration, input: &input, tau, result: &prox });

        let next = prox.x_hat.as_nalgebra().clone();
        let current = problem.data_term(&next) + problem.lambda * problem.func.value(prox.nuclear_norm);
        relative_change = (&next - &x).norm() / x.norm().max(1.0);
        retained_rank = prox.retained_rank;
        trace.push(current);

        if accelerated {
            let theta_next = 0.5 * (1.0 + (1.0 + 4.0 * theta * theta).sqrt());
            z = &next + (&next - &x) * ((theta - 1.0) / theta_next);
            theta = theta_next;
        } else {
            z = next.clone();
        }
        x = next;

        log::debug!("iteration {iteration}: objective {current:.12e}, change {relative_change:.3e}");
        if (current - previous).abs() <= tol * previous.abs().max(1.0) || relative_change <= FIXED_POINT_TOL {
            converged = true;
            break;
        }
        previous = current;
    }

    let iterations = trace.len();
    log::info!(
        "{} finished after {iterations} iterations (converged: {converged})",
        if accelerated { "accelerated" } else { "pgd" }
    );
    Ok(SolveReport {
        x: DenseMatrix::from_nalgebra(x)?,
        objective_trace: trace,
        iterations,
        converged,
        final_relative_change: relative_change,
        retained_rank,
    })
}
