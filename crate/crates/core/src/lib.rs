//! Proximal operators for `τ·f(‖X‖_*)`, where `f` is convex and
//! nondecreasing with `0 ≤ f'(0) ≤ 1`, computed by generalized singular
//! value thresholding, plus the certificates, oracles and first-order
//! solvers that build on them.
//!
//! ```
//! use svtprox::{generalized_svt, make_builtin, DenseMatrix};
//!
//! let y = DenseMatrix::from_diagonal(&[3.0, 1.0]).unwrap();
//! let prox = generalized_svt(&y, &make_builtin("linear").unwrap(), 0.5).unwrap();
//! assert_eq!(prox.threshold.j_star, 2);
//! assert!((prox.x_hat.get(0, 0) - 2.5).abs() < 1e-12);
//! ```

pub mod error;
pub mod functions;
pub mod io;
pub mod linalg;
pub mod oracle;
pub mod solvers;
pub mod spectrum;
pub mod synthetic;
pub mod verify;

pub use error::{Error, Result};
pub use functions::{make_builtin, validate, SpectralFunction, ValidationReport, BUILTIN_SPECS};
pub use io::Observation;
pub use linalg::{
    certify_optimality, generalized_svt, soft_threshold_matrix, thin_svd, CertificateReport, DenseMatrix, ProxResult,
    ThinSvd,
};
pub use oracle::{matrix_prox_oracle, spectral_prox_oracle, OracleSolution};
pub use solvers::{objective, solve_accelerated, solve_pgd, CompletionProblem, SolveReport};
pub use spectrum::{find_threshold, linear_scan_threshold, shrink, SingularSpectrum, ThresholdResult};
pub use verify::{run_suite, VerifySummary};
