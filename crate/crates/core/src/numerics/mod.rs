//! Numerical kernels shared by every other module.

mod fit;
mod linalg;
mod newton;
mod quadrature;
mod tridiag;

pub use fit::{fit_affine, AffineFit};
pub use linalg::{jacobi_eigen, Cholesky, DenseMatrix, Eigen, LuFactors, SymmetricMatrix};
pub use newton::{
    damped_newton, dense_solver, fd_jacobian, LinearSolve, NewtonOptions, NewtonOutcome,
};
pub use quadrature::{
    beta, gamma, gauss_jacobi_symmetric, gauss_legendre, radial_integral, sphere_area,
    QuadratureRule,
};
pub use tridiag::{tridiag_generalized_eigen, TridiagonalLu, TridiagonalPencil};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NumericsError {
    #[error("integrand is not finite at r = {0}")]
    NonFinite(f64),
    #[error("Jacobi sweeps did not converge after {0} sweeps")]
    JacobiNoConvergence(usize),
    #[error("requested {requested} eigenpairs from a pencil of order {order}")]
    CountExceedsOrder { requested: usize, order: usize },
    #[error("inverse iteration stagnated for eigenvalue {0}")]
    InverseIterationStagnation(f64),
    #[error("Newton iteration exceeded {maxit} steps (residual {residual:e})")]
    NewtonMaxIterations { maxit: usize, residual: f64 },
    #[error("Newton line search failed to reduce the residual {0:e}")]
    NewtonLineSearch(f64),
    #[error("singular Jacobian (condition estimate {0:e})")]
    SingularJacobian(f64),
    #[error("matrix is not positive definite (pivot {pivot} = {value:e})")]
    NotPositiveDefinite { pivot: usize, value: f64 },
    #[error("degenerate abscissae: need at least two distinct values")]
    DegenerateFit,
    #[error("invalid pencil: {0}")]
    InvalidPencil(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
}

/// Threshold under which an eigenvalue of `m` is treated as zero.
pub fn zero_threshold(frobenius_norm: f64) -> f64 {
    1e-9 * frobenius_norm.max(1.0)
}
