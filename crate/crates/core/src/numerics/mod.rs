//! Numerical kernels shared by the flow drivers.

mod isotonic;
mod prox;
mod resolvent;
mod tridiag;

pub use isotonic::project_isotonic;
pub use prox::{
    inclusion_residual, solve_prox_subproblem, solve_prox_subproblem_in_cone, ProxReport,
    SolverOptions,
};
pub use resolvent::scalar_resolvent;
pub use tridiag::{neumann_laplacian, neumann_tridiag_solve, TridiagSystem};

pub(crate) use tridiag::solve_in_place;
