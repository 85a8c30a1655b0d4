//! Wasserstein gradient flows of distance-kernel MMD functionals on the real
//! line, simulated through the quantile functions of the evolving measures.
//!
//! A probability measure on `R` is represented by its quantile function
//! `Q(s)`, `s in (0, 1)`, sampled on a cell-centered grid. In this
//! representation the 2-Wasserstein distance is the `L2(0,1)` distance and the
//! MMD functionals with kernel `±|x - y|` become (non)convex functionals on the
//! cone of nondecreasing functions. The flows are computed with minimizing
//! movements:
//!
//! * [`flow::run_flow`] for the attractive (negative) kernel, optionally with
//!   the target-shifted Sobolev regularizer, one proximal step at a time
//!   ([`numerics::solve_prox_subproblem`]);
//! * [`flow::run_flow_positive`] for the repulsive (positive) kernel via a
//!   generalized minimizing movement step ([`flow::gmm_step`]).
//!
//! [`oracles`] holds closed-form and brute-force references used to check the
//! solvers, and [`io`] reads configurations and writes trajectory data.

pub mod error;
pub mod flow;
pub mod functionals;
pub mod io;
pub mod measure;
pub mod numerics;
pub mod oracles;

pub use error::{Error, Result};
pub use flow::{FlowConfig, KernelSign, SolverOptions, Trajectory};
pub use functionals::ObjectiveParams;
pub use measure::{DensityProfile, Grid, MeasureSpec, QuantileVector, TargetMeasure};

/// Absolute slack used for membership in the cone of nondecreasing vectors.
pub const TOL_MONO: f64 = 1e-10;
