//! Minimizing-movement drivers for the quantile flows.

mod negative;
mod positive;

use serde::{Deserialize, Serialize};

pub use crate::functionals::KernelSign;
pub use crate::numerics::SolverOptions;
pub use negative::{
    detect_free_boundary, euler_step_regularized, euler_step_unregularized, run_flow,
};
pub use positive::{gmm_step, gmm_step_objective, run_flow_positive, GmmReport};

use crate::functionals::{check_flow_condition, eval_regularized, FlowCondition, ObjectiveParams};
use crate::measure::{Grid, QuantileVector, TargetMeasure};
use crate::{Error, Result, TOL_MONO};

/// Everything needed to run one flow.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlowConfig {
    pub tau: f64,
    pub lambda: f64,
    pub horizon: f64,
    pub target: TargetMeasure,
    /// Initial quantile; its grid is the grid of the whole run.
    pub initial: QuantileVector,
    #[serde(default)]
    pub kernel: KernelSign,
    #[serde(default)]
    pub solver: SolverOptions,
    /// Store every `output_stride`-th state (the last state is always kept).
    #[serde(default = "default_stride")]
    pub output_stride: usize,
    /// Number of evenly spaced checkpoint times used for exported densities.
    #[serde(default = "default_checkpoints")]
    pub checkpoints: usize,
}

fn default_stride() -> usize {
    1
}

fn default_checkpoints() -> usize {
    6
}

impl FlowConfig {
    pub fn new(
        target: TargetMeasure,
        initial: QuantileVector,
        tau: f64,
        lambda: f64,
        horizon: f64,
    ) -> Result<Self> {
        let cfg = Self {
            tau,
            lambda,
            horizon,
            target,
            initial,
            kernel: KernelSign::Negative,
            solver: SolverOptions::default(),
            output_stride: 1,
            checkpoints: 6,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_kernel(mut self, kernel: KernelSign) -> Self {
        self.kernel = kernel;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tau.is_finite() && self.tau > 0.0) {
            return Err(Error::param("tau", "must be positive"));
        }
        if !(self.lambda.is_finite() && self.lambda >= 0.0) {
            return Err(Error::param("lambda", "must be finite and nonnegative"));
        }
        if !(self.horizon.is_finite() && self.horizon >= 0.0) {
            return Err(Error::param("horizon", "must be finite and nonnegative"));
        }
        if self.output_stride == 0 {
            return Err(Error::param("output_stride", "must be at least 1"));
        }
        if self.checkpoints < 2 {
            return Err(Error::param("checkpoints", "need at least 2"));
        }
        self.solver.validate()?;
        self.initial.ensure_monotone()
    }

    pub fn grid(&self) -> Grid {
        self.initial.grid()
    }

    /// Number of steps, `floor(T / tau)` up to rounding of the quotient.
    pub fn steps(&self) -> usize {
        (self.horizon / self.tau + 1e-9).floor() as usize
    }

    pub fn objective(&self) -> ObjectiveParams {
        ObjectiveParams {
            lambda: self.lambda,
            kernel: self.kernel,
            target: self.target.clone(),
        }
    }

    pub fn flow_condition(&self) -> FlowCondition {
        check_flow_condition(&self.target, self.lambda, &self.grid())
    }
}

/// States of a run together with per-step diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    /// Times of the stored states.
    pub times: Vec<f64>,
    pub states: Vec<QuantileVector>,
    /// Finite-difference slopes of each stored state.
    pub slopes: Vec<Vec<f64>>,
    /// Objective value after every step (index 0 is the initial state).
    pub energies: Vec<f64>,
    /// `L2` norm of every step `g_{n+1} - g_n`.
    pub step_norms: Vec<f64>,
    pub tau: f64,
    pub flow_condition: FlowCondition,
    /// Steps whose cone constraint was active.
    pub projected_steps: usize,
}

impl Trajectory {
    fn start(cfg: &FlowConfig, flow_condition: FlowCondition) -> Self {
        let g0 = cfg.initial.clone();
        let p = cfg.objective();
        Self {
            times: vec![0.0],
            slopes: vec![g0.finite_difference_slopes()],
            energies: vec![eval_regularized(&g0, &p)],
            states: vec![g0],
            step_norms: Vec::new(),
            tau: cfg.tau,
            flow_condition,
            projected_steps: 0,
        }
    }

    fn push(&mut self, n: usize, prev: &QuantileVector, next: &QuantileVector, p: &ObjectiveParams, store: bool) {
        self.energies.push(eval_regularized(next, p));
        self.step_norms
            .push(next.sub(prev).expect("same grid").l2_norm());
        if store {
            self.times.push(n as f64 * self.tau);
            self.slopes.push(next.finite_difference_slopes());
            self.states.push(next.clone());
        }
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn last(&self) -> &QuantileVector {
        self.states.last().expect("trajectory holds the initial state")
    }

    pub fn projected(&self) -> bool {
        self.projected_steps > 0
    }

    /// Number of completed steps.
    pub fn steps(&self) -> usize {
        self.step_norms.len()
    }

    /// Largest decrease between neighbouring values over all stored states.
    pub fn worst_cone_drop(&self) -> f64 {
        self.states
            .iter()
            .map(|g| g.worst_drop().1)
            .fold(0.0, f64::max)
    }

    /// Largest `E_{n+1} + |g_{n+1} - g_n|^2 / (2 tau) - E_n` over all steps.
    pub fn worst_dissipation_slack(&self) -> f64 {
        self.energies
            .windows(2)
            .zip(&self.step_norms)
            .map(|(e, d)| e[1] + d * d / (2.0 * self.tau) - e[0])
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Indices of stored states closest to `count` evenly spaced times.
    pub fn checkpoint_indices(&self, count: usize) -> Vec<usize> {
        let t_end = *self.times.last().expect("nonempty");
        let mut out: Vec<usize> = (0..count)
            .map(|k| {
                let t = if count > 1 {
                    t_end * k as f64 / (count - 1) as f64
                } else {
                    t_end
                };
                let j = self.times.partition_point(|&x| x < t);
                if j == 0 {
                    0
                } else if j == self.times.len() || t - self.times[j - 1] <= self.times[j] - t {
                    j - 1
                } else {
                    j
                }
            })
            .collect();
        out.dedup();
        out
    }

    pub fn summary(&self, tol: f64) -> InvariantSummary {
        let worst_drop = self.worst_cone_drop();
        let slack = if self.step_norms.is_empty() {
            0.0
        } else {
            self.worst_dissipation_slack()
        };
        InvariantSummary {
            cone_ok: worst_drop <= TOL_MONO,
            worst_cone_drop: worst_drop,
            energy_ok: slack <= 10.0 * tol,
            worst_dissipation_slack: slack,
            projected_steps: self.projected_steps,
        }
    }
}

/// Pass/fail of the structural invariants of a trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InvariantSummary {
    pub cone_ok: bool,
    pub worst_cone_drop: f64,
    pub energy_ok: bool,
    pub worst_dissipation_slack: f64,
    pub projected_steps: usize,
}

/// Shared time loop: `step(n, g_n)` returns `g_{n+1}` and whether the cone
/// constraint was active.
fn drive(
    cfg: &FlowConfig,
    flow_condition: FlowCondition,
    mut step: impl FnMut(usize, &QuantileVector) -> Result<(QuantileVector, bool)>,
) -> Result<Trajectory> {
    cfg.validate()?;
    let p = cfg.objective();
    let mut traj = Trajectory::start(cfg, flow_condition);
    let steps = cfg.steps();
    let mut g = cfg.initial.clone();
    for n in 1..=steps {
        match step(n, &g) {
            Ok((next, projected)) => {
                if projected {
                    traj.projected_steps += 1;
                }
                let store = n % cfg.output_stride == 0 || n == steps;
                traj.push(n, &g, &next, &p, store);
                g = next;
            }
            Err(source) => {
                return Err(Error::StepFailed {
                    step: n,
                    source: Box::new(source),
                    partial: Box::new(traj),
                })
            }
        }
    }
    Ok(traj)
}
