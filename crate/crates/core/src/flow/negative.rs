use super::{drive, FlowConfig, Trajectory};
use crate::functionals::{FlowCondition, KernelSign};
use crate::measure::{QuantileVector, TargetMeasure};
use crate::numerics::{scalar_resolvent, solve_prox_subproblem, solve_prox_subproblem_in_cone};
use crate::{Error, Result, TOL_MONO};

/// One implicit Euler step of the regularized flow (`lambda > 0`).
///
/// When the flow condition holds the unconstrained proximal problem is solved
/// and its output must already be monotone; otherwise the cone constraint is
/// enforced inside the solver.
pub fn euler_step_regularized(g_n: &QuantileVector, cfg: &FlowConfig) -> Result<QuantileVector> {
    step_regularized(g_n, cfg, cfg.flow_condition().holds()).map(|(g, _)| g)
}

fn step_regularized(
    g_n: &QuantileVector,
    cfg: &FlowConfig,
    condition_holds: bool,
) -> Result<(QuantileVector, bool)> {
    if cfg.lambda <= 0.0 {
        return Err(Error::param("lambda", "regularized step needs lambda > 0"));
    }
    let p = cfg.objective();
    if condition_holds {
        let (v, _) = solve_prox_subproblem(g_n, cfg.tau, &p, &cfg.solver)?;
        Ok((v, false))
    } else {
        let (v, rep) = solve_prox_subproblem_in_cone(g_n, cfg.tau, &p, &cfg.solver)?;
        Ok((v, rep.projected))
    }
}

/// One implicit Euler step with `lambda = 0`, solved exactly per component.
pub fn euler_step_unregularized(g_n: &QuantileVector, tau: f64, target: &TargetMeasure) -> QuantileVector {
    let grid = g_n.grid();
    let w = 2.0 * tau;
    let values = g_n
        .values()
        .iter()
        .zip(grid.nodes())
        .map(|(&g, s)| scalar_resolvent(g + w * s, w, target))
        .collect();
    QuantileVector::from_raw(grid, values)
}

/// Runs the flow described by `cfg` for `floor(T / tau)` steps.
///
/// The positive kernel is forwarded to [`super::run_flow_positive`]. On a
/// failing step the error is [`Error::StepFailed`] carrying the states
/// computed so far.
pub fn run_flow(cfg: &FlowConfig) -> Result<Trajectory> {
    if cfg.kernel == KernelSign::Positive {
        return super::run_flow_positive(cfg);
    }
    if cfg.lambda == 0.0 {
        // the componentwise resolvent preserves order, so no condition is needed
        return drive(cfg, FlowCondition::Holds { worst_drop: 0.0 }, |_, g| {
            Ok((euler_step_unregularized(g, cfg.tau, &cfg.target), false))
        });
    }
    let condition = cfg.flow_condition();
    let holds = condition.holds();
    drive(cfg, condition, |n, g| {
        let (v, projected) = step_regularized(g, cfg, holds)?;
        if holds {
            let (_, drop) = v.worst_drop();
            if drop > TOL_MONO {
                return Err(Error::ConeViolation { step: n, drop });
            }
        }
        Ok((v, projected))
    })
}

/// Estimates the right free boundary: the smallest node `s_i` such that
/// `|g_j - anchor| < tol` for every `j >= i`, or `1` without contact.
pub fn detect_free_boundary(g: &QuantileVector, anchor: f64, tol: f64) -> f64 {
    let values = g.values();
    let tail = values
        .iter()
        .rev()
        .take_while(|v| (*v - anchor).abs() < tol)
        .count();
    if tail == 0 {
        1.0
    } else {
        g.grid().node(values.len() - tail)
    }
}
