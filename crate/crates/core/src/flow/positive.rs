use serde::{Deserialize, Serialize};

use super::{drive, FlowConfig, SolverOptions, Trajectory};
use crate::functionals::{eval_regularized, KernelSign, ObjectiveParams, Selection};
use crate::measure::{max_abs_diff, QuantileVector};
use crate::numerics::{project_isotonic, solve_in_place};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GmmReport {
    pub outer_iterations: usize,
    pub inner_iterations: usize,
    pub objective_start: f64,
    pub objective_end: f64,
}

/// Step objective `-F_nu(v) + F_H(v) + |v - g_n|^2 / (2 tau)`, infinite off
/// the cone.
pub fn gmm_step_objective(v: &QuantileVector, g_n: &QuantileVector, tau: f64, p: &ObjectiveParams) -> Result<f64> {
    let d = v.sub(g_n)?.l2_norm();
    Ok(eval_regularized(v, p) + d * d / (2.0 * tau))
}

/// One minimizing-movement step for the repulsive kernel.
///
/// The concave part `-int int |v(s) - Q_nu(t)|` is replaced by its tangent at
/// the current iterate (a majorant), leaving a convex problem: a Sobolev
/// quadratic with a linear term over the monotone cone. That problem is
/// solved by Douglas-Rachford between the quadratic (one tridiagonal solve)
/// and the cone (isotonic projection). Repeating from the new iterate never
/// increases the step objective; a backtracking safeguard enforces this
/// against rounding. Stops once successive outer iterates agree to `opts.tol`.
pub fn gmm_step(
    g_n: &QuantileVector,
    tau: f64,
    p: &ObjectiveParams,
    opts: &SolverOptions,
) -> Result<(QuantileVector, GmmReport)> {
    if p.kernel != KernelSign::Positive {
        return Err(Error::param("kernel", "GMM step needs the positive kernel"));
    }
    if !(tau.is_finite() && tau > 0.0) {
        return Err(Error::param("tau", "must be positive"));
    }
    opts.validate()?;
    g_n.ensure_monotone()?;

    let grid = g_n.grid();
    let nodes = grid.node_vec();
    let j0 = gmm_step_objective(g_n, g_n, tau, p)?;
    let mut v = g_n.clone();
    let mut j = j0;
    let mut inner_total = 0;
    for outer in 1..=opts.max_iter {
        let c: Vec<f64> = v
            .values()
            .iter()
            .zip(&nodes)
            .map(|(&x, s)| 2.0 * s - 2.0 * Selection::Midpoint.pick(&p.target, x))
            .collect();
        let (cand, inner) = convex_subproblem(g_n.values(), &c, tau, p.lambda, grid.spacing(), opts)?;
        inner_total += inner;
        let mut next = QuantileVector::from_raw(grid, cand);
        let mut j_next = gmm_step_objective(&next, g_n, tau, p)?;
        let slack = 1e-14 * (1.0 + j.abs());
        let mut theta = 1.0;
        while j_next > j + slack && theta > 1e-8 {
            theta *= 0.5;
            next = blend(&v, &next, 0.5);
            j_next = gmm_step_objective(&next, g_n, tau, p)?;
        }
        if j_next > j + slack {
            // no descent along the majorizer direction: v is stationary
            next = v.clone();
            j_next = j;
        }
        let moved = max_abs_diff(next.values(), v.values());
        v = next;
        j = j_next;
        if moved < opts.tol {
            return Ok((
                v,
                GmmReport {
                    outer_iterations: outer,
                    inner_iterations: inner_total,
                    objective_start: j0,
                    objective_end: j,
                },
            ));
        }
    }
    Err(Error::NotConverged {
        iterations: opts.max_iter,
        residual: f64::NAN,
    })
}

fn blend(a: &QuantileVector, b: &QuantileVector, t: f64) -> QuantileVector {
    let values = a
        .values()
        .iter()
        .zip(b.values())
        .map(|(x, y)| x + t * (y - x))
        .collect();
    QuantileVector::from_raw(a.grid(), values)
}

/// `argmin_{v in C} |v - g|^2 / 2 + tau lambda/2 |Dv / h|^2 + tau <c, v>`.
fn convex_subproblem(
    g: &[f64],
    c: &[f64],
    tau: f64,
    lambda: f64,
    h: f64,
    opts: &SolverOptions,
) -> Result<(Vec<f64>, usize)> {
    let shifted: Vec<f64> = g.iter().zip(c).map(|(gi, ci)| gi - tau * ci).collect();
    if lambda == 0.0 {
        return Ok((project_isotonic(&shifted), 0));
    }
    let m = g.len();
    let gamma = opts.penalty;
    let coupling = gamma * tau * lambda / ((1.0 + gamma) * h * h);
    let mut z = g.to_vec();
    let mut x = vec![0.0; m];
    let mut x_prev = g.to_vec();
    let mut scratch = vec![0.0; m];
    let mut reflected = vec![0.0; m];
    for iter in 1..=opts.max_iter {
        for i in 0..m {
            x[i] = (gamma * shifted[i] + z[i]) / (1.0 + gamma);
        }
        solve_in_place(coupling, &mut x, &mut scratch);
        for i in 0..m {
            reflected[i] = 2.0 * x[i] - z[i];
        }
        let y = project_isotonic(&reflected);
        let mut gap: f64 = 0.0;
        for i in 0..m {
            let d = y[i] - x[i];
            gap = gap.max(d.abs());
            z[i] += opts.relaxation * d;
        }
        let step = max_abs_diff(&x, &x_prev);
        std::mem::swap(&mut x, &mut x_prev);
        if step < opts.tol && gap < opts.tol {
            return Ok((y, iter));
        }
    }
    Err(Error::NotConverged {
        iterations: opts.max_iter,
        residual: f64::NAN,
    })
}

/// Runs the repulsive flow by repeated [`gmm_step`]s.
pub fn run_flow_positive(cfg: &FlowConfig) -> Result<Trajectory> {
    if cfg.kernel != KernelSign::Positive {
        return Err(Error::param("kernel", "expected the positive kernel"));
    }
    let p = cfg.objective();
    // the cone constraint is part of every GMM step, so nothing counts as projected
    drive(cfg, cfg.flow_condition(), |_, g| {
        gmm_step(g, cfg.tau, &p, &cfg.solver).map(|(v, _)| (v, false))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::{Grid, TargetMeasure};

    fn params(lambda: f64) -> ObjectiveParams {
        ObjectiveParams::new(lambda, KernelSign::Positive, TargetMeasure::dirac(0.0).unwrap()).unwrap()
    }

    #[test]
    fn constant_states_move_away_at_unit_speed() {
        let grid = Grid::new(50).unwrap();
        let tau = 1e-2;
        let opts = SolverOptions::default();
        for lambda in [0.0, 1e-2, 1.0] {
            let p = params(lambda);
            let (v, rep) = gmm_step(&QuantileVector::constant(grid, -1.0), tau, &p, &opts).unwrap();
            assert!(v.values().iter().all(|x| (x + 1.0 + tau).abs() < 1e-10), "{lambda}");
            assert!(rep.objective_end <= rep.objective_start);
            let (v, _) = gmm_step(&QuantileVector::constant(grid, 1.0), tau, &p, &opts).unwrap();
            assert!(v.values().iter().all(|x| (x - 1.0 - tau).abs() < 1e-10));
        }
    }

    #[test]
    fn descends_from_spread_state() {
        let grid = Grid::new(40).unwrap();
        let g = QuantileVector::from_fn(grid, |s| 2.0 * s - 1.0);
        let p = params(1e-2);
        let (v, rep) = gmm_step(&g, 1e-2, &p, &SolverOptions::default()).unwrap();
        assert!(v.is_monotone());
        assert!(rep.objective_end <= rep.objective_start + 1e-14);
    }

    #[test]
    fn run_matches_closed_form() {
        let grid = Grid::new(20).unwrap();
        let cfg = FlowConfig::new(
            TargetMeasure::dirac(0.0).unwrap(),
            QuantileVector::constant(grid, -1.0),
            1e-2,
            1e-2,
            0.5,
        )
        .unwrap()
        .with_kernel(KernelSign::Positive);
        let traj = run_flow_positive(&cfg).unwrap();
        for (t, g) in traj.times.iter().zip(&traj.states) {
            assert!(g.values().iter().all(|x| (x + 1.0 + t).abs() < 1e-9));
        }
        assert!(traj.energies.windows(2).all(|e| e[1] <= e[0]));
    }
}
