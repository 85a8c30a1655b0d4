//! The MMD functional in quantile form, its Sobolev regularizers and
//! subgradients.
//!
//! All integrals over `(0, 1)` use the midpoint rule on the grid of the
//! argument; the inner integral `int |x - Q_nu(t)| dt` is evaluated exactly by
//! [`TargetMeasure::expected_distance`]. With this choice the discrete
//! subgradient of [`eval_f_nu`] is exactly `2 R_nu(u_i) - 2 s_i`.

use serde::{Deserialize, Serialize};

use crate::measure::{h1_energy, Grid, QuantileVector, TargetMeasure};
use crate::{Error, Result};

/// Sign of the distance kernel `K(x, y) = ±|x - y|`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum KernelSign {
    /// `K = -|x - y|`: attraction to the target, convex objective.
    #[default]
    Negative,
    /// `K = +|x - y|`: repulsion from the target, nonconvex objective.
    Positive,
}

/// Which point of the interval `[R^-(x), R^+(x)]` a subgradient uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Selection {
    Lower,
    Upper,
    #[default]
    Midpoint,
}

impl Selection {
    pub fn pick(self, target: &TargetMeasure, x: f64) -> f64 {
        match self {
            Selection::Lower => target.cdf_minus(x),
            Selection::Upper => target.cdf_plus(x),
            Selection::Midpoint => 0.5 * (target.cdf_minus(x) + target.cdf_plus(x)),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ObjectiveParams {
    pub lambda: f64,
    pub kernel: KernelSign,
    pub target: TargetMeasure,
}

impl ObjectiveParams {
    /// `lambda = 0` is accepted and switches the Sobolev term off.
    pub fn new(lambda: f64, kernel: KernelSign, target: TargetMeasure) -> Result<Self> {
        if !(lambda.is_finite() && lambda >= 0.0) {
            return Err(Error::param("lambda", "must be finite and nonnegative"));
        }
        Ok(Self {
            lambda,
            kernel,
            target,
        })
    }
}

pub(crate) fn eval_f_nu_with(u: &[f64], target: &TargetMeasure, q: &[f64], grid: Grid) -> f64 {
    let h = grid.spacing();
    let sum: f64 = u
        .iter()
        .zip(q)
        .enumerate()
        .map(|(i, (&ui, &qi))| (1.0 - 2.0 * grid.node(i)) * (ui - qi) + target.expected_distance(ui))
        .sum();
    h * sum
}

/// `F_nu(u) = int (1 - 2s)(u(s) - Q_nu(s)) + int |u(s) - Q_nu(t)| dt ds`.
pub fn eval_f_nu(u: &QuantileVector, target: &TargetMeasure) -> f64 {
    let q = target.sample(&u.grid());
    eval_f_nu_with(u.values(), target, q.values(), u.grid())
}

/// Subgradient `2 R_sel(u_i) - 2 s_i` of [`eval_f_nu`].
pub fn subgrad_f_nu(u: &QuantileVector, target: &TargetMeasure, selection: Selection) -> QuantileVector {
    let grid = u.grid();
    let values = u
        .values()
        .iter()
        .enumerate()
        .map(|(i, &x)| 2.0 * selection.pick(target, x) - 2.0 * grid.node(i))
        .collect();
    QuantileVector::from_raw(grid, values)
}

/// `(lambda / 2) |u - shift|_{H1}^2`, the shift defaulting to zero.
pub fn eval_f_h(u: &QuantileVector, lambda: f64, shift: Option<&QuantileVector>) -> Result<f64> {
    let e = match shift {
        Some(q) => h1_energy(&u.sub(q)?),
        None => h1_energy(u),
    };
    Ok(0.5 * lambda * e)
}

/// Regularized objective: `+inf` off the monotone cone, otherwise
/// `F_nu + F_{H,nu}` (negative kernel) or `-F_nu + F_H` (positive kernel).
pub fn eval_regularized(u: &QuantileVector, p: &ObjectiveParams) -> f64 {
    if !u.is_monotone() {
        return f64::INFINITY;
    }
    let grid = u.grid();
    let q = p.target.sample(&grid);
    let f = eval_f_nu_with(u.values(), &p.target, q.values(), grid);
    match p.kernel {
        KernelSign::Negative => {
            let reg = if p.lambda > 0.0 {
                eval_f_h(u, p.lambda, Some(&q)).expect("same grid")
            } else {
                0.0
            };
            f + reg
        }
        KernelSign::Positive => -f + eval_f_h(u, p.lambda, None).expect("no shift"),
    }
}

/// Squared MMD for the negative distance kernel,
/// `F_nu(u) - F_nu(Q_nu)`.
pub fn mmd_squared(u: &QuantileVector, target: &TargetMeasure) -> f64 {
    let grid = u.grid();
    let q = target.sample(&grid);
    eval_f_nu_with(u.values(), target, q.values(), grid)
        - eval_f_nu_with(q.values(), target, q.values(), grid)
}

/// Result of sampling `s -> 2s - lambda Q_nu''(s)` on a grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum FlowCondition {
    /// Nondecreasing; `worst_drop` is the largest (tolerated) decrease.
    Holds { worst_drop: f64 },
    Violated { worst_drop: f64, at: f64 },
    /// The target has no pointwise second quantile derivative.
    Unknown,
}

impl FlowCondition {
    pub fn holds(&self) -> bool {
        matches!(self, FlowCondition::Holds { .. })
    }
}

/// Checks that `2 s_i - lambda Q_nu''(s_i)` is nondecreasing across the grid
/// within `1e-12`.
pub fn check_flow_condition(target: &TargetMeasure, lambda: f64, grid: &Grid) -> FlowCondition {
    let mut vals = Vec::with_capacity(grid.len());
    for s in grid.nodes() {
        match target.quantile_second_derivative(s) {
            Some(d2) => vals.push(2.0 * s - lambda * d2),
            None => return FlowCondition::Unknown,
        }
    }
    let (i, drop) = vals
        .windows(2)
        .enumerate()
        .map(|(i, w)| (i, w[0] - w[1]))
        .fold((0, f64::NEG_INFINITY), |a, b| if b.1 > a.1 { b } else { a });
    if drop <= 1e-12 {
        FlowCondition::Holds {
            worst_drop: drop.max(0.0),
        }
    } else {
        FlowCondition::Violated {
            worst_drop: drop,
            at: grid.node(i),
        }
    }
}
