//! Closed-form and brute-force references.
//!
//! The Fourier series below is the exact solution of the heat problem
//! `u_t = lambda u_ss + 2s`, `u_s(t, 0) = u_s(t, 1) = 0`, `u(0, s) = -1`,
//! which the regularized Dirac-to-Dirac flow follows until it first touches
//! the target at `t*`.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::flow::{run_flow, FlowConfig, Trajectory};
use crate::measure::wasserstein2;
use crate::{Error, Result};

/// Truncated cosine series for the heat phase.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FourierParams {
    pub lambda: f64,
    /// Largest frequency kept; only odd frequencies contribute.
    pub n_max: usize,
}

impl FourierParams {
    /// Picks the smallest odd `n_max` whose tail bound is below `1e-10`.
    pub fn new(lambda: f64) -> Result<Self> {
        Self::with_tail(lambda, 1e-10)
    }

    pub fn with_tail(lambda: f64, tail: f64) -> Result<Self> {
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(Error::param("lambda", "must be positive"));
        }
        if !(tail > 0.0) {
            return Err(Error::param("tail", "must be positive"));
        }
        // 8 / (lambda pi^4 6 (N - 1)^3) < tail
        let k = (8.0 / (lambda * PI.powi(4) * 6.0 * tail)).cbrt();
        let mut n_max = k.ceil() as usize + 2;
        if n_max.is_multiple_of(2) {
            n_max += 1;
        }
        Ok(Self { lambda, n_max })
    }

    pub fn with_terms(lambda: f64, n_max: usize) -> Result<Self> {
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(Error::param("lambda", "must be positive"));
        }
        if n_max == 0 {
            return Err(Error::param("n_max", "must be at least 1"));
        }
        Ok(Self { lambda, n_max })
    }

    /// Bound on the dropped terms at time `t`, uniform in `s`.
    pub fn tail_bound(&self, t: f64) -> f64 {
        let (sum4, sum2) = if self.n_max < 2 {
            // sums over odd n >= 3
            (PI.powi(4) / 96.0 - 1.0, PI * PI / 8.0 - 1.0)
        } else {
            let n = (self.n_max - 1) as f64;
            (1.0 / (6.0 * n.powi(3)), 1.0 / (2.0 * n))
        };
        let by_size = 8.0 / (self.lambda * PI.powi(4)) * sum4;
        // 1 - exp(-x) <= x
        let by_time = 8.0 * t.max(0.0) / (PI * PI) * sum2;
        by_size.min(by_time)
    }

    fn odd_modes(&self) -> impl Iterator<Item = f64> {
        (1..=self.n_max).step_by(2).map(|n| n as f64 * PI)
    }
}

/// `u(t, s) = (t - 1) - (8 / lambda) sum_{n odd} (n pi)^-4 (1 - e^{-lambda (n pi)^2 t}) cos(n pi s)`.
pub fn heat_fourier(t: f64, s: f64, fp: &FourierParams) -> f64 {
    let lam = fp.lambda;
    let sum: f64 = fp
        .odd_modes()
        .map(|k| -8.0 / k.powi(4) * growth(lam * k * k * t) * (k * s).cos())
        .sum();
    (t - 1.0) + sum / lam
}

/// `1 - exp(-x)` without cancellation for small `x`.
fn growth(x: f64) -> f64 {
    -(-x).exp_m1()
}

/// `du/ds` of [`heat_fourier`].
pub fn heat_fourier_slope(t: f64, s: f64, fp: &FourierParams) -> f64 {
    let lam = fp.lambda;
    let sum: f64 = fp
        .odd_modes()
        .map(|k| 8.0 / k.powi(3) * growth(lam * k * k * t) * (k * s).sin())
        .sum();
    sum / lam
}

/// First time the heat solution reaches `0`, found by bisection on
/// `u(t, 1) = 0` with `|u(t*, 1)| < tol`.
///
/// The maximum over `s` is expected at `s = 1`; this is checked by scanning
/// `s` at the returned time and reported as an error if it fails.
pub fn touch_time(lambda: f64, tol: f64) -> Result<f64> {
    let fp = FourierParams::new(lambda)?;
    if !(tol > 0.0) {
        return Err(Error::param("tol", "must be positive"));
    }
    let u1 = |t: f64| heat_fourier(t, 1.0, &fp);
    let (mut lo, mut hi) = (0.0, 0.5);
    while u1(hi) < 0.0 {
        lo = hi;
        hi *= 2.0;
        if hi > 1e3 {
            return Err(Error::param("lambda", "no contact found"));
        }
    }
    let mut t = 0.5 * (lo + hi);
    for _ in 0..200 {
        t = 0.5 * (lo + hi);
        let u = u1(t);
        if u.abs() < tol || hi - lo < 1e-15 {
            break;
        }
        if u < 0.0 {
            lo = t;
        } else {
            hi = t;
        }
    }
    let peak = u1(t);
    let scan_max = (0..=1000)
        .map(|i| heat_fourier(t, i as f64 / 1000.0, &fp))
        .fold(f64::NEG_INFINITY, f64::max);
    if scan_max > peak + tol + fp.tail_bound(t) {
        return Err(Error::param("lambda", "heat solution does not peak at s = 1"));
    }
    Ok(t)
}

/// Limit flow of a constant quantile `-1` repelled by `delta_0`.
pub fn dirac_away_flow(t: f64) -> f64 {
    -1.0 - t
}

/// `MMD^2` with kernel `-|x - y|` as explicit double sums over weighted atoms
/// `(location, weight)`.
pub fn mmd_squared_bruteforce(mu: &[(f64, f64)], nu: &[(f64, f64)]) -> f64 {
    let cross = |a: &[(f64, f64)], b: &[(f64, f64)]| -> f64 {
        a.iter()
            .flat_map(|&(x, p)| b.iter().map(move |&(y, q)| p * q * (x - y).abs()))
            .sum()
    };
    cross(mu, nu) - 0.5 * cross(mu, mu) - 0.5 * cross(nu, nu)
}

/// One row of [`lambda_convergence_study`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LambdaError {
    pub lambda: f64,
    /// `sup_n |g_lambda(t_n) - g_0(t_n)|_{L2}` over stored states.
    pub sup_error: f64,
}

/// Distance of regularized runs to the unregularized run with the same
/// `tau`, grid and initial state. Runs are independent and execute in
/// parallel.
pub fn lambda_convergence_study(base: &FlowConfig, lambdas: &[f64]) -> Result<Vec<LambdaError>> {
    let runs: Vec<Result<_>> = std::iter::once(0.0)
        .chain(lambdas.iter().copied())
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|lambda| {
            let mut cfg = base.clone();
            cfg.lambda = lambda;
            run_flow(&cfg)
        })
        .collect();
    let mut runs = runs.into_iter();
    let reference = runs.next().expect("reference run")?;
    let runs = runs.collect::<Result<Vec<_>>>()?;
    lambda_convergence_table(&reference, lambdas.iter().copied().zip(&runs))
}

/// Sup over common stored times of the `L2` distance of each run to
/// `reference`.
pub fn lambda_convergence_table<'a>(
    reference: &Trajectory,
    runs: impl IntoIterator<Item = (f64, &'a Trajectory)>,
) -> Result<Vec<LambdaError>> {
    runs.into_iter()
        .map(|(lambda, run)| {
            if run.times != reference.times {
                return Err(Error::param("runs", "trajectories are stored at different times"));
            }
            let mut sup: f64 = 0.0;
            for (a, b) in run.states.iter().zip(&reference.states) {
                sup = sup.max(wasserstein2(a, b)?);
            }
            Ok(LambdaError {
                lambda,
                sup_error: sup,
            })
        })
        .collect()
}
