use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::export::{density_csv, energy_csv, export_trajectory, ExportFormat};
use crate::flow::{run_flow, FlowConfig, InvariantSummary, KernelSign, Trajectory};
use crate::measure::{density_from_quantile, TargetMeasure, DEFAULT_ATOM_TOL, DEFAULT_SLOPE_FLOOR};
use crate::oracles::{heat_fourier, lambda_convergence_table, FourierParams, LambdaError};
use crate::{Error, Result};

/// Comparison against a closed-form solution, when one applies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleCheck {
    pub name: String,
    /// Largest sup-norm deviation over the compared states.
    pub max_error: f64,
    pub tolerance: f64,
    pub compared_states: usize,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InvariantReport {
    pub cone_invariance: bool,
    pub energy_decay: bool,
    #[serde(flatten)]
    pub detail: InvariantSummary,
    pub oracle: Option<OracleCheck>,
}

impl InvariantReport {
    pub fn passed(&self) -> bool {
        self.cone_invariance && self.energy_decay && self.oracle.as_ref().is_none_or(|o| o.passed)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum RunStatus {
    Completed,
    /// A step failed; outputs hold the states before it.
    Failed { step: usize, message: String },
}

/// Record of one run, written as `manifest.json` next to its outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    /// First 12 hex digits of the SHA-256 of the configuration.
    pub run_id: String,
    pub config: FlowConfig,
    pub status: RunStatus,
    pub wall_time_s: f64,
    pub steps: usize,
    /// Output files relative to the run directory (the manifest excluded).
    pub files: Vec<String>,
    pub invariants: InvariantReport,
}

impl RunManifest {
    pub fn succeeded(&self) -> bool {
        self.status == RunStatus::Completed && self.invariants.passed()
    }
}

pub fn run_id(cfg: &FlowConfig) -> Result<String> {
    let digest = Sha256::digest(serde_json::to_vec(cfg)?);
    Ok(digest.iter().take(6).map(|b| format!("{b:02x}")).collect())
}

/// Runs `cfg` and writes its outputs into `out_dir`:
///
/// * `trajectory.csv` (`t,s,g,g_slope`) or `trajectory.json`;
/// * `density_<k>.csv` at `cfg.checkpoints` evenly spaced times;
/// * `energy.csv`;
/// * `manifest.json`.
///
/// `out_dir` is created if needed; if it cannot be a directory the call
/// fails before anything is written. A failing step still produces the
/// outputs of the partial run, with the failure recorded in the manifest.
pub fn run_experiment(cfg: &FlowConfig, out_dir: &Path, format: ExportFormat) -> Result<RunManifest> {
    run_experiment_with_trajectory(cfg, out_dir, format).map(|(m, _)| m)
}

fn check_out_dir(out_dir: &Path) -> Result<()> {
    if out_dir.exists() && !out_dir.is_dir() {
        return Err(Error::config(
            "out",
            format!("{} exists and is not a directory", out_dir.display()),
        ));
    }
    // an ancestor that is a regular file makes creation impossible
    if let Some(blocker) = out_dir.ancestors().skip(1).find(|a| a.is_file()) {
        return Err(Error::config(
            "out",
            format!("{} is a file", blocker.display()),
        ));
    }
    Ok(())
}

fn run_experiment_with_trajectory(
    cfg: &FlowConfig,
    out_dir: &Path,
    format: ExportFormat,
) -> Result<(RunManifest, Trajectory)> {
    check_out_dir(out_dir)?;
    cfg.validate()?;
    let start = Instant::now();
    let (traj, status) = match run_flow(cfg) {
        Ok(t) => (t, RunStatus::Completed),
        Err(Error::StepFailed { step, source, partial }) => (
            *partial,
            RunStatus::Failed {
                step,
                message: source.to_string(),
            },
        ),
        Err(e) => return Err(e),
    };
    let wall_time_s = start.elapsed().as_secs_f64();

    let mut files: Vec<(String, String)> = Vec::new();
    let name = format!("trajectory.{}", format.extension());
    files.push((name, export_trajectory(&traj, Some(cfg), format)?));
    for (k, idx) in traj.checkpoint_indices(cfg.checkpoints).into_iter().enumerate() {
        let profile = density_from_quantile(
            &traj.states[idx],
            &traj.slopes[idx],
            DEFAULT_ATOM_TOL,
            single_atom(&cfg.target),
            DEFAULT_SLOPE_FLOOR,
        )?;
        files.push((format!("density_{k}.csv"), density_csv(traj.times[idx], &profile)));
    }
    files.push(("energy.csv".into(), energy_csv(&traj)));

    let detail = traj.summary(cfg.solver.tol);
    let manifest = RunManifest {
        run_id: run_id(cfg)?,
        config: cfg.clone(),
        status,
        wall_time_s,
        steps: traj.steps(),
        files: files.iter().map(|(n, _)| n.clone()).collect(),
        invariants: InvariantReport {
            cone_invariance: detail.cone_ok,
            energy_decay: detail.energy_ok,
            detail,
            oracle: oracle_check(cfg, &traj)?,
        },
    };

    fs::create_dir_all(out_dir)?;
    for (name, body) in &files {
        fs::write(out_dir.join(name), body)?;
    }
    fs::write(
        out_dir.join("manifest.json"),
        serde_json::to_string_pretty(&manifest)?,
    )?;
    Ok((manifest, traj))
}

fn single_atom(target: &TargetMeasure) -> Option<f64> {
    match target.atoms().as_slice() {
        [a] => Some(*a),
        _ => None,
    }
}

fn constant_value(cfg: &FlowConfig) -> Option<f64> {
    let v = cfg.initial.values();
    v.iter().all(|&x| x == v[0]).then_some(v[0])
}

/// Closed forms for a constant initial quantile below a Dirac target: the
/// repulsive flow moves it down at unit speed, the regularized attractive
/// flow follows the heat solution until first contact.
pub fn oracle_check(cfg: &FlowConfig, traj: &Trajectory) -> Result<Option<OracleCheck>> {
    let (Some(anchor), Some(c)) = (single_atom(&cfg.target), constant_value(cfg)) else {
        return Ok(None);
    };
    if matches!(cfg.target, TargetMeasure::Empirical(_)) || c >= anchor {
        return Ok(None);
    }
    let mut max_error: f64 = 0.0;
    let mut compared = 0;
    let (name, tolerance) = match (cfg.kernel, cfg.lambda > 0.0) {
        (KernelSign::Positive, _) => {
            for (t, g) in traj.times.iter().zip(&traj.states) {
                let exact = c - t;
                max_error = g.values().iter().fold(max_error, |m, v| m.max((v - exact).abs()));
                compared += 1;
            }
            ("constant_speed", 2.0 * cfg.tau)
        }
        (KernelSign::Negative, true) => {
            let fp = FourierParams::new(cfg.lambda)?;
            // the series starts at -1 with the target at 0; shift to (c, anchor)
            let shift = c - anchor + 1.0;
            for (t, g) in traj.times.iter().zip(&traj.states) {
                let u = |s: f64| heat_fourier(*t, s, &fp) + shift + anchor;
                if u(1.0) >= anchor {
                    break;
                }
                let err = g
                    .grid()
                    .nodes()
                    .zip(g.values())
                    .map(|(s, v)| (v - u(s)).abs())
                    .fold(0.0, f64::max);
                max_error = max_error.max(err);
                compared += 1;
            }
            ("heat_phase", 5e-3)
        }
        (KernelSign::Negative, false) => return Ok(None),
    };
    Ok(Some(OracleCheck {
        name: name.into(),
        max_error,
        tolerance,
        compared_states: compared,
        passed: max_error <= tolerance,
    }))
}

/// Result of [`run_sweep`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub runs: Vec<RunManifest>,
    /// Distance of each regularized run to the `lambda = 0` run.
    pub lambda_errors: Vec<LambdaError>,
}

/// Runs `base` for `lambda = 0` and every value in `lambdas`, each into
/// `out_dir/lambda_<value>`, on at most `max_threads` threads, and writes
/// `lambda_errors.csv` (`lambda,sup_error`).
pub fn run_sweep(
    base: &FlowConfig,
    lambdas: &[f64],
    out_dir: &Path,
    format: ExportFormat,
    max_threads: Option<usize>,
) -> Result<SweepReport> {
    check_out_dir(out_dir)?;
    let mut all = vec![0.0];
    all.extend_from_slice(lambdas);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(max_threads.unwrap_or(0))
        .build()
        .map_err(|e| Error::config("threads", e.to_string()))?;
    let results: Vec<Result<(RunManifest, Trajectory)>> = pool.install(|| {
        all.par_iter()
            .map(|&lambda| {
                let mut cfg = base.clone();
                cfg.lambda = lambda;
                let dir: PathBuf = out_dir.join(format!("lambda_{lambda:e}"));
                run_experiment_with_trajectory(&cfg, &dir, format)
            })
            .collect()
    });
    let mut runs = Vec::new();
    let mut trajs = Vec::new();
    for r in results {
        let (m, t) = r?;
        runs.push(m);
        trajs.push(t);
    }
    let lambda_errors = lambda_convergence_table(&trajs[0], lambdas.iter().copied().zip(&trajs[1..]))?;
    let mut csv = String::from("lambda,sup_error\n");
    for row in &lambda_errors {
        csv.push_str(&format!("{},{}\n", row.lambda, row.sup_error));
    }
    fs::write(out_dir.join("lambda_errors.csv"), csv)?;
    Ok(SweepReport { runs, lambda_errors })
}
