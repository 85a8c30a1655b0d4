use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::flow::{FlowConfig, Trajectory};
use crate::measure::DensityProfile;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExportFormat {
    #[default]
    CsvLong,
    Json,
}

impl ExportFormat {
    pub fn extension(self) -> &'static str {
        match self {
            ExportFormat::CsvLong => "csv",
            ExportFormat::Json => "json",
        }
    }
}

impl FromStr for ExportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv_long" | "csv" => Ok(ExportFormat::CsvLong),
            "json" => Ok(ExportFormat::Json),
            _ => Err(Error::config("format", format!("unknown format `{s}`"))),
        }
    }
}

/// Long table with one row per stored state and grid node:
/// `t,s,g,g_slope`.
pub fn trajectory_csv(traj: &Trajectory) -> String {
    let mut out = String::from("t,s,g,g_slope\n");
    for ((t, g), slope) in traj.times.iter().zip(&traj.states).zip(&traj.slopes) {
        for ((s, v), d) in g.grid().nodes().zip(g.values()).zip(slope) {
            writeln!(out, "{t},{s},{v},{d}").expect("writing to a String");
        }
    }
    out
}

/// JSON document holding the trajectory and, optionally, the configuration
/// that produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryFile {
    pub config: Option<FlowConfig>,
    pub trajectory: Trajectory,
}

pub fn trajectory_json(traj: &Trajectory, config: Option<&FlowConfig>) -> Result<String> {
    let doc = TrajectoryFile {
        config: config.cloned(),
        trajectory: traj.clone(),
    };
    Ok(serde_json::to_string_pretty(&doc)?)
}

/// Inverse of [`trajectory_json`]; floats round-trip exactly.
pub fn import_trajectory_json(text: &str) -> Result<TrajectoryFile> {
    let doc: TrajectoryFile = serde_json::from_str(text)?;
    let traj = &doc.trajectory;
    let n = traj.states.len();
    if n == 0 || traj.times.len() != n || traj.slopes.len() != n {
        return Err(Error::config(
            "trajectory",
            "times, states and slopes must be nonempty and of equal length",
        ));
    }
    if let Some(bad) = traj
        .states
        .iter()
        .zip(&traj.slopes)
        .position(|(g, d)| g.grid() != traj.states[0].grid() || d.len() != g.len())
    {
        return Err(Error::config("trajectory", format!("state {bad} has a different grid")));
    }
    if traj.energies.len() != traj.step_norms.len() + 1 {
        return Err(Error::config("trajectory", "expected one more energy than step norms"));
    }
    Ok(doc)
}

/// Encodes a trajectory in `format`.
pub fn export_trajectory(traj: &Trajectory, config: Option<&FlowConfig>, format: ExportFormat) -> Result<String> {
    if traj.is_empty() {
        return Err(Error::config("trajectory", "nothing to export"));
    }
    match format {
        ExportFormat::CsvLong => Ok(trajectory_csv(traj)),
        ExportFormat::Json => trajectory_json(traj, config),
    }
}

/// `t,kind,x,value` rows: `density` rows carry `f(x)`, `atom` rows the mass.
pub fn density_csv(t: f64, profile: &DensityProfile) -> String {
    let mut out = String::from("t,kind,x,value\n");
    for a in &profile.atoms {
        writeln!(out, "{t},atom,{},{}", a.location, a.mass).expect("writing to a String");
    }
    for d in &profile.density {
        writeln!(out, "{t},density,{},{}", d.x, d.f).expect("writing to a String");
    }
    out
}

/// `step,t,energy,step_norm`; the first row is the initial state.
pub fn energy_csv(traj: &Trajectory) -> String {
    let mut out = String::from("step,t,energy,step_norm\n");
    for (n, e) in traj.energies.iter().enumerate() {
        let t = n as f64 * traj.tau;
        let d = if n == 0 { 0.0 } else { traj.step_norms[n - 1] };
        writeln!(out, "{n},{t},{e},{d}").expect("writing to a String");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::run_flow;
    use crate::measure::{Grid, QuantileVector, TargetMeasure};

    fn traj(cells: usize, horizon: f64) -> (FlowConfig, Trajectory) {
        let grid = Grid::new(cells).unwrap();
        let cfg = FlowConfig::new(
            TargetMeasure::dirac(0.0).unwrap(),
            QuantileVector::constant(grid, -1.0),
            0.1,
            1e-2,
            horizon,
        )
        .unwrap();
        let t = run_flow(&cfg).unwrap();
        (cfg, t)
    }

    #[test]
    fn single_state_csv() {
        let (_, t) = traj(2, 0.0);
        let csv = trajectory_csv(&t);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 3);
        assert_eq!(lines[0], "t,s,g,g_slope");
        assert_eq!(lines[1], "0,0.25,-1,0");
    }

    #[test]
    fn row_count_matches_states() {
        let (_, t) = traj(7, 0.5);
        assert_eq!(trajectory_csv(&t).lines().count(), 1 + t.len() * 7);
    }

    #[test]
    fn json_round_trip_is_exact() {
        let (cfg, t) = traj(16, 0.5);
        let text = export_trajectory(&t, Some(&cfg), ExportFormat::Json).unwrap();
        let back = import_trajectory_json(&text).unwrap();
        assert_eq!(back.trajectory, t);
        assert_eq!(back.config.as_ref(), Some(&cfg));
        for (a, b) in back.trajectory.states.iter().zip(&t.states) {
            for (x, y) in a.values().iter().zip(b.values()) {
                assert_eq!(x.to_bits(), y.to_bits());
            }
        }
    }

    #[test]
    fn import_rejects_inconsistent_lengths() {
        let (_, mut t) = traj(4, 0.2);
        t.times.pop();
        let text = trajectory_json(&t, None).unwrap();
        assert!(import_trajectory_json(&text).is_err());
        assert!(import_trajectory_json("{").is_err());
    }

    #[test]
    fn energy_rows() {
        let (_, t) = traj(4, 0.3);
        let csv = energy_csv(&t);
        assert_eq!(csv.lines().count(), 1 + t.energies.len());
        assert!(csv.lines().nth(1).unwrap().starts_with("0,0,"));
    }
}
