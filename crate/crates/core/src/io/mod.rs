//! Configuration files, experiment presets and output files.

mod config;
mod experiment;
mod export;

pub use config::{load_config, ConfigFile, ConfigFormat, ExperimentPreset};
pub use experiment::{
    oracle_check, run_experiment, run_id, run_sweep, InvariantReport, OracleCheck, RunManifest,
    RunStatus, SweepReport,
};
pub use export::{
    density_csv, energy_csv, export_trajectory, import_trajectory_json, trajectory_csv,
    trajectory_json, ExportFormat, TrajectoryFile,
};
