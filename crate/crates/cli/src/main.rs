use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use qflow::flow::run_flow;
use qflow::io::{
    load_config, oracle_check, run_experiment, run_sweep, ConfigFile, ExperimentPreset,
    ExportFormat, RunManifest,
};
use qflow::oracles::touch_time;
use qflow::{Error, FlowConfig, KernelSign};

/// Quantile-space MMD gradient flows with H1 regularization.
#[derive(Parser)]
#[command(name = "qflow", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one flow and write its outputs.
    Run {
        #[command(flatten)]
        config: ConfigArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Run the configuration for lambda = 0 and a list of lambdas.
    Sweep {
        #[command(flatten)]
        config: ConfigArgs,
        #[command(flatten)]
        output: OutputArgs,
        /// Comma-separated regularization strengths.
        #[arg(long, value_delimiter = ',', default_values_t = ExperimentPreset::SWEEP_LAMBDAS)]
        lambdas: Vec<f64>,
        /// Maximum number of concurrent runs.
        #[arg(long, env = "QF_MAX_THREADS")]
        max_threads: Option<usize>,
    },
    /// Run a flow in memory and compare it with its closed-form solution.
    OracleCheck {
        #[command(flatten)]
        config: ConfigArgs,
    },
}

#[derive(Args)]
struct ConfigArgs {
    /// Named experiment supplying defaults.
    #[arg(long)]
    preset: Option<ExperimentPreset>,
    /// Configuration file (.toml or .json); flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    tau: Option<f64>,
    #[arg(long)]
    lambda: Option<f64>,
    /// Number of grid cells.
    #[arg(long)]
    grid: Option<usize>,
    #[arg(long)]
    horizon: Option<f64>,
    /// `negative` (attractive) or `positive` (repulsive).
    #[arg(long, value_parser = parse_kernel)]
    kernel: Option<KernelSign>,
}

#[derive(Args)]
struct OutputArgs {
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// `csv_long` or `json`.
    #[arg(long, default_value = "csv_long")]
    format: ExportFormat,
}

fn parse_kernel(s: &str) -> Result<KernelSign, String> {
    match s {
        "negative" => Ok(KernelSign::Negative),
        "positive" => Ok(KernelSign::Positive),
        _ => Err(format!("unknown kernel `{s}` (expected negative or positive)")),
    }
}

impl ConfigArgs {
    fn resolve(&self) -> qflow::Result<FlowConfig> {
        let flags = ConfigFile {
            preset: self.preset,
            tau: self.tau,
            lambda: self.lambda,
            grid: self.grid,
            horizon: self.horizon,
            kernel: self.kernel,
            ..ConfigFile::default()
        };
        load_config(self.config.as_deref(), flags)
    }
}

fn report(m: &RunManifest) {
    let inv = &m.invariants;
    println!(
        "run {}: {} steps in {:.2}s, status {:?}",
        m.run_id, m.steps, m.wall_time_s, m.status
    );
    println!(
        "  cone invariance: {} (worst drop {:.3e}, projected steps {})",
        pass(inv.cone_invariance),
        inv.detail.worst_cone_drop,
        inv.detail.projected_steps
    );
    println!(
        "  energy decay: {} (worst slack {:.3e})",
        pass(inv.energy_decay),
        inv.detail.worst_dissipation_slack
    );
    if let Some(o) = &inv.oracle {
        println!(
            "  oracle {}: {} (error {:.3e}, tolerance {:.1e}, {} states)",
            o.name,
            pass(o.passed),
            o.max_error,
            o.tolerance,
            o.compared_states
        );
    }
}

fn pass(ok: bool) -> &'static str {
    if ok {
        "pass"
    } else {
        "FAIL"
    }
}

fn execute(cli: Cli) -> qflow::Result<bool> {
    match cli.command {
        Command::Run { config, output } => {
            let cfg = config.resolve()?;
            let m = run_experiment(&cfg, &output.out, output.format)?;
            report(&m);
            Ok(m.succeeded())
        }
        Command::Sweep {
            config,
            output,
            lambdas,
            max_threads,
        } => {
            let cfg = config.resolve()?;
            let sweep = run_sweep(&cfg, &lambdas, &output.out, output.format, max_threads)?;
            for m in &sweep.runs {
                report(m);
            }
            println!("lambda,sup_error");
            for row in &sweep.lambda_errors {
                println!("{:e},{:.6e}", row.lambda, row.sup_error);
            }
            Ok(sweep.runs.iter().all(RunManifest::succeeded))
        }
        Command::OracleCheck { config } => {
            let cfg = config.resolve()?;
            let traj = match run_flow(&cfg) {
                Ok(t) => t,
                Err(Error::StepFailed { step, source, partial }) => {
                    eprintln!("step {step} failed: {source}; checking the first {} states", partial.len());
                    *partial
                }
                Err(e) => return Err(e),
            };
            if cfg.kernel == KernelSign::Negative && cfg.lambda > 0.0 {
                println!("touch time t* = {:.6}", touch_time(cfg.lambda, 1e-10)?);
            }
            match oracle_check(&cfg, &traj)? {
                Some(o) => {
                    println!(
                        "{}: {} (error {:.3e}, tolerance {:.1e}, {} states)",
                        o.name,
                        pass(o.passed),
                        o.max_error,
                        o.tolerance,
                        o.compared_states
                    );
                    Ok(o.passed && traj.steps() == cfg.steps())
                }
                None => {
                    eprintln!("no closed-form solution applies to this configuration");
                    Ok(false)
                }
            }
        }
    }
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
