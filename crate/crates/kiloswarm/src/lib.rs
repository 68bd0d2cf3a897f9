//! Command-line front end for the swarm simulator: TOML experiment configs,
//! run manifests, CSV/PGM outputs, SVG plots and a parallel worker pool.
//!
//! Exit codes: 0 success, 1 usage or configuration error, 2 runtime error.

pub mod commands;
pub mod config;
pub mod io;
pub mod plot;
pub mod runner;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::commands::Context;
use crate::config::{Config, ConfigError, Overrides, MAX_SEED};
use crate::plot::PlotKind;

#[derive(Debug, Parser)]
#[command(name = "kiloswarm", version, about = "Biased-robot swarm simulations and sweeps")]
pub struct Cli {
    /// Master seed; a random one is drawn and recorded when omitted.
    #[arg(long, global = true, value_parser = clap::value_parser!(u64).range(0..=MAX_SEED))]
    pub seed: Option<u64>,
    /// Worker threads (0 = all available cores).
    #[arg(long, global = true, default_value_t = 0)]
    pub workers: usize,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    pub out_dir: PathBuf,
    /// Experiment config (TOML); built-in defaults when omitted.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write one trajectory CSV per requested (robot, trial).
    Simulate(SimulateArgs),
    /// Run the Monte Carlo bias sweep and write results and curves.
    Sweep,
    /// Run the oscillator population for each coupling and repetition.
    Oscillate,
    /// Run the sensor response sweep and agreement curves.
    Sense,
    /// Fit per-robot and ensemble turning-rate models from logged trajectories.
    Estimate {
        /// Index CSV with columns `robot_id,trial_id,path`.
        index: PathBuf,
    },
    /// Render an SVG from output CSVs.
    Plot {
        #[arg(value_enum)]
        kind: PlotKind,
        /// Input CSVs; `cost`/`coverage` accept a second curve CSV and
        /// `trajectory` any number of files.
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        /// SVG path; defaults to `<out-dir>/<kind>.svg`.
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Default, Args)]
pub struct SimulateArgs {
    /// Single robot bias, replacing the sweep's bias list.
    #[arg(long, allow_hyphen_values = true)]
    pub bias: Option<f64>,
    /// Motor noise standard deviation.
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Trial duration (s).
    #[arg(long)]
    pub duration: Option<f64>,
    /// Integration step (s).
    #[arg(long)]
    pub dt: Option<f64>,
}

/// Loads, overrides, resolves and validates the configuration.
pub fn load_config(cli: &Cli) -> Result<Config, ConfigError> {
    let sim = match &cli.command {
        Command::Simulate(a) => a.clone(),
        _ => SimulateArgs::default(),
    };
    let overrides = Overrides {
        seed: cli.seed,
        bias: sim.bias,
        sigma: sim.sigma,
        duration: sim.duration,
        dt: sim.dt,
    };
    let (config, source) = match &cli.config {
        Some(p) => {
            let (c, text) = Config::load(p)?;
            (c, Some((text, p.clone())))
        }
        None => (Config::default(), None),
    };
    let config = config.resolve(&overrides).map_err(|e| ConfigError {
        path: cli.config.clone(),
        ..e
    })?;
    config.validate(source.as_ref().map(|(t, p)| (t.as_str(), p.as_path())))?;
    Ok(config)
}

/// Runs a parsed command line; errors carry their exit code.
pub fn execute(cli: &Cli) -> anyhow::Result<()> {
    if let Command::Plot { kind, inputs, output } = &cli.command {
        let output = output
            .clone()
            .unwrap_or_else(|| cli.out_dir.join(format!("{}.svg", kind.name())));
        if let Some(dir) = output.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir)?;
        }
        let inputs: Vec<&std::path::Path> = inputs.iter().map(PathBuf::as_path).collect();
        return plot::render(*kind, &inputs, &output);
    }
    let ctx = Context {
        config: load_config(cli)?,
        config_path: cli.config.clone(),
        out_dir: cli.out_dir.clone(),
        workers: cli.workers,
    };
    match &cli.command {
        Command::Simulate(_) => commands::simulate(&ctx),
        Command::Sweep => commands::sweep(&ctx),
        Command::Oscillate => commands::oscillate(&ctx),
        Command::Sense => commands::sense(&ctx),
        Command::Estimate { index } => {
            println!("{}", commands::estimate(&ctx, index)?);
            Ok(())
        }
        Command::Plot { .. } => unreachable!("handled above"),
    }
}

/// Exit code for an error returned by [`execute`].
pub fn exit_code(err: &anyhow::Error) -> i32 {
    if err.downcast_ref::<ConfigError>().is_some() {
        1
    } else {
        2
    }
}

/// Full entry point: parses `args` (including the program name) and runs.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e:#}");
            exit_code(&e)
        }
    }
}
