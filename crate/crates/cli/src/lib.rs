//! Batch front end for the dehazing toolkit.
//!
//! Exit codes: 0 when every record succeeded, 1 when some failed, 2 for an
//! invalid invocation or parameter.

pub mod commands;
pub mod config;
pub mod io;
pub mod report;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::commands::{cmd_assess, cmd_run, cmd_synth, cmd_validate, Outcome, SynthTransmission};
use crate::config::{Overrides, Settings};

#[derive(Debug, Parser)]
#[command(name = "dehaze", version, about = "Single-image dehazing, haze synthesis and quality assessment")]
pub struct Cli {
    /// Output directory
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    /// TOML file with default parameters
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Print the effective parameters as TOML and exit
    #[arg(long = "dump-config", global = true)]
    pub dump_config: bool,
    #[command(flatten)]
    pub overrides: Overrides,
    #[command(subcommand)]
    pub command: Option<Command>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Dehaze images or directories of images
    Run {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        /// Also compute quality metrics for each result
        #[arg(long)]
        assess: bool,
    },
    /// Score dehazed candidates against their hazy source
    Assess {
        hazy: PathBuf,
        #[arg(required = true)]
        dehazed: Vec<PathBuf>,
    },
    /// Add synthetic haze to clean images
    Synth {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        /// Uniform transmission, in (0, 1]
        #[arg(long = "t", conflicts_with = "depth", required_unless_present = "depth")]
        t: Option<f64>,
        /// Depth map image; transmission is exp(-scatter * depth)
        #[arg(long, requires = "scatter")]
        depth: Option<PathBuf>,
        /// Scattering coefficient used with --depth
        #[arg(long, requires = "depth")]
        scatter: Option<f64>,
        /// Airlight coefficient, in (0, 1]
        #[arg(long, default_value_t = 0.9)]
        k: f64,
    },
    /// Measure the neglected term on NAME.hazy.png / NAME.clean.png pairs
    Validate {
        #[arg(required = true)]
        dirs: Vec<PathBuf>,
    },
}

fn settings(cli: &Cli) -> anyhow::Result<Settings> {
    let mut s = match &cli.config {
        Some(path) => Settings::load(path)?,
        None => Settings::default(),
    };
    s.apply(&cli.overrides);
    s.validate()?;
    Ok(s)
}

fn dispatch(command: &Command, cli: &Cli, s: &Settings) -> anyhow::Result<Outcome> {
    match command {
        Command::Run { inputs, assess } => cmd_run(inputs, &cli.out, s, *assess),
        Command::Assess { hazy, dehazed } => cmd_assess(hazy, dehazed, &cli.out, s),
        Command::Synth { inputs, t, depth, scatter, k } => {
            let t = match (t, depth, scatter) {
                (Some(t), _, _) => SynthTransmission::Scalar(*t),
                (None, Some(path), Some(scatter)) => SynthTransmission::Depth { path: path.clone(), scatter: *scatter },
                _ => anyhow::bail!("either --t or --depth with --scatter is required"),
            };
            cmd_synth(inputs, &t, *k, &cli.out, s)
        }
        Command::Validate { dirs } => cmd_validate(dirs, &cli.out, s),
    }
}

/// Parses `args` (program name first), runs the command and returns the exit code.
pub fn run_cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let s = match settings(&cli) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e:#}");
            return 2;
        }
    };
    if cli.dump_config {
        print!("{}", s.to_toml());
        return 0;
    }
    let Some(command) = &cli.command else {
        eprintln!("error: a subcommand is required (run, assess, synth, validate); see --help");
        return 2;
    };
    match dispatch(command, &cli, &s) {
        Ok(o) if o.failed == 0 => 0,
        Ok(o) => {
            eprintln!("{} of {} records failed", o.failed, o.processed);
            1
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            2
        }
    }
}
