//! `plaplace`: batch front end for the annulus, Sobolev, calibration,
//! symmetry and bubble computations.

mod commands;
mod config;
mod verify;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use plaplace_core::Error;

use crate::commands::{
    AnnulusArgs, BubblesArgs, CalibrateArgs, CurveArgs, OrbitArgs, SobolevArgs, ThresholdsArgs, VerifyArgs,
};

pub const EXIT_VALIDATION: u8 = 1;
pub const EXIT_NUMERIC: u8 = 2;
pub const EXIT_NONCONVERGENCE: u8 = 3;

#[derive(Debug, Parser)]
#[command(name = "plaplace", version, about = "Critical p-Laplacian levels on annuli")]
pub struct Cli {
    /// JSON run configuration: {"command", "parameters", "output_dir", "seed"}.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Directory for all artifacts.
    #[arg(long, env = "PLAPLACE_OUTPUT_DIR", default_value = "plaplace-out", global = true)]
    output_dir: PathBuf,

    /// Seed for every random choice of the run.
    #[arg(long, default_value_t = 0, global = true)]
    seed: u64,

    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Best Sobolev constant and energy quantum.
    Sobolev(SobolevArgs),
    /// Level of one annulus by descent and/or shooting.
    Annulus(AnnulusArgs),
    /// c(R, 1) over a list of hole ratios.
    Curve(CurveArgs),
    /// Equal-energy family on a geometric partition.
    Calibrate(CalibrateArgs),
    /// Symmetry thresholds l0 for an annulus.
    Thresholds(ThresholdsArgs),
    /// Closure, fixed space and minimal orbit of a finite group.
    Orbit(OrbitArgs),
    /// Monte Carlo additivity check for a bubble configuration.
    Bubbles(BubblesArgs),
    /// Run the invariant suite; exit 0 iff every check passes.
    VerifyAll(VerifyArgs),
}

/// Failure of a run, already mapped to an exit status.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub messages: Vec<String>,
}

impl Failure {
    pub fn validation(messages: Vec<String>) -> Self {
        Self { code: EXIT_VALIDATION, messages }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Domain(_) | Error::Parse(_) => EXIT_VALIDATION,
            Error::NonConvergence(_) => EXIT_NONCONVERGENCE,
            Error::Numeric(_) | Error::Io(_) | Error::Json(_) => EXIT_NUMERIC,
        };
        Self { code, messages: vec![e.to_string()] }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Error::from(e).into()
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Error::from(e).into()
    }
}

fn parse(args: Vec<String>) -> Result<Cli, ExitCode> {
    Cli::try_parse_from(args).map_err(|e| {
        let _ = e.print();
        if e.use_stderr() {
            ExitCode::from(EXIT_VALIDATION)
        } else {
            ExitCode::SUCCESS
        }
    })
}

fn main() -> ExitCode {
    let mut cli = match parse(std::env::args().collect()) {
        Ok(cli) => cli,
        Err(code) => return code,
    };
    if let Some(path) = cli.config.take() {
        if cli.command.is_some() {
            eprintln!("error: --config replaces the subcommand; pass one or the other");
            return ExitCode::from(EXIT_VALIDATION);
        }
        let argv = match config::load(&path) {
            Ok(argv) => argv,
            Err(f) => return report(f),
        };
        cli = match parse(argv) {
            Ok(cli) => cli,
            Err(code) => return code,
        };
    }
    let Some(command) = cli.command.clone() else {
        eprintln!("error: a subcommand or --config is required (see --help)");
        return ExitCode::from(EXIT_VALIDATION);
    };
    match commands::run(&command, &cli.output_dir, cli.seed) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => report(f),
    }
}

fn report(f: Failure) -> ExitCode {
    for m in &f.messages {
        eprintln!("error: {m}");
    }
    ExitCode::from(f.code)
}
