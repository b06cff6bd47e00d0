//! Command-line front end: scenario files, simulation, regularized image
//! export and the verification suites.
//!
//! Exit codes: 0 success, 1 failed verification, 2 configuration error,
//! 3 collision-guard stop, 4 non-negative energy where a bound orbit is
//! required, 5 any other runtime failure.

pub mod commands;
pub mod config;
pub mod error;
pub mod record;

use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

pub use commands::Mode;
pub use error::{exit, CliError};

#[derive(Debug, Parser)]
#[command(name = "kepler-sphere", version, about = "Kepler problem on the 3-sphere")]
pub struct Cli {
    /// Output directory; `simulate` and `regularize` default to `out`,
    /// `verify` writes a report file only when this is given.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Multiplies every acceptance tolerance.
    #[arg(long, global = true, default_value_t = 1.0)]
    pub tol_scale: f64,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Integrate a scenario and write its trajectory CSV and JSON summary.
    Simulate { config: PathBuf },

    /// Run a property suite and print its JSON report.
    Verify {
        /// brackets, conserved, moser, ligon-schaaf, gnomonic or all.
        suite: String,

        #[arg(long, default_value_t = 100)]
        seeds: u64,

        /// Flip a sign inside Φ_c; the gnomonic suite must then fail.
        #[arg(long)]
        mutate_phi_c: bool,
    },

    /// Export a scenario's image under one of the regularizing maps.
    Regularize {
        config: PathBuf,

        #[arg(long, value_enum)]
        mode: ModeArg,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    LigonSchaaf,
    Moser,
    Gnomonic,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::LigonSchaaf => Mode::LigonSchaaf,
            ModeArg::Moser => Mode::Moser,
            ModeArg::Gnomonic => Mode::Gnomonic,
        }
    }
}

/// Runs a parsed command line and returns the process exit code. Reports go
/// to stdout, diagnostics to stderr.
pub fn run(cli: &Cli) -> u8 {
    let out = cli.out.clone().unwrap_or_else(|| PathBuf::from("out"));
    let result = match &cli.command {
        Command::Simulate { config } => commands::simulate(config, &out, cli.tol_scale),
        Command::Verify { suite, seeds, mutate_phi_c } => {
            commands::verify(suite, *seeds, *mutate_phi_c, cli.out.as_deref(), cli.tol_scale).map(|(outcome, report)| {
                println!("{}", serde_json::to_string_pretty(&report).expect("reports always serialize"));
                for c in report.failures() {
                    eprintln!("FAIL {}::{} value {:e} tolerance {:e}", c.suite, c.name, c.value, c.tolerance);
                }
                outcome
            })
        }
        Command::Regularize { config, mode } => commands::regularize(config, (*mode).into(), &out, cli.tol_scale),
    };
    match result {
        Ok(outcome) => {
            eprintln!("{}", outcome.message);
            for f in &outcome.files {
                eprintln!("wrote {}", f.display());
            }
            outcome.exit_code
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
