use std::process::ExitCode;

use clap::Parser;
use kepler_sphere_cli::{run, Cli};

fn main() -> ExitCode {
    ExitCode::from(run(&Cli::parse()))
}
