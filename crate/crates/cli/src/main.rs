mod args;
mod run;
mod settings;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};
use settings::{expand_args, ConfigError};

fn main() -> ExitCode {
    let argv = match expand_args(std::env::args_os().collect()) {
        Ok(a) => a,
        Err(ConfigError::Read(msg)) => {
            eprintln!("error: cannot read config {msg}");
            return ExitCode::from(3);
        }
        Err(ConfigError::Syntax(msg)) => {
            eprintln!("error: config {msg}");
            return ExitCode::from(2);
        }
    };
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => e.exit(),
    };
    let outcome = match &cli.command {
        Command::Bounds(a) => run::bounds(a),
        Command::Mc(a) => run::mc(a),
        Command::Real(a) => run::real(a),
        Command::Ingest(a) => run::ingest(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.exit_code() as u8)
        }
    }
}
