//! Library side of the `spbe` binary: argument definitions, file formats and
//! one function per subcommand.

pub mod args;
pub mod commands;
pub mod profile_io;

use thiserror::Error;

use args::{Cli, Command};

pub const EXIT_OK: u8 = 0;
/// Verification failed, or a check found a violation.
pub const EXIT_FAIL: u8 = 1;
pub const EXIT_NOT_CONVERGED: u8 = 2;
pub const EXIT_USAGE: u8 = 64;
pub const EXIT_DATA: u8 = 65;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("invalid profile file: {0}")]
    Schema(String),
    #[error("cannot read {0}")]
    Input(String),
    #[error("cannot write output: {0}")]
    Output(String),
    #[error("{0}")]
    Failed(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Schema(_) | CliError::Input(_) | CliError::Output(_) => EXIT_DATA,
            CliError::Failed(_) => EXIT_FAIL,
        }
    }
}

pub fn run(cli: &Cli) -> Result<u8, CliError> {
    match &cli.command {
        Command::Solve(a) => commands::solve_cmd(a),
        Command::Verify(a) => commands::verify_cmd(a),
        Command::Profile(a) => commands::profile_cmd(a),
        Command::Cascade(a) => commands::cascade_cmd(a),
        Command::Simulate(a) => commands::simulate_cmd(a),
        Command::Chain(a) => commands::chain_cmd(a),
        Command::Fpe2(a) => commands::fpe2_cmd(a),
        Command::Deviate(a) => commands::deviate_cmd(a),
    }
}
