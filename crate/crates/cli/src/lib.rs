//! Command-line driver: `certify`, `integrate`, `simulate`, `sweep` and
//! `verify`.
//!
//! Exit codes: 0 success, 1 failed certification or verification, 2
//! invalid configuration or input, 3 internal error.

mod commands;
mod config;
mod dump;
mod error;

use std::ffi::OsString;
use std::io::Write;

use clap::Parser;

pub use commands::{execute, verify_coloring_dump, Status};
pub use config::{Cli, Command, ConfigFile, GraphChoice, Mode, RunArgs, RunConfig, DEFAULT_BOUND};
pub use dump::{check_dump, parse_dump, write_dump, Dump, DumpCheck};
pub use error::{CliError, Result};

/// Parses `args`, runs the command and returns the process exit code.
pub fn run_cli<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = if code == 0 { write!(out, "{e}") } else { write!(err, "{e}") };
            return code;
        }
    };
    let (mode, args) = cli.command.split();
    let result = RunConfig::resolve(mode, args).and_then(|config| execute(&config, out));
    match result {
        Ok(Status::Success) => 0,
        Ok(Status::Failure) => 1,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}
