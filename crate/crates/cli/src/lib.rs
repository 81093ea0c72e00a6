//! Command-line front end for `rabi-cf`.
//!
//! [`run`] is the whole program minus process handling, so tests can drive it
//! in-process.

use std::ffi::OsString;
use std::fmt;
use std::io::{self, Write};

use clap::Parser;

pub mod args;
pub mod commands;
pub mod config;
pub mod output;

pub const EXIT_OK: i32 = 0;
/// A computed deviation or verification exceeded its tolerance.
pub const EXIT_TOLERANCE: i32 = 1;
/// Invalid flags, configuration or preconditions.
pub const EXIT_USAGE: i32 = 2;
/// A solver failed (including method a at Δ = 0) or output could not be written.
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    pub fn usage(message: impl Into<String>) -> Self {
        Self { code: EXIT_USAGE, message: message.into() }
    }

    pub fn numerical(message: impl Into<String>) -> Self {
        Self { code: EXIT_NUMERICAL, message: message.into() }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<rabi_cf::Error> for Failure {
    fn from(e: rabi_cf::Error) -> Self {
        use rabi_cf::Error::*;
        let message = e.to_string();
        match e {
            InvalidParameter { .. }
            | GZero
            | PoleTooClose { .. }
            | TooShort { .. }
            | TooFewLevels { .. }
            | InvalidWindow { .. }
            | DegenerateScan
            | InvalidScan(_)
            | InvalidOrder { .. } => Failure::usage(message),
            SingularDelta
            | PoleAt(_)
            | DegenerateDenominator { .. }
            | DivergedTail { .. }
            | WindowEmpty
            | LostBracket { .. }
            | NoSignChange { .. } => Failure::numerical(message),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::numerical(format!("output error: {e}"))
    }
}

/// Parses `argv` (including the program name), runs the subcommand and
/// returns the exit code. Results go to `out`, diagnostics to `err`.
pub fn run(argv: Vec<OsString>, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let argv = match config::expand(argv) {
        Ok(a) => a,
        Err(m) => {
            let _ = writeln!(err, "error: {m}");
            return EXIT_USAGE;
        }
    };
    let cli = match args::Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            let _ = if e.use_stderr() { write!(err, "{text}") } else { write!(out, "{text}") };
            return e.exit_code();
        }
    };
    match commands::dispatch(cli.command, out) {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "error: {f}");
            f.code
        }
    }
}
