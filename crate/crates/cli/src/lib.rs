//! Command-line front end for `cstar-core`: input loading, the embedded
//! example corpus, oracle comparison suites and the subcommand bodies.

pub mod commands;
pub mod corpus;
pub mod oracle;
pub mod workspace;

use std::fmt;

pub const EXIT_OK: u8 = 0;
pub const EXIT_FAILURE: u8 = 1;
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_INVALID: u8 = 3;
pub const EXIT_UNDECIDED: u8 = 4;

/// An error together with the process exit code it maps to.
#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }

    pub fn invalid(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_INVALID,
            message: message.into(),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

impl From<cstar_core::error::Error> for CliError {
    fn from(e: cstar_core::error::Error) -> Self {
        use cstar_core::error::Error;
        let code = match e {
            Error::Json(_) => EXIT_USAGE,
            Error::Numerical(_) => EXIT_FAILURE,
            _ => EXIT_INVALID,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

/// What a subcommand prints on stdout, and how the process exits.
#[derive(Debug)]
pub struct Output {
    pub json: String,
    pub code: u8,
}
