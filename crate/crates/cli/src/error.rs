use std::io;
use std::path::PathBuf;

use thiserror::Error;

/// Exit codes of the `ppm` binary.
pub const EXIT_OK: i32 = 0;
pub const EXIT_INTERNAL: i32 = 1;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_NO_CANDIDATE: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("cannot read `{}`: {source}", path.display())]
    Read { path: PathBuf, source: io::Error },
    #[error("cannot write `{}`: {source}", path.display())]
    Write { path: PathBuf, source: io::Error },
    #[error("{}:{line}:{column}: {message}", path.display())]
    Parse {
        path: PathBuf,
        line: usize,
        column: usize,
        message: String,
    },
    #[error(transparent)]
    Model(#[from] ppm_core::Error),
    #[error("internal error: {0}")]
    Internal(String),
}

impl CliError {
    pub(crate) fn parse(path: impl Into<PathBuf>, err: serde_json::Error) -> Self {
        // serde_json appends " at line L column C"; keep only the message part
        let text = err.to_string();
        let message = match text.rfind(" at line ") {
            Some(cut) => text[..cut].to_string(),
            None => text,
        };
        Self::Parse {
            path: path.into(),
            line: err.line(),
            column: err.column(),
            message,
        }
    }

    pub fn exit_code(&self) -> i32 {
        use ppm_core::Error as E;
        match self {
            Self::Usage(_) | Self::Read { .. } | Self::Parse { .. } => EXIT_INVALID,
            Self::Model(E::NoInteriorCandidate) => EXIT_NO_CANDIDATE,
            // broken solver invariants rather than bad input
            Self::Model(
                E::TauArity { .. }
                | E::OutsideFamilyDomain(_)
                | E::DenominatorNonpositive(_)
                | E::FirmIndex(_)
                | E::StrategyArity { .. },
            ) => EXIT_INTERNAL,
            Self::Model(_) => EXIT_INVALID,
            Self::Write { .. } | Self::Internal(_) => EXIT_INTERNAL,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
