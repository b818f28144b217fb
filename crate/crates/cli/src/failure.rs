//! Error reporting and exit codes.

use std::fmt;
use std::path::Path;

use beamgp_core::Error;

/// Process exit codes. Usage errors exit with 2 via clap.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitKind {
    Parse = 3,
    Config = 4,
    Numerical = 5,
    Io = 6,
}

#[derive(Debug)]
pub struct Failure {
    pub kind: ExitKind,
    pub message: String,
}

impl Failure {
    pub fn new(kind: ExitKind, message: impl Into<String>) -> Self {
        Failure {
            kind,
            message: message.into(),
        }
    }

    pub fn parse(message: impl Into<String>) -> Self {
        Self::new(ExitKind::Parse, message)
    }

    pub fn config(message: impl Into<String>) -> Self {
        Self::new(ExitKind::Config, message)
    }

    pub fn io(path: &Path, err: std::io::Error) -> Self {
        Self::new(ExitKind::Io, format!("{}: {err}", path.display()))
    }

    /// Prefixes the message with where the error came from.
    pub fn context(mut self, what: impl fmt::Display) -> Self {
        self.message = format!("{what}: {}", self.message);
        self
    }

    pub fn code(&self) -> i32 {
        self.kind as i32
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let label = match self.kind {
            ExitKind::Parse => "parse error",
            ExitKind::Config => "configuration error",
            ExitKind::Numerical => "numerical error",
            ExitKind::Io => "i/o error",
        };
        write!(f, "{label}: {}", self.message)
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let kind = match &e {
            Error::Parse { .. } | Error::Domain(_) => ExitKind::Parse,
            Error::Config(_)
            | Error::InvalidArgument(_)
            | Error::ContractViolation(_)
            | Error::Consistency(_) => ExitKind::Config,
            Error::NumericalSingularity { .. }
            | Error::InvalidStart(_)
            | Error::Inference(_)
            | Error::Model(_)
            | Error::DegeneratePosterior => ExitKind::Numerical,
            Error::Io(_) => ExitKind::Io,
        };
        let message = match &e {
            Error::InvalidStart(_) => format!(
                "{e}; adjust fit.init or widen fit.ei_prior_bounds (multiples of ei_ref) in the config"
            ),
            _ => e.to_string(),
        };
        Failure { kind, message }
    }
}
