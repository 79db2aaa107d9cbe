use std::fmt;
use std::io;
use std::process::ExitCode;

use raybound::Error;

/// Why a command stopped, with its process exit code.
#[derive(Debug)]
pub enum Failure {
    Lib(Error),
    Io { context: String, source: io::Error },
    MissingArtifact(String),
    /// Names of the checks that failed.
    Verify(Vec<String>),
}

impl Failure {
    pub fn io(context: impl Into<String>) -> impl FnOnce(io::Error) -> Failure {
        let context = context.into();
        move |source| Failure::Io { context, source }
    }

    pub fn code(&self) -> u8 {
        match self {
            Failure::Lib(e) => match e {
                Error::Config { .. }
                | Error::InvalidGeometry(_)
                | Error::InvalidMedium(_)
                | Error::InvalidSource(_)
                | Error::InvalidSolver(_)
                | Error::GridTooCoarse { .. } => 2,
                Error::NotContractive { .. } => 3,
                Error::Format(_) => 5,
                _ => 1,
            },
            Failure::Verify(_) => 4,
            Failure::MissingArtifact(_) => 5,
            Failure::Io { .. } => 1,
        }
    }

    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(self.code())
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Lib(e) => write!(f, "{e}"),
            Failure::Io { context, source } => write!(f, "{context}: {source}"),
            Failure::MissingArtifact(what) => write!(f, "missing upstream artifact {what}"),
            Failure::Verify(names) => write!(f, "verification failed: {}", names.join(", ")),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}
