use std::fmt;

use riccati_core::Error as CoreError;

/// Everything that ends a run with a nonzero exit status.
#[derive(Debug)]
pub enum CliError {
    /// Bad flags, unreadable or malformed input.
    Usage(String),
    Input(String),
    NotCertified(String),
    /// Fixed-point iteration failed or its stability certificate did.
    Solver(String),
    /// A verification check exceeded its tolerance.
    CheckFailed(String),
    Generation(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Input(_) => 1,
            CliError::NotCertified(_) => 2,
            CliError::Solver(_) => 3,
            CliError::CheckFailed(_) => 4,
            CliError::Generation(_) => 5,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Input(m) => write!(f, "invalid input: {m}"),
            CliError::NotCertified(m) => write!(f, "not certified: {m}"),
            CliError::Solver(m) => write!(f, "solver failed: {m}"),
            CliError::CheckFailed(m) => write!(f, "verification failed: {m}"),
            CliError::Generation(m) => write!(f, "generation failed: {m}"),
        }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        let msg = e.to_string();
        match e {
            CoreError::NotCertified { .. } => CliError::NotCertified(msg),
            CoreError::NoConvergence { .. }
            | CoreError::SpectralCertificateFailure { .. }
            | CoreError::Divergence { .. } => CliError::Solver(msg),
            CoreError::GenerationExhausted { .. } => CliError::Generation(msg),
            CoreError::InvalidParameter(_) | CoreError::InvalidHorizon { .. } => CliError::Usage(msg),
            _ => CliError::Input(msg),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Input(e.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;
