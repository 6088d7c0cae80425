use std::fmt;

/// Failure classes, each with a fixed exit code.
#[derive(Debug)]
pub enum CliError {
    /// Bad flags, files or parameters, or a degenerate belief.
    Input(String),
    /// Too much belief mass outside the price grid.
    Truncation(String),
    /// Simulated failure rate outside the theoretical band.
    SimBound(String),
    /// Optimized liquidity differs from the reference shape.
    Verify(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Input(_) => 2,
            Self::Truncation(_) => 3,
            Self::SimBound(_) => 4,
            Self::Verify(_) => 5,
        }
    }

    pub fn input(msg: impl Into<String>) -> Self {
        Self::Input(msg.into())
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Input(m) => write!(f, "input error: {m}"),
            Self::Truncation(m) => write!(f, "truncation: {m}"),
            Self::SimBound(m) => write!(f, "simulation bound violated: {m}"),
            Self::Verify(m) => write!(f, "verification failed: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<cfmm_forge::Error> for CliError {
    fn from(e: cfmm_forge::Error) -> Self {
        match e {
            cfmm_forge::Error::TruncationDominated { .. } => Self::Truncation(e.to_string()),
            _ => Self::Input(e.to_string()),
        }
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        Self::Input(e.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;
