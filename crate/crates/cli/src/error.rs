use std::fmt;
use std::process::ExitCode;

use achlioptas_core::analysis::AnalysisError;
use achlioptas_core::dynamics::DynamicsError;
use achlioptas_core::rules::RuleError;

/// Failures, grouped by exit code.
#[derive(Debug)]
pub enum CliError {
    /// Bad flags, config file or rule (exit 2).
    Config(String),
    /// The rule is degenerate and the command needs a limit law (exit 3).
    Degenerate(String),
    /// Anything else (exit 1).
    Other(anyhow::Error),
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        match self {
            CliError::Config(_) => ExitCode::from(2),
            CliError::Degenerate(_) => ExitCode::from(3),
            CliError::Other(_) => ExitCode::from(1),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::Degenerate(r) => write!(f, "rule `{r}` is degenerate (ext = 0); it has no limit law"),
            CliError::Other(e) => write!(f, "{e:#}"),
        }
    }
}

impl From<anyhow::Error> for CliError {
    fn from(e: anyhow::Error) -> Self {
        CliError::Other(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Other(e.into())
    }
}

impl From<DynamicsError> for CliError {
    fn from(e: DynamicsError) -> Self {
        match e {
            DynamicsError::Degenerate => CliError::Degenerate("(selected)".into()),
            DynamicsError::Rule(r) => CliError::Config(r.to_string()),
            DynamicsError::InvalidParameter(m) => CliError::Config(m),
            other => CliError::Other(other.into()),
        }
    }
}

impl From<AnalysisError> for CliError {
    fn from(e: AnalysisError) -> Self {
        match e {
            AnalysisError::Config(m) => CliError::Config(m),
            AnalysisError::Sim(s) => CliError::Config(s.to_string()),
            AnalysisError::EllMismatch(..) | AnalysisError::OffGrid(_) | AnalysisError::NotDegenerate(_) => {
                CliError::Config(e.to_string())
            }
            AnalysisError::Degenerate(r) => CliError::Degenerate(r),
            AnalysisError::Dynamics(d) => d.into(),
            other => CliError::Other(other.into()),
        }
    }
}

impl From<RuleError> for CliError {
    fn from(e: RuleError) -> Self {
        match e {
            RuleError::Degenerate => CliError::Degenerate("(selected)".into()),
            other => CliError::Config(other.to_string()),
        }
    }
}
