//! Process-level error classification: input problems exit with code 1,
//! numerical failures inside the pipeline exit with code 2.

use std::fmt;

use stoptime_core::Error as CoreError;

#[derive(Debug)]
pub enum CliError {
    /// Bad invocation, unreadable or malformed input, invalid configuration.
    Input(String),
    /// The pipeline itself failed on well-formed input.
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 1,
            CliError::Numerical(_) => 2,
        }
    }

    pub fn input(msg: impl Into<String>) -> Self {
        CliError::Input(msg.into())
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Input(m) => write!(f, "input error: {m}"),
            CliError::Numerical(m) => write!(f, "numerical failure: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

/// Whether a core error describes unusable input rather than a numerical
/// breakdown. Window failures are classified by their underlying cause.
fn is_input_class(e: &CoreError) -> bool {
    match e {
        CoreError::EmptyInput
        | CoreError::DimensionMismatch(_)
        | CoreError::InvalidGrid
        | CoreError::SeriesTooShort { .. }
        | CoreError::InvalidConfig(_)
        | CoreError::InsufficientTraining { .. }
        | CoreError::InsufficientErrors { .. }
        | CoreError::LagExceedsSample { .. } => true,
        CoreError::WindowFit { source, .. } => is_input_class(source),
        CoreError::NotSymmetric { .. }
        | CoreError::EstimationFailed(_)
        | CoreError::BootstrapFailures { .. } => false,
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        if is_input_class(&e) {
            CliError::Input(e.to_string())
        } else {
            CliError::Numerical(e.to_string())
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Input(e.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;
