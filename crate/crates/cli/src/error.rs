use matchplan::Error;

/// Failures of a command, split by exit code: 1 for bad input, 2 for a
/// solver or oracle failure.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Solver(String),
    #[error("{0}")]
    Checks(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) => 1,
            CliError::Solver(_) | CliError::Checks(_) => 2,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Validation(_)
            | Error::BadGeneratorParams(_)
            | Error::UnknownPolicy(_)
            | Error::UnsupportedHorizon { .. }
            | Error::IncompatibleAlgorithmDesign { .. }
            | Error::TimeInhomogeneousMultiPeriod => CliError::Input(e.to_string()),
            _ => CliError::Solver(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Input(e.to_string())
    }
}
