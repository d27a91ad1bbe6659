use std::process::ExitCode;

/// Failure of a CLI command, split by who has to fix it.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// The configuration or the command line is wrong. Exit code 1.
    #[error("config error: {0}")]
    Config(String),
    /// The data could not be read or does not suit the pipeline. Exit code 2.
    #[error("data error: {0}")]
    Data(String),
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        match self {
            CliError::Config(_) => ExitCode::from(1),
            CliError::Data(_) => ExitCode::from(2),
        }
    }
}

impl From<segpipe::Error> for CliError {
    /// Parameter and pipeline-shape errors are configuration errors even
    /// when they only surface while fitting; everything else is data.
    fn from(e: segpipe::Error) -> Self {
        use segpipe::Error as E;
        match e.root() {
            E::UnknownFeature { .. }
            | E::InvalidParameter(_)
            | E::InvalidFraction(_)
            | E::UnknownParamPath(_)
            | E::InvalidPipeline(_) => CliError::Config(e.to_string()),
            _ => CliError::Data(e.to_string()),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
