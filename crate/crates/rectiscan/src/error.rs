use std::fmt::Display;

/// Failure of a run, split by exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// bad flags, unknown names, out-of-range scales, missing paths
    #[error("config error: {0}")]
    Config(String),
    /// unreadable or malformed input, computations the data cannot support
    #[error("data error: {0}")]
    Data(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Data(_) => 3,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

/// Attaches an exit class to foreign errors.
pub trait Classify<T> {
    fn or_config(self, context: &str) -> CliResult<T>;
    fn or_data(self, context: &str) -> CliResult<T>;
}

impl<T, E: Display> Classify<T> for Result<T, E> {
    fn or_config(self, context: &str) -> CliResult<T> {
        self.map_err(|e| CliError::Config(format!("{context}: {e}")))
    }

    fn or_data(self, context: &str) -> CliResult<T> {
        self.map_err(|e| CliError::Data(format!("{context}: {e}")))
    }
}

/// Scale and kernel errors are configuration problems; everything else the
/// core reports is about the data.
pub fn from_core(context: &str, e: rectiscan_core::Error) -> CliError {
    use rectiscan_core::Error as E;
    match e {
        E::Range { .. } | E::UnsupportedKernel(_) => CliError::Config(format!("{context}: {e}")),
        E::InvalidArgument(_) | E::Size { .. } => CliError::Data(format!("{context}: {e}")),
    }
}
