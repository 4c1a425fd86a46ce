use alloc::string::String;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("scale {scale} outside the admissible range [{min}, {max}]")]
    Range { scale: f64, min: f64, max: f64 },
    #[error("kernel does not support this operation: {0}")]
    UnsupportedKernel(String),
    #[error("problem too large: {count} atoms exceeds the cap of {cap}")]
    Size { count: usize, cap: usize },
}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
