use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("series not in catalog: {0}")]
    UnknownSeries(i64),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("recursion singular: 1-d_0 = 0 (t = 1)")]
    SingularRecursion,

    #[error("resource limit: {0}")]
    Resource(String),

    #[error("increase precision: {0}")]
    InsufficientPrecision(String),

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// Usage-class errors are the caller's fault (bad id, bad argument);
    /// everything else is a computational failure.
    pub fn is_usage(&self) -> bool {
        matches!(
            self,
            Error::UnknownSeries(_) | Error::Domain(_) | Error::Parse(_)
        )
    }
}
