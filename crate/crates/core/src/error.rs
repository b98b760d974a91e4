use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("points or sets belong to different systems: {0} vs {1}")]
    DomainMismatch(String, String),
    #[error("system {0} is not invertible; negative iterates unavailable")]
    NotInvertible(String),
    #[error("horizon mismatch: {0} vs {1}")]
    HorizonMismatch(usize, usize),
    #[error("time set mode {0} cannot support this certification")]
    BadMode(String),
    #[error("certificate failed re-validation: {0}")]
    CertificateInvalid(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("operation unsupported by system {0}: {1}")]
    Unsupported(String, String),
    #[error("resolution {0} beyond representable precision (max {1})")]
    ResolutionTooFine(u32, u32),
    #[error("word {0:?} is not admissible in system {1}")]
    InadmissibleWord(String, String),
    #[error("report validation failed: {0}")]
    ReportInvalid(String),
    #[error("serialization: {0}")]
    Serde(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Serde(e.to_string())
    }
}
