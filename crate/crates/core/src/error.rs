use thiserror::Error;

/// Errors raised by the lab's operations.
///
/// The variants are grouped so that front ends can map them onto exit
/// statuses: [`LabError::is_contract`] covers violated preconditions and
/// [`LabError::is_numeric`] covers floating-point trouble.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum LabError {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("numeric error: {0}")]
    Numeric(String),

    #[error("contract violated: {0}")]
    Contract(String),

    #[error("decomposition failed: pivot {pivot:e} below threshold")]
    Decomposition { pivot: f64 },

    #[error("undefined ratio: f is the identity")]
    UndefinedRatio,

    #[error("budget exceeded: {0}")]
    Budget(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("no shear available: g lies in L")]
    NoShear,

    #[error("parse error: {0}")]
    Parse(String),

    #[error("io error: {0}")]
    Io(String),
}

impl LabError {
    pub fn is_numeric(&self) -> bool {
        matches!(self, LabError::Numeric(_) | LabError::Decomposition { .. })
    }

    pub fn is_contract(&self) -> bool {
        !self.is_numeric()
    }
}

impl From<std::io::Error> for LabError {
    fn from(e: std::io::Error) -> Self {
        LabError::Io(e.to_string())
    }
}

impl From<serde_json::Error> for LabError {
    fn from(e: serde_json::Error) -> Self {
        LabError::Parse(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, LabError>;
