use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("NegativeDensity: sample {index} is {value:e}")]
    NegativeDensity { index: usize, value: f64 },
    #[error("MassMismatch: total mass {mass} deviates from 1 by more than {tolerance:e}")]
    MassMismatch { mass: f64, tolerance: f64 },
    #[error("SupportOverflow: convolution needs {required} samples, limit is {limit}")]
    SupportOverflow { required: usize, limit: usize },
    #[error("GridTooSmall: {0}")]
    GridTooSmall(String),
    #[error("GridMismatch: {0}")]
    GridMismatch(String),
    #[error("WindowTooSmall: window captures mass {captured}, deficit exceeds {tolerance:e}")]
    WindowTooSmall { captured: f64, tolerance: f64 },
    #[error("invalid state: {0}")]
    InvalidState(String),
    #[error("MissingApparatusState: scenario {0} requires an apparatus state T")]
    MissingApparatusState(String),
    #[error("ContractViolation: {0}")]
    ContractViolation(String),
    #[error("PreconditionViolated: {0}")]
    PreconditionViolated(String),
}

impl Error {
    /// True for failures of a numerical adequacy guard (grid, window, mass)
    /// rather than a malformed request.
    pub fn is_numerical_guard(&self) -> bool {
        matches!(
            self,
            Error::NegativeDensity { .. }
                | Error::MassMismatch { .. }
                | Error::SupportOverflow { .. }
                | Error::GridTooSmall(_)
                | Error::WindowTooSmall { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
