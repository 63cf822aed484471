use thiserror::Error;

/// Errors raised by the geometry routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeoError {
    #[error("invalid dimension: n = {0}, need n >= 2")]
    InvalidDimension(usize),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("conditioning error: {0}")]
    Conditioning(String),

    #[error("singular automorphism: lambda must be nonzero")]
    Singular,

    #[error("constraint violation: {0}")]
    ConstraintViolation(String),
}

impl GeoError {
    /// True for errors caused by ill-conditioned or degenerate numerical input
    /// rather than by invalid arguments.
    pub fn is_conditioning(&self) -> bool {
        matches!(self, GeoError::Conditioning(_))
    }
}

pub type Result<T> = std::result::Result<T, GeoError>;

pub(crate) fn check_len(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(GeoError::DimensionMismatch { expected, found })
    }
}
