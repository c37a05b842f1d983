use thiserror::Error;

/// Errors raised by the analysis pipeline.
///
/// Variants split into input-validation failures and resource-cap failures;
/// [`Error::is_resource`] tells the two apart for exit-code mapping.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("not contractive: {0}")]
    NotContractive(String),

    #[error("invalid measure: {0}")]
    InvalidMeasure(String),

    #[error("invalid system: {0}")]
    InvalidSpec(String),

    #[error("common linear part required (every factor must share one ratio): {0}")]
    ShapeRequired(String),

    #[error("invalid polynomial: {0}")]
    InvalidPolynomial(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("enumeration cap exceeded: {needed} > {cap}; lower the level")]
    CapExceeded { needed: u128, cap: u128 },

    #[error("integer overflow in exact coordinates at level {0}; lower the level")]
    Overflow(usize),

    #[error("cell-mass fixed point is not unique")]
    NotUnique,
}

impl Error {
    pub fn is_resource(&self) -> bool {
        matches!(self, Error::CapExceeded { .. } | Error::Overflow(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
