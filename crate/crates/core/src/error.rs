use thiserror::Error;

/// Errors produced by the spectral and renormalization routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("{quantity} = {value:e} is outside the domain {domain}")]
    Domain {
        quantity: &'static str,
        value: f64,
        domain: String,
    },

    #[error("frequency {omega:e} rad/s is not inside a propagating superlattice band")]
    NotPropagating { omega: f64 },

    #[error("dispersion oracle has no real solution at kΔz = {phase}")]
    OracleInconsistent { phase: f64 },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("mode does not belong to this line: {0}")]
    MismatchedMode(String),

    #[error("fit produced a non-positive amplitude ({name} = {value:e})")]
    NonPositiveFit { name: &'static str, value: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn positive(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            reason: format!("must be finite and > 0, got {value}"),
        })
    }
}
