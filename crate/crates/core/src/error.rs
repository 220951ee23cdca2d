use thiserror::Error;

pub type Result<T> = std::result::Result<T, CsqError>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CsqError {
    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    /// Coherent states of the well vanish on the walls, so every symbol there is 0/0.
    #[error("degenerate phase-space point: q = {q} is not strictly inside (0, {length})")]
    DegeneratePoint { q: f64, length: f64 },

    #[error("quadrature did not converge: error estimate {estimate:e} above tolerance {tolerance:e}")]
    Quadrature { estimate: f64, tolerance: f64 },

    #[error("function is not bounded on the integration interval (value {value} at {at})")]
    UnboundedFunction { at: f64, value: f64 },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("operator structure violated: {0}")]
    Structure(String),

    #[error("negative radicand {radicand:e} beyond roundoff tolerance")]
    NumericalConsistency { radicand: f64 },

    #[error("validation failed: {0}")]
    Validation(String),
}

pub(crate) fn positive(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(CsqError::InvalidParameter {
            name,
            value,
            reason: "must be finite and strictly positive",
        })
    }
}
