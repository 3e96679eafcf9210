use thiserror::Error;

/// Errors raised by the spectral computations.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A parameter violates a type invariant (range, finiteness, ordering).
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    /// The operation only applies to a different `w` regime.
    #[error("w = {w} is handled by {route}")]
    WrongRegime { w: f64, route: &'static str },

    /// Evaluation at the pole of the Möbius map.
    #[error("Möbius map evaluated at its pole z = w = {0}")]
    Pole(f64),

    /// Rational/irrational tag missing or of the wrong kind.
    #[error("structural requirement not met: {0}")]
    Structural(String),

    /// A precondition on the inputs of a dynamical check failed.
    #[error("precondition failed: {0}")]
    Precondition(String),

    /// Two functions live on different grids or geometries.
    #[error("domain mismatch: {0}")]
    DomainMismatch(String),

    /// A bracket could not be established or the iteration did not converge.
    #[error("solver failure: {0}")]
    Solver(String),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    /// True for failures of the numerical machinery rather than of the inputs.
    pub fn is_internal(&self) -> bool {
        matches!(self, Error::Solver(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
