//! Error type shared by every module of the crate.

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Everything that can go wrong while building models or computing indices.
///
/// `Domain` means the caller handed us inputs that violate a documented
/// precondition (bad parameters, samples outside the family support, spec
/// limits out of order, ...).  `Numeric` means the inputs were admissible but
/// the computation could not be carried out reliably (singular covariance,
/// iteration that failed to converge, too many degenerate bootstrap
/// resamples, ...).
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// Input violates a precondition of the requested operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// Computation failed for admissible input.
    #[error("numeric error: {0}")]
    Numeric(String),
}

impl Error {
    /// Convenience constructor for [`Error::Domain`].
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    /// Convenience constructor for [`Error::Numeric`].
    pub fn numeric(msg: impl Into<String>) -> Self {
        Error::Numeric(msg.into())
    }
}
