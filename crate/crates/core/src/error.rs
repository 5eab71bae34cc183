use thiserror::Error;

/// Errors raised by the numerical routines of this crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument violates an operation's precondition.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Bessel evaluation requested outside the range where accuracy has been validated.
    #[error("out of validated domain: x = {x}, n_max = {n_max} (limits: x <= {max_x}, n_max <= {max_n})")]
    OutOfValidatedDomain {
        x: f64,
        n_max: usize,
        max_x: f64,
        max_n: usize,
    },

    /// The circle radius lies outside the open interval between the first two zeros of J0.
    #[error("radius {r} outside ({r1}, {r2}); the containment argument requires r between the first two zeros of J0")]
    RadiusOutsideAdmissible { r: f64, r1: f64, r2: f64 },

    /// No finite threshold makes the Kac-Rice integrand positive.
    #[error("integrand cannot be made positive at r = {0} (J0(r) vanishes)")]
    IntegrandNotPositive(f64),

    /// Census or estimate inputs are geometrically incompatible.
    #[error("geometry mismatch: {0}")]
    Geometry(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
