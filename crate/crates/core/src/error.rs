use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error(
        "group-velocity mismatch D = 1/v1 - 1/v2 = {value:e} s/mm must be positive; \
         swap the beam labels so that beam 1 is the slower one"
    )]
    NonPositiveMismatch { value: f64 },

    #[error("non-finite integrand value {value} at {at:?}")]
    NonFiniteIntegrand { at: Vec<f64>, value: String },

    #[error(
        "kernel coefficients lost their positive-definite real part (det = {re:e}) at z1 = {z1} mm, z2 = {z2} mm"
    )]
    BranchGuard { z1: f64, z2: f64, re: f64 },

    #[error(
        "kernel is degenerate without frequency filters; \
         use the closed-form unfiltered evaluation instead"
    )]
    DegenerateKernel,

    #[error("outside the validity regime: {0}")]
    OutOfRegime(String),

    #[error("integration window truncates the field: boundary/peak = {ratio:e} (limit {limit:e})")]
    WindowTruncation { ratio: f64, limit: f64 },

    #[error("search for the dip minimum failed: {0}")]
    SearchFailed(String),

    #[error("tabulated spectrum: {0}")]
    Spectrum(String),
}
