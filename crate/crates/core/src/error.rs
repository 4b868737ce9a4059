use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("oscillator count must be at least {min}, got {n}")]
    InvalidSize { n: usize, min: usize },

    #[error("shape mismatch: expected {expected:?}, found {found:?}")]
    ShapeMismatch {
        expected: (usize, usize),
        found: (usize, usize),
    },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: String, reason: String },

    #[error("site {site} is outside 1..={n}")]
    SiteOutOfRange { site: usize, n: usize },

    #[error("drift matrix is not stable (largest real part {max_real:e}); no steady state exists")]
    Unstable { max_real: f64 },

    #[error("near-defective drift spectrum: min |λ_j + λ_k| = {min_sum:e}")]
    NearDefective { min_sum: f64 },

    #[error("spectral solve is ill-conditioned (relative residual {relative_residual:e})")]
    IllConditioned { relative_residual: f64 },

    #[error("singular linear system in {0}")]
    Singular(&'static str),

    #[error("not applicable: {0}")]
    NotApplicable(String),

    #[error("unphysical covariance: occupation {occupation:e} at site {site}")]
    Unphysical { site: usize, occupation: f64 },

    #[error("eigendecomposition did not converge")]
    EigenFailure,

    #[error("integration produced a non-finite state at step {step} (t = {time})")]
    Diverged { step: usize, time: f64 },
}

impl Error {
    pub(crate) fn param(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            field: field.into(),
            reason: reason.into(),
        }
    }

    /// True when no stationary state exists for the generator, as opposed
    /// to a numerical failure of a particular solver.
    pub fn is_no_steady_state(&self) -> bool {
        matches!(self, Error::Unstable { .. } | Error::Singular(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
