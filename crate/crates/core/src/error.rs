use num_complex::Complex64;
use thiserror::Error;

use crate::farey::Slope;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Validation(String),

    #[error("numeric range exceeded: {0}")]
    NumericRange(String),

    #[error("the identity map fixes every point")]
    IdentityFixedPoints,

    #[error("recursion disagrees with the direct product: {0}")]
    Consistency(String),

    #[error("root finder did not converge for indices {unconverged:?}")]
    RootsNotConverged {
        roots: Vec<Complex64>,
        unconverged: Vec<usize>,
    },

    #[error("no convergent ray seed for slope {slope}")]
    SeedFailure { slope: Slope },

    #[error("lost the branch of slope {slope} after t = {last_t} (rho = {last_rho})")]
    BranchTracking {
        slope: Slope,
        last_t: f64,
        last_rho: Complex64,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for failures caused by bad user input rather than numerics.
    pub fn is_validation(&self) -> bool {
        matches!(self, Error::Validation(_))
    }

    /// A copy of this error for replaying cached failures. I/O and format
    /// errors are not cloneable and are flattened to their message.
    pub fn replay(&self) -> Error {
        match self {
            Error::Validation(m) => Error::Validation(m.clone()),
            Error::NumericRange(m) => Error::NumericRange(m.clone()),
            Error::IdentityFixedPoints => Error::IdentityFixedPoints,
            Error::Consistency(m) => Error::Consistency(m.clone()),
            Error::RootsNotConverged { roots, unconverged } => Error::RootsNotConverged {
                roots: roots.clone(),
                unconverged: unconverged.clone(),
            },
            Error::SeedFailure { slope } => Error::SeedFailure { slope: *slope },
            Error::BranchTracking {
                slope,
                last_t,
                last_rho,
            } => Error::BranchTracking {
                slope: *slope,
                last_t: *last_t,
                last_rho: *last_rho,
            },
            other => Error::Consistency(other.to_string()),
        }
    }
}
