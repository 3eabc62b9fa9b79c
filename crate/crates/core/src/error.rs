use thiserror::Error;

use crate::geometry::Placement;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    /// A sensor coincides with the target, or a vector that must be
    /// normalized has zero length.
    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),

    /// Inputs violate an operation's preconditions (mismatched lengths,
    /// dimensions, non-unit bearings, ...).
    #[error("contract violation: {0}")]
    Contract(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    /// No placement with the requested structure exists for these
    /// coefficients.
    #[error("infeasible: {0}")]
    Infeasible(String),

    /// A sub-placement handed to a union is not regular optimal.
    #[error("part {part} is not a regular optimal placement: {reason}")]
    PartNotOptimal { part: usize, reason: String },

    /// The potential grew across an integration step.
    #[error(
        "step size too large at t = {t}: potential rose from {before:e} to {after:e}; reduce dt"
    )]
    StepSize { t: f64, before: f64, after: f64 },

    /// Non-finite state. Carries the last placement that was still finite.
    #[error("numerical failure at t = {t}: {reason}")]
    NumericalFailure {
        t: f64,
        reason: String,
        last_valid: Option<Box<Placement>>,
    },

    #[error("internal error: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
