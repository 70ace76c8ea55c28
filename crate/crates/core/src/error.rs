//! Error type shared by every module of the crate.

use thiserror::Error;

use crate::engine::Termination;

pub type Result<T> = std::result::Result<T, BounceError>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BounceError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    /// The lower mass stays above the floor past the search horizon.
    #[error("no contact before t = {t_limit} (flight started at t = {t_start})")]
    NoContact { t_start: f64, t_limit: f64 },

    /// Zero-velocity contact with the lower mass accelerating into the floor.
    #[error("degenerate contact at t = {t}: xdot = {xdot:e}, xddot = {xddot:e}")]
    DegenerateContact { t: f64, xdot: f64, xddot: f64 },

    #[error("state is not the onset of a sticky event: {0}")]
    NotStickyOnset(String),

    #[error("integrator failed at t = {t} after {retries} step rejections")]
    StepFailure { t: f64, retries: usize },

    /// A scalar map left its admissible interval.
    #[error("iterate {n} escaped the admissible interval: {value}")]
    IterateEscaped { n: usize, value: f64 },

    /// The implicit map has no preimage in [0, 1].
    #[error("no root in [0, 1] at step {n}: target {target} exceeds f(1) = 3")]
    NoRoot { n: usize, target: f64 },

    #[error("insufficient tail: need {needed} samples, have {available}")]
    InsufficientTail { needed: usize, available: usize },

    #[error("insufficient flights: need {needed}, have {available}")]
    InsufficientFlights { needed: usize, available: usize },

    #[error("log terminated with {0:?}, which carries no asymptotic tail")]
    NotAsymptotic(Termination),

    #[error("outside the domain of definition: {0}")]
    Domain(String),
}
