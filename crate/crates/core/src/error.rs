use thiserror::Error;

use crate::lp::LpStatus;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid two-qubit state: {0}")]
    InvalidState(String),

    #[error("invalid observable: {0}")]
    InvalidObservable(String),

    #[error("invalid probability vector: {0}")]
    InvalidProbabilities(String),

    #[error("{name} = {value} is outside [{min}, {max}]")]
    OutOfRange {
        name: &'static str,
        value: f64,
        min: f64,
        max: f64,
    },

    #[error("CHSH value {0} exceeds the quantum maximum 2*sqrt(2)")]
    NonQuantum(f64),

    #[error("decoherence value {dec} is not falsifiable by CHSH (invertible range is [0.25, {limit}))")]
    NotFalsifiable { dec: f64, limit: f64 },

    #[error("{what} did not converge (spread {spread:e})")]
    NonConvergence { what: &'static str, spread: f64 },

    #[error("linear program ended with status {0:?}")]
    Lp(LpStatus),

    #[error("no positive falsification gap (best gap {best_gap} at t = {time} s)")]
    NoPositiveGap { best_gap: f64, time: f64 },

    #[error("dimension mismatch: {0}")]
    Dimension(String),
}

impl Error {
    pub(crate) fn out_of_range(name: &'static str, value: f64, min: f64, max: f64) -> Self {
        Error::OutOfRange {
            name,
            value,
            min,
            max,
        }
    }
}
