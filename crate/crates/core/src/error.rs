use crate::netcore::Pair;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Argument outside the domain of an operation (bad pair, time outside the horizon, ...).
    #[error("domain error: {0}")]
    Domain(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("data error: {0}")]
    Data(String),

    #[error("simulation error on pair {pair} at t={time}: {reason}")]
    Simulation { pair: Pair, time: f64, reason: String },

    #[error("no data in kernel window around t0={t0}")]
    NoDataInWindow { t0: f64 },

    #[error("Newton solver did not converge after {iters} iterations (|grad|={grad_norm:e}, last iterate {last:?})")]
    NonConvergence { iters: usize, grad_norm: f64, last: Vec<f64> },

    #[error("Sigma plug-in is singular at t={t}")]
    SingularSigma { t: f64 },

    #[error("degenerate variance: B={0}")]
    DegenerateVariance(f64),

    #[error("test aborted: {0}")]
    Test(String),

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("instance too large: {0}")]
    TooLarge(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for failures of the numerical pipeline (as opposed to bad input).
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::NoDataInWindow { .. }
                | Error::NonConvergence { .. }
                | Error::SingularSigma { .. }
                | Error::DegenerateVariance(_)
                | Error::Test(_)
                | Error::Numeric(_)
                | Error::Simulation { .. }
        )
    }
}
