//! Error type shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Argument outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Requested selection cannot be realized under the given budgets.
    #[error("infeasible: {0}")]
    Infeasible(String),

    /// Closed-form path requested for a distribution that has none.
    #[error("no closed form: {0}")]
    NoClosedForm(String),

    /// Adaptive quadrature hit its refinement cap before reaching the target.
    #[error("quadrature did not converge: achieved error {achieved:.3e}, target {target:.3e}")]
    QuadratureAccuracy { achieved: f64, target: f64 },

    /// Root bracket does not straddle a sign change.
    #[error("invalid root bracket [{lo:.6e}, {hi:.6e}]: f(lo)={f_lo:.3e}, f(hi)={f_hi:.3e}")]
    BracketSign { lo: f64, hi: f64, f_lo: f64, f_hi: f64 },

    /// Root finder exhausted its iteration budget.
    #[error("root finding exceeded {max_iter} iterations (bracket width {width:.3e})")]
    RootIterations { max_iter: usize, width: f64 },

    /// Catch-all numerical failure (overflow, degenerate denominator, ...).
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// Malformed input data.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    /// Invalid experiment configuration.
    #[error("config error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
