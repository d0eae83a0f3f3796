use thiserror::Error;

/// Errors surfaced by the estimation library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A distribution or model parameter outside its admissible region.
    #[error("parameter `{name}` = {value} outside its domain ({constraint})")]
    ParameterDomain {
        name: String,
        value: f64,
        constraint: &'static str,
    },

    /// An argument outside the mathematical domain of a function, e.g. a
    /// probability outside (0, 1).
    #[error("domain error: {0}")]
    Domain(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// Model or moment specification that cannot be used as given.
    #[error("specification error: {0}")]
    Spec(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    /// Likelihood maximisation did not converge; carries the best parameter
    /// vector seen and its log-likelihood.
    #[error("fit did not converge after {iterations} iterations (best log-likelihood {loglik})")]
    FitNonConvergence {
        iterations: usize,
        best: Vec<f64>,
        loglik: f64,
    },

    #[error("singular matrix: {0}")]
    Singular(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_open_unit(name: &str, u: f64) -> Result<()> {
    if u > 0.0 && u < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("{name} = {u} must lie in (0, 1)")))
    }
}
