use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("parse error: {0}")]
    Parse(String),

    /// A matrix function was asked for outside its domain.
    #[error("{function} is undefined at eigenvalue {eigenvalue:e}")]
    Domain {
        function: &'static str,
        eigenvalue: f64,
    },

    /// The matrix is not (numerically) positive definite.
    #[error("matrix is not positive definite: min eigenvalue {min_eigenvalue:e}, max eigenvalue {max_eigenvalue:e}")]
    Singular {
        min_eigenvalue: f64,
        max_eigenvalue: f64,
    },

    /// `ρ ± hA` left the positive definite cone.
    #[error("perturbation with h = {h:e} leaves the positive definite cone (critical h = {critical_h:e})")]
    OutsideCone { h: f64, critical_h: f64 },

    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    Convergence { iterations: usize, residual: f64 },

    #[error("unsupported: {0}")]
    Unsupported(String),
}

impl Error {
    /// True for errors that stem from the numeric domain (non-PD input,
    /// functions outside their domain) rather than malformed input.
    pub fn is_numeric_domain(&self) -> bool {
        matches!(
            self,
            Error::Domain { .. } | Error::Singular { .. } | Error::OutsideCone { .. }
        )
    }
}
