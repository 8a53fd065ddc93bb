use num_complex::Complex64;
use thiserror::Error;

/// Errors produced by the laboratory.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain where a formula is defined.
    #[error("domain error: {0}")]
    Domain(String),

    /// Model parameters violate a standing assumption.
    #[error("invalid model parameters: {0}")]
    InvalidParams(String),

    /// Degenerate or inconsistent discretization.
    #[error("grid error: {0}")]
    Grid(String),

    /// A dense linear-algebra kernel failed.
    #[error("linear algebra failure: {0}")]
    LinAlg(String),

    /// Two roots of the characteristic cubic are too close for the
    /// partial-fraction kernels to be evaluated.
    #[error("nearly repeated roots at lambda_n = {lambda_n:e} (relative separation {separation:e})")]
    NearlyRepeatedRoots { lambda_n: f64, separation: f64 },

    /// The cubic has three real roots, so there is no conjugate pair.
    #[error("three real roots at lambda_n = {lambda_n:e}: {roots:?}")]
    RootPattern { lambda_n: f64, roots: [Complex64; 3] },

    /// A quadrature rule could not be applied.
    #[error("quadrature error: {0}")]
    Quad(String),

    /// Configuration could not be parsed or failed validation.
    #[error("configuration error: {0}")]
    Config(String),

    /// Reading or writing experiment artifacts failed.
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

/// Non-fatal diagnostics attached to results.
#[derive(Debug, Clone, PartialEq)]
pub enum Warning {
    /// Two retained eigenvalues are closer than the clustering threshold.
    EigenCluster { mode: usize, gap: f64 },
    /// A normal-equation matrix has a condition estimate beyond 1e14.
    Conditioning { estimate: f64 },
}

impl std::fmt::Display for Warning {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Warning::EigenCluster { mode, gap } => {
                write!(f, "eigenvalues {mode} and {} cluster (gap {gap:e})", mode + 1)
            }
            Warning::Conditioning { estimate } => {
                write!(f, "normal equations ill-conditioned (estimate {estimate:e})")
            }
        }
    }
}
