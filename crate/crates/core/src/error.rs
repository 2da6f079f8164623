//! Error type shared by every module of the crate.

use thiserror::Error;

/// Failures reported by the spectral, correlation, covariance and simulation routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("band index {m} out of range for a {bands}-band decomposition")]
    UnknownBand { m: usize, bands: usize },

    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    #[error("filter bank is not para-unitary (residual {residual:.3e})")]
    NotParaUnitary { residual: f64 },

    #[error("quadrature did not converge: {0}")]
    QuadratureNonConvergent(String),

    #[error("invalid band for this operation: {0}")]
    InvalidBand(String),

    #[error("lag {0} is required but missing from the input sequence")]
    MissingLag(f64),

    #[error("phase information unavailable: {0}")]
    PhaseUnavailable(String),

    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    #[error("correlation provider cannot evaluate argument {0}")]
    GammaDomainExceeded(f64),

    #[error("noise model is not separable")]
    NotSeparable,

    #[error("invalid subband: {0}")]
    InvalidSubband(String),

    #[error("noise covariance is not integrable: {0}")]
    NotIntegrable(String),

    #[error("circulant embedding is not positive semi-definite (min eigenvalue {0:.3e})")]
    NonPositiveDefinite(f64),

    #[error("unknown table id '{0}'")]
    UnknownTable(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// True for failures of the numerical machinery rather than of the inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::QuadratureNonConvergent(_)
                | Error::DegenerateFit(_)
                | Error::GammaDomainExceeded(_)
                | Error::NonPositiveDefinite(_)
                | Error::NotParaUnitary { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
