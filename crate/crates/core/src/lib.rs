//! Second-order statistics of stationary noise analysed by M-band dual-tree
//! wavelet decompositions.
//!
//! The crate is organised bottom-up: [`spectra`] describes the wavelets in the
//! Fourier domain, [`xcorr`] computes the deterministic primal/dual
//! cross-correlations, [`covariance`] propagates noise models through them,
//! [`simulate`] checks everything by Monte Carlo and [`report`] produces
//! tables and acceptance checks.

pub mod covariance;
pub mod error;
pub mod quad;
pub mod report;
pub mod simulate;
pub mod special;
pub mod spectra;
pub mod xcorr;

pub use error::{Error, Result};
