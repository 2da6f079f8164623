//! Deterministic cross-correlations `γ_{ψ_m, ψ_m'^H}(τ) = ∫ ψ_m(x) ψ_m'^H(x−τ) dx`
//! between primal and dual basis functions.

mod closed;
mod numeric;
mod packets;

pub use closed::{
    franklin_a1_autocorr, franklin_gamma_chi, franklin_gamma_mother, franklin_gamma_scaling,
    gamma_haar_closed, gamma_meyer_closed, gamma_shannon_closed, hadamard_combination,
    hadamard_gamma, haar_gamma_scaling, meyer_gamma, meyer_i_eps, shannon_gamma,
};
pub use numeric::{
    autocorr_quad, gamma_mother_quad, gamma_quad, gamma_scaling_quad, interband_gamma, BAND_LIMITED_TOL,
    GENERAL_TOL,
};
pub use packets::{
    filter_autocorr, hadamard_by_recursion, packet_recursion, parent_lags, walsh_autocorr, Parity,
};

use crate::error::{Error, Result};
use crate::spectra::{Family, WaveletFamily};
use rayon::prelude::*;
use std::fmt;

/// A correlation value with its estimated absolute error.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct GammaValue {
    pub value: f64,
    pub abs_err: f64,
}

/// How a correlation value was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    /// Closed form when one exists, quadrature otherwise.
    Auto,
    ClosedForm,
    Quadrature,
    PacketRecursion,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Auto => "auto",
            Method::ClosedForm => "closed_form",
            Method::Quadrature => "quadrature",
            Method::PacketRecursion => "packet_recursion",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "auto" => Ok(Method::Auto),
            "closed" | "closed_form" => Ok(Method::ClosedForm),
            "quad" | "quadrature" => Ok(Method::Quadrature),
            "recursion" | "packet_recursion" => Ok(Method::PacketRecursion),
            _ => Err(Error::InvalidParam(format!("unknown method '{s}'"))),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// `γ_{ψ_m, ψ_m'^H}` on a lag grid.
#[derive(Clone, Debug, PartialEq)]
pub struct CorrelationSequence {
    pub family: String,
    pub bands: usize,
    pub eps: Option<f64>,
    pub d: i64,
    pub m: usize,
    pub mprime: usize,
    pub lags: Vec<f64>,
    pub values: Vec<f64>,
    pub method: Method,
    pub abs_err: Vec<f64>,
}

impl CorrelationSequence {
    /// Value at `tau`, if it lies on the grid.
    pub fn at(&self, tau: f64) -> Option<f64> {
        self.lags
            .iter()
            .position(|l| (l - tau).abs() < 1e-9)
            .map(|i| self.values[i])
    }
}

/// Closed-form value when the family provides one.
fn closed_form(fam: &WaveletFamily, m: usize, mp: usize, tau: f64, d: i64) -> Option<Result<(GammaValue, Method)>> {
    let closed = |v: f64, e: f64| Ok((GammaValue { value: v, abs_err: e }, Method::ClosedForm));
    if m != mp {
        return match fam.family() {
            Family::Shannon => Some(closed(0.0, 0.0)),
            _ => None,
        };
    }
    match fam.family() {
        Family::Shannon => Some(closed(shannon_gamma(m, tau, d), 1e-15)),
        Family::Meyer { eps, taper, .. } => Some(
            meyer_gamma(fam.bands(), *eps, *taper, m, tau, d).map(|v| (GammaValue { value: v, abs_err: 1e-12 }, Method::ClosedForm)),
        ),
        Family::HaarPacket { depth } => Some(if m == 0 {
            closed(haar_gamma_scaling(tau, d), 1e-10)
        } else if *depth == 1 {
            gamma_haar_closed(1, tau, d).and_then(|v| closed(v, 1e-14))
        } else {
            hadamard_gamma(m, tau).map(|v| (GammaValue { value: v, abs_err: 1e-13 }, Method::PacketRecursion))
        }),
        Family::Franklin => Some(franklin_closed(m, tau, d)),
        Family::BattleLemarie(s) if s.order() == 1 => Some(franklin_closed(m, tau, d)),
        _ => None,
    }
}

fn franklin_closed(m: usize, tau: f64, d: i64) -> Result<(GammaValue, Method)> {
    let v = if m == 0 {
        GammaValue {
            value: franklin_gamma_scaling(tau, d)?,
            abs_err: 1e-9,
        }
    } else {
        GammaValue {
            value: franklin_gamma_mother(tau, 1e-12),
            abs_err: 1e-11,
        }
    };
    Ok((v, Method::ClosedForm))
}

/// Whether a closed form (or closed recursion) exists for this pair.
pub fn has_closed_form(fam: &WaveletFamily, m: usize, mp: usize) -> bool {
    closed_form(fam, m.min(fam.bands() - 1), mp.min(fam.bands() - 1), 0.5, 0).is_some()
}

/// `γ_{ψ_m, ψ_m'^H}(τ)` with the requested method. Returns the method used.
pub fn gamma(
    fam: &WaveletFamily,
    m: usize,
    mp: usize,
    tau: f64,
    d: i64,
    method: Method,
) -> Result<(GammaValue, Method)> {
    fam.check_band(m)?;
    fam.check_band(mp)?;
    match method {
        Method::Auto => match closed_form(fam, m, mp, tau, d) {
            Some(r) => r,
            None => Ok((gamma_quad(fam, m, mp, tau, d)?, Method::Quadrature)),
        },
        Method::ClosedForm => closed_form(fam, m, mp, tau, d).unwrap_or_else(|| {
            Err(Error::InvalidParam(format!(
                "no closed form for {} bands ({m}, {mp})",
                fam.label()
            )))
        }),
        Method::Quadrature => Ok((gamma_quad(fam, m, mp, tau, d)?, Method::Quadrature)),
        Method::PacketRecursion => {
            let seq = correlation_sequence(fam, m, mp, d, &[tau], Method::PacketRecursion)?;
            Ok((
                GammaValue {
                    value: seq.values[0],
                    abs_err: seq.abs_err[0],
                },
                Method::PacketRecursion,
            ))
        }
    }
}

fn empty_sequence(fam: &WaveletFamily, m: usize, mp: usize, d: i64, method: Method) -> CorrelationSequence {
    CorrelationSequence {
        family: fam.label(),
        bands: fam.bands(),
        eps: fam.eps(),
        d,
        m,
        mprime: mp,
        lags: Vec::new(),
        values: Vec::new(),
        method,
        abs_err: Vec::new(),
    }
}

/// Evaluates `γ` on a lag grid, in parallel over lags with ordered output.
pub fn correlation_sequence(
    fam: &WaveletFamily,
    m: usize,
    mp: usize,
    d: i64,
    lags: &[f64],
    method: Method,
) -> Result<CorrelationSequence> {
    fam.check_band(m)?;
    fam.check_band(mp)?;
    if method == Method::PacketRecursion {
        return packet_sequence(fam, m, mp, d, lags);
    }
    let results: Vec<Result<(GammaValue, Method)>> = lags
        .par_iter()
        .map(|&t| gamma(fam, m, mp, t, d, method))
        .collect();
    let mut seq = empty_sequence(fam, m, mp, d, method);
    for (t, r) in lags.iter().zip(results) {
        let (g, used) = r?;
        seq.lags.push(*t);
        seq.values.push(g.value);
        seq.abs_err.push(g.abs_err);
        seq.method = used;
    }
    Ok(seq)
}

fn packet_sequence(fam: &WaveletFamily, m: usize, mp: usize, d: i64, lags: &[f64]) -> Result<CorrelationSequence> {
    if m != mp || m == 0 {
        return Err(Error::InvalidBand(
            "the packet recursion applies to m = m' ≥ 1".into(),
        ));
    }
    let label = fam.label();
    let mut seq = match fam.family() {
        Family::HaarPacket { .. } => {
            let base = |ls: &[f64]| -> Result<CorrelationSequence> {
                let mut s = empty_sequence(fam, 1, 1, d, Method::ClosedForm);
                for &t in ls {
                    s.lags.push(t);
                    s.values.push(gamma_haar_closed(1, t, d)?);
                    s.abs_err.push(1e-14);
                }
                Ok(s)
            };
            hadamard_by_recursion(m, lags, &base)?
        }
        Family::CustomFir { bank, .. } if bank.packet_depth().is_some() => {
            let g0 = filter_autocorr(&bank.filters()[0]);
            let g1 = filter_autocorr(&bank.filters()[1]);
            let reach = g0.len().max(g1.len()) - 1;
            custom_packet(fam, m, lags, d, &g0, &g1, reach)?
        }
        _ => {
            return Err(Error::InvalidParam(format!(
                "packet recursion is not available for {label}"
            )))
        }
    };
    seq.family = label;
    seq.bands = fam.bands();
    Ok(seq)
}

fn custom_packet(
    fam: &WaveletFamily,
    m: usize,
    lags: &[f64],
    d: i64,
    g0: &[f64],
    g1: &[f64],
    reach: usize,
) -> Result<CorrelationSequence> {
    if m == 1 {
        return correlation_sequence(fam, 1, 1, d, lags, Method::Quadrature);
    }
    let parity = if m % 2 == 0 { Parity::Even } else { Parity::Odd };
    let parent = custom_packet(fam, m / 2, &parent_lags(lags, reach), d, g0, g1, reach)?;
    let ga = if m % 2 == 0 { g0 } else { g1 };
    packet_recursion(&parent, ga, parity, lags)
}

/// Power-law fit `|γ(τ)| ≈ C |τ|^{−p}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AsymptoticBound {
    pub exponent: f64,
    /// Signed `C`, taking the sign of the largest-lag sample.
    pub leading_coeff: f64,
    pub valid_from: f64,
    /// RMS residual of the log-log fit.
    pub residual: f64,
}

/// Least-squares slope of `log|γ|` against `log|τ|`.
pub fn decay_exponent_fit(lags: &[f64], values: &[f64]) -> Result<AsymptoticBound> {
    if lags.len() != values.len() || lags.len() < 8 {
        return Err(Error::InvalidParam("decay fit needs at least 8 lags".into()));
    }
    let pts: Vec<(f64, f64, f64)> = lags
        .iter()
        .zip(values)
        .filter(|(t, v)| t.abs() > 0.0 && v.abs() > 1e-14)
        .map(|(t, v)| (t.abs().ln(), v.abs().ln(), *v))
        .collect();
    if pts.len() < 2 {
        return Err(Error::DegenerateFit(
            "fewer than two lags carry values above 1e-14".into(),
        ));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::DegenerateFit("all lags coincide".into()));
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual = (pts
        .iter()
        .map(|p| (p.1 - intercept - slope * p.0).powi(2))
        .sum::<f64>()
        / n)
        .sqrt();
    let last = pts
        .iter()
        .max_by(|a, b| a.0.partial_cmp(&b.0).unwrap())
        .unwrap();
    Ok(AsymptoticBound {
        exponent: -slope,
        leading_coeff: intercept.exp().copysign(last.2),
        valid_from: lags.iter().fold(f64::INFINITY, |a, t| a.min(t.abs())),
        residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fit_recovers_power_law() {
        let lags: Vec<f64> = (4..=64).map(f64::from).collect();
        let vals: Vec<f64> = lags.iter().map(|t| -0.3 * t.powf(-4.0)).collect();
        let b = decay_exponent_fit(&lags, &vals).unwrap();
        assert!((b.exponent - 4.0).abs() < 1e-10);
        assert!((b.leading_coeff + 0.3).abs() < 1e-10);
        assert!(matches!(
            decay_exponent_fit(&lags, &vec![0.0; lags.len()]),
            Err(Error::DegenerateFit(_))
        ));
    }

    #[test]
    fn method_names_round_trip() {
        for m in [Method::Auto, Method::ClosedForm, Method::Quadrature, Method::PacketRecursion] {
            assert_eq!(Method::parse(m.as_str()).unwrap(), m);
        }
    }
}
