//! Packet recursion for wavelet packets built from a two-channel bank.

use super::{CorrelationSequence, Method};
use crate::error::{Error, Result};

/// Parity of the child band: `2m` (low-pass branch) or `2m+1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
}

/// Autocorrelation `γ_a[k] = Σ_q a[q] a[q−k]` for `k ≥ 0`.
pub fn filter_autocorr(a: &[f64]) -> Vec<f64> {
    (0..a.len())
        .map(|k| (k..a.len()).map(|q| a[q] * a[q - k]).sum())
        .collect()
}

/// `γ_a` of the Walsh-Hadamard filters `(1, ±1)/√2`.
pub fn walsh_autocorr(parity: Parity) -> [f64; 2] {
    match parity {
        Parity::Even => [1.0, 0.5],
        Parity::Odd => [1.0, -0.5],
    }
}

fn lookup(parent: &CorrelationSequence, x: f64) -> Result<f64> {
    parent
        .lags
        .iter()
        .position(|l| (l - x).abs() < 1e-9)
        .map(|i| parent.values[i])
        .ok_or(Error::MissingLag(x))
}

/// Child sequence `γ_child(τ) = γ_a[0] γ(2τ) + Σ_{k≥1} γ_a[k] (γ(2τ+k) + γ(2τ−k))`
/// at the requested lags.
///
/// `gamma_a` holds the filter autocorrelation at lags `0, 1, …`.
pub fn packet_recursion(
    parent: &CorrelationSequence,
    gamma_a: &[f64],
    parity: Parity,
    lags: &[f64],
) -> Result<CorrelationSequence> {
    if parent.m == 0 || parent.mprime != parent.m {
        return Err(Error::InvalidBand(
            "the packet recursion applies to m = m' ≥ 1".into(),
        ));
    }
    let mut values = Vec::with_capacity(lags.len());
    let mut errs = Vec::with_capacity(lags.len());
    for &t in lags {
        let mut v = gamma_a[0] * lookup(parent, 2.0 * t)?;
        let mut e = gamma_a[0].abs() * error_at(parent, 2.0 * t);
        for (k, g) in gamma_a.iter().enumerate().skip(1) {
            if *g == 0.0 {
                continue;
            }
            let kf = k as f64;
            v += g * (lookup(parent, 2.0 * t + kf)? + lookup(parent, 2.0 * t - kf)?);
            e += g.abs() * (error_at(parent, 2.0 * t + kf) + error_at(parent, 2.0 * t - kf));
        }
        values.push(v);
        errs.push(e);
    }
    let child = 2 * parent.m
        + match parity {
            Parity::Even => 0,
            Parity::Odd => 1,
        };
    Ok(CorrelationSequence {
        family: parent.family.clone(),
        bands: parent.bands,
        eps: parent.eps,
        d: parent.d,
        m: child,
        mprime: child,
        lags: lags.to_vec(),
        values,
        method: Method::PacketRecursion,
        abs_err: errs,
    })
}

fn error_at(seq: &CorrelationSequence, x: f64) -> f64 {
    seq.lags
        .iter()
        .position(|l| (l - x).abs() < 1e-9)
        .map(|i| seq.abs_err[i])
        .unwrap_or(0.0)
}

/// Lags `2τ + k` for `τ` in `lags` and `|k| ≤ reach`, sorted and deduplicated.
pub fn parent_lags(lags: &[f64], reach: usize) -> Vec<f64> {
    let mut out = Vec::new();
    for &t in lags {
        for k in -(reach as i64)..=(reach as i64) {
            out.push(2.0 * t + k as f64);
        }
    }
    out.sort_by(|a, b| a.partial_cmp(b).unwrap());
    out.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    out
}

/// Walsh-Hadamard band `m` at `lags` by repeated recursion from a parent
/// sequence supplied by `base` (band 1).
pub fn hadamard_by_recursion<F>(m: usize, lags: &[f64], base: &F) -> Result<CorrelationSequence>
where
    F: Fn(&[f64]) -> Result<CorrelationSequence>,
{
    if m == 0 {
        return Err(Error::InvalidBand("the packet recursion starts at m = 1".into()));
    }
    if m == 1 {
        return base(lags);
    }
    let parity = if m % 2 == 0 { Parity::Even } else { Parity::Odd };
    let parent = hadamard_by_recursion(m / 2, &parent_lags(lags, 1), base)?;
    packet_recursion(&parent, &walsh_autocorr(parity), parity, lags)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seq(m: usize, lags: Vec<f64>, values: Vec<f64>) -> CorrelationSequence {
        let n = lags.len();
        CorrelationSequence {
            family: "haar".into(),
            bands: 2,
            eps: None,
            d: 0,
            m,
            mprime: m,
            lags,
            values,
            method: Method::ClosedForm,
            abs_err: vec![0.0; n],
        }
    }

    #[test]
    fn walsh_filters_autocorrelation() {
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let g = filter_autocorr(&[r, -r]);
        assert!((g[0] - 1.0).abs() < 1e-15 && (g[1] + 0.5).abs() < 1e-15);
    }

    #[test]
    fn recursion_rejects_scaling_band_and_missing_lags() {
        let s = seq(0, vec![0.0, 1.0, 2.0], vec![0.1, 0.2, 0.3]);
        assert!(matches!(
            packet_recursion(&s, &[1.0, 0.5], Parity::Even, &[0.0]),
            Err(Error::InvalidBand(_))
        ));
        let s = seq(1, vec![0.0, 1.0, 2.0], vec![0.0, 0.2, 0.3]);
        assert!(matches!(
            packet_recursion(&s, &[1.0, 0.5], Parity::Even, &[1.0]),
            Err(Error::MissingLag(_))
        ));
    }

    #[test]
    fn zero_parent_gives_zero_child() {
        let lags: Vec<f64> = (-5..=5).map(f64::from).collect();
        let s = seq(1, lags, vec![0.0; 11]);
        let c = packet_recursion(&s, &[1.0, -0.5], Parity::Odd, &[1.0, 2.0]).unwrap();
        assert_eq!(c.values, vec![0.0, 0.0]);
        assert_eq!(c.m, 3);
    }
}
