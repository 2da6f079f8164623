//! Wavelets generated by para-unitary FIR filter banks.

use crate::error::{Error, Result};
use num_complex::Complex64;
use std::f64::consts::PI;
use std::path::Path;

/// Residual tolerance of the para-unitarity check.
pub const PARA_UNITARY_TOL: f64 = 1e-8;
const CHECK_GRID: usize = 1024;

/// Value of a truncated infinite product with a bound on its relative error.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProductValue {
    pub value: Complex64,
    pub rel_bound: f64,
}

/// An M-band filter bank `h_0..h_{M−1}`, or a two-filter bank iterated into
/// a packet tree of depth `P` (`M = 2^P`).
#[derive(Clone, Debug, PartialEq)]
pub struct FilterBank {
    filters: Vec<Vec<f64>>,
    packet_depth: Option<u32>,
    // Σ k h_0[k] / √M: first-order phase of the omitted factors
    mean_delay: f64,
    // Σ k² |h_0[k]| / √M, for the truncation bound
    curvature: f64,
}

fn response(h: &[f64], w: f64) -> Complex64 {
    h.iter()
        .enumerate()
        .map(|(k, c)| Complex64::from_polar(*c, -(k as f64) * w))
        .sum()
}

impl FilterBank {
    /// Validates and wraps `M` filters.
    pub fn new(filters: Vec<Vec<f64>>) -> Result<Self> {
        Self::build(filters, None)
    }

    /// Two filters `a_0, a_1` iterated `depth` times.
    pub fn packet(a0: Vec<f64>, a1: Vec<f64>, depth: u32) -> Result<Self> {
        if depth == 0 || depth > 12 {
            return Err(Error::InvalidParam(format!(
                "packet depth must be in 1..=12, got {depth}"
            )));
        }
        Self::build(vec![a0, a1], Some(depth))
    }

    /// The Haar pair `[1, ±1]/√2`.
    pub fn haar() -> Self {
        let r = std::f64::consts::FRAC_1_SQRT_2;
        Self::new(vec![vec![r, r], vec![r, -r]]).expect("Haar filters are para-unitary")
    }

    fn build(filters: Vec<Vec<f64>>, packet_depth: Option<u32>) -> Result<Self> {
        if filters.len() < 2 {
            return Err(Error::InvalidParam("a filter bank needs at least two filters".into()));
        }
        if filters.iter().any(|h| h.is_empty() || h.iter().any(|c| !c.is_finite())) {
            return Err(Error::InvalidParam("filters must be non-empty and finite".into()));
        }
        let base = filters.len();
        let residual = para_unitary_residual(&filters);
        if residual > PARA_UNITARY_TOL {
            return Err(Error::NotParaUnitary { residual });
        }
        let dc = response(&filters[0], 0.0).re;
        if (dc - (base as f64).sqrt()).abs() > PARA_UNITARY_TOL {
            return Err(Error::InvalidParam(format!(
                "low-pass filter must satisfy H_0(0) = √M, got {dc}"
            )));
        }
        let sq = (base as f64).sqrt();
        let mean_delay = filters[0]
            .iter()
            .enumerate()
            .map(|(k, c)| k as f64 * c)
            .sum::<f64>()
            / sq;
        let curvature = filters[0]
            .iter()
            .enumerate()
            .map(|(k, c)| (k * k) as f64 * c.abs())
            .sum::<f64>()
            / sq;
        Ok(Self {
            filters,
            packet_depth,
            mean_delay,
            curvature,
        })
    }

    pub fn bands(&self) -> usize {
        match self.packet_depth {
            Some(p) => 1 << p,
            None => self.filters.len(),
        }
    }

    pub fn packet_depth(&self) -> Option<u32> {
        self.packet_depth
    }

    pub fn filters(&self) -> &[Vec<f64>] {
        &self.filters
    }

    /// Truncated product for `ψ̂_m(ω)` with `depth` filter factors.
    ///
    /// The omitted factors `M^{-1/2} H_0(ξ) = 1 − iμξ + O(ξ²)` are replaced by
    /// their first-order phase, so the remaining error is quadratic in
    /// `ω/M^depth`.
    pub fn product(&self, m: usize, w: f64, depth: usize) -> ProductValue {
        let base = self.filters.len() as f64;
        let norm = base.sqrt();
        let mut acc = Complex64::new(1.0, 0.0);
        let mut scale = 1.0 / base;
        let mut digits = m;
        let lead = match self.packet_depth {
            Some(p) => p as usize,
            None => 1,
        };
        for i in 0..depth {
            let h = if i < lead {
                let b = match self.packet_depth {
                    Some(_) => {
                        let b = digits & 1;
                        digits >>= 1;
                        b
                    }
                    None => m,
                };
                &self.filters[b]
            } else {
                &self.filters[0]
            };
            acc *= response(h, w * scale) / norm;
            scale /= base;
        }
        // Σ_{i>depth} ω/M^i
        let rest = w * scale * base / (base - 1.0);
        acc *= Complex64::from_polar(1.0, -self.mean_delay * rest);
        let q = w * w * scale * scale * base * base / (base * base - 1.0);
        let second = 0.5 * (self.curvature + self.mean_delay * self.mean_delay) * q
            + 0.5 * (self.mean_delay * rest).powi(2);
        ProductValue {
            value: acc,
            rel_bound: second.exp_m1(),
        }
    }

    /// Order of the zero of `ψ̂_m` at the origin from filter moments.
    pub fn vanishing_moments(&self, m: usize) -> u32 {
        match self.packet_depth {
            Some(_) => m.count_ones() * zero_order(&self.filters[1]),
            None => zero_order(&self.filters[m]),
        }
    }
}

/// Number of leading vanishing moments `Σ_k k^q h[k] = 0`.
fn zero_order(h: &[f64]) -> u32 {
    let mut q = 0u32;
    while (q as usize) < h.len() {
        let mut s = 0.0;
        let mut a = 0.0;
        for (k, c) in h.iter().enumerate() {
            let t = c * (k as f64).powi(q as i32);
            s += t;
            a += t.abs();
        }
        if s.abs() > 1e-8 * a.max(1e-300) {
            break;
        }
        q += 1;
    }
    q
}

/// Largest deviation from `Σ_p H_m(ω+2πp/M) conj(H_m'(ω+2πp/M)) = M δ_{m,m'}`
/// on a uniform grid.
pub fn para_unitary_residual(filters: &[Vec<f64>]) -> f64 {
    let base = filters.len();
    let mut worst = 0.0f64;
    // rows: shifts, columns: filters
    let mut resp = vec![Complex64::new(0.0, 0.0); base * base];
    for g in 0..CHECK_GRID {
        let w = 2.0 * PI * g as f64 / CHECK_GRID as f64;
        for p in 0..base {
            let shift = w + 2.0 * PI * p as f64 / base as f64;
            for (m, h) in filters.iter().enumerate() {
                resp[p * base + m] = response(h, shift);
            }
        }
        for m in 0..base {
            for mp in 0..base {
                let mut s = Complex64::new(0.0, 0.0);
                for p in 0..base {
                    s += resp[p * base + m] * resp[p * base + mp].conj();
                }
                let target = if m == mp { base as f64 } else { 0.0 };
                worst = worst.max((s - target).norm());
            }
        }
    }
    worst
}

/// Parses a filter file: one filter per line, whitespace separated
/// coefficients, `#` comments.
pub fn parse_filter_text(text: &str) -> Result<Vec<Vec<f64>>> {
    let mut out = Vec::new();
    for (no, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let row = line
            .split_whitespace()
            .map(|t| {
                t.parse::<f64>()
                    .map_err(|_| Error::Parse(format!("line {}: bad coefficient '{t}'", no + 1)))
            })
            .collect::<Result<Vec<_>>>()?;
        out.push(row);
    }
    Ok(out)
}

pub fn parse_filter_file(path: &Path) -> Result<Vec<Vec<f64>>> {
    parse_filter_text(&std::fs::read_to_string(path)?)
}

/// `ψ̂_m(ω)` from a filter list, validating it first.
///
/// `packet_depth` selects the packet interpretation of a two-filter list.
pub fn spectrum_from_filters(
    filters: &[Vec<f64>],
    packet_depth: Option<u32>,
    m: usize,
    w: f64,
    depth: usize,
) -> Result<ProductValue> {
    if depth < 8 {
        return Err(Error::InvalidParam(format!(
            "product depth must be at least 8, got {depth}"
        )));
    }
    let bank = match packet_depth {
        Some(p) if filters.len() == 2 => {
            FilterBank::packet(filters[0].clone(), filters[1].clone(), p)?
        }
        Some(_) => {
            return Err(Error::InvalidParam("packets need exactly two filters".into()));
        }
        None => FilterBank::new(filters.to_vec())?,
    };
    if m >= bank.bands() {
        return Err(Error::UnknownBand {
            m,
            bands: bank.bands(),
        });
    }
    Ok(bank.product(m, w, depth))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectra::WaveletFamily;

    fn haar_filters() -> Vec<Vec<f64>> {
        let r = std::f64::consts::FRAC_1_SQRT_2;
        vec![vec![r, r], vec![r, -r]]
    }

    #[test]
    fn haar_product_examples() {
        let f = haar_filters();
        let v = spectrum_from_filters(&f, None, 0, 0.0, 24).unwrap();
        assert!((v.value - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        let v = spectrum_from_filters(&f, None, 0, 2.0 * PI, 24).unwrap();
        assert!(v.value.norm() < 1e-10);
        let closed = WaveletFamily::haar().spectrum(1, PI).unwrap();
        let v = spectrum_from_filters(&f, None, 1, PI, 24).unwrap();
        assert!((v.value - closed).norm() < 1e-8);
        assert!(v.rel_bound < 1e-6);
    }

    #[test]
    fn haar_product_matches_closed_form_on_grid() {
        let bank = FilterBank::haar();
        let fam = WaveletFamily::haar();
        for i in -400..=400 {
            let w = 8.0 * PI * i as f64 / 400.0;
            for m in 0..2 {
                let a = bank.product(m, w, 24).value;
                let b = fam.spectrum(m, w).unwrap();
                assert!((a - b).norm() < 1e-8, "m={m} w={w}");
            }
        }
    }

    #[test]
    fn packet_product_matches_walsh_hadamard() {
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let bank = FilterBank::packet(vec![r, r], vec![r, -r], 3).unwrap();
        let fam = WaveletFamily::haar_packet(8).unwrap();
        for i in -50..=50 {
            let w = 0.37 * i as f64;
            for m in 0..8 {
                let a = bank.product(m, w, 24).value;
                let b = fam.spectrum(m, w).unwrap();
                assert!((a - b).norm() < 1e-8);
            }
        }
    }

    #[test]
    fn rejects_non_para_unitary() {
        let bad = vec![vec![0.7, 0.7], vec![0.7, -0.6]];
        assert!(matches!(
            FilterBank::new(bad),
            Err(Error::NotParaUnitary { .. })
        ));
        assert!(spectrum_from_filters(&haar_filters(), None, 0, 1.0, 4).is_err());
    }

    #[test]
    fn daubechies4_moments() {
        let s3 = 3f64.sqrt();
        let d = 4.0 * 2f64.sqrt();
        let h0 = vec![(1.0 + s3) / d, (3.0 + s3) / d, (3.0 - s3) / d, (1.0 - s3) / d];
        let h1: Vec<f64> = (0..4)
            .map(|k| if k % 2 == 0 { h0[3 - k] } else { -h0[3 - k] })
            .collect();
        let bank = FilterBank::new(vec![h0, h1]).unwrap();
        assert_eq!(bank.vanishing_moments(1), 2);
        assert_eq!(FilterBank::haar().vanishing_moments(1), 1);
    }

    #[test]
    fn parses_filter_text() {
        let f = parse_filter_text("# haar\n0.5 0.5\n\n0.5 -0.5\n").unwrap();
        assert_eq!(f, vec![vec![0.5, 0.5], vec![0.5, -0.5]]);
        assert!(parse_filter_text("0.5 x").is_err());
    }
}
