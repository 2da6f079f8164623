//! Cross-correlations by quadrature of the Fourier-domain integrals.
//!
//! For `m' ≠ 0`: `γ = −(1/π) Im ∫₀^∞ ψ̂_m conj(ψ̂_m') e^{iωτ} dω`.
//! For `m' = 0`: `γ = (1/π) Re Σ_k (−1)^k ∫_{2kπ}^{2(k+1)π} ψ̂_m conj(ψ̂_0) e^{iω(τ+d+½)} dω`.
//!
//! Spectra that are not band-limited are integrated block by block up to
//! `Ω`, `2Ω` and `4Ω`, and the three partial integrals are extrapolated.

use super::GammaValue;
use crate::error::{Error, Result};
use crate::quad::{integrate_points, refine_points, QuadOptions};
use crate::special::richardson3;
use crate::spectra::{band_sign, dual_factor, WaveletFamily, WaveletSpectrum};
use num_complex::Complex64;
use rayon::prelude::*;
use std::f64::consts::PI;

/// Error target for band-limited families.
pub const BAND_LIMITED_TOL: f64 = 1e-8;
/// Error target otherwise.
pub const GENERAL_TOL: f64 = 1e-6;

#[derive(Clone, Copy)]
enum Kernel {
    Mother,
    Scaling,
    // (1/π) Re ∫₀^∞ f̂ conj(ĝ) e^{iωτ}, primal or dual pair
    Plain { dual: bool, d: i64 },
}

fn integrand(fam: &WaveletFamily, m: usize, mp: usize, kernel: Kernel, t: f64, w: f64) -> f64 {
    match kernel {
        Kernel::Mother => {
            if m == mp {
                -fam.psi_sq(m, w) * (w * t).sin()
            } else {
                let f = fam.psi(m, w) * fam.psi(mp, w).conj();
                -(f * Complex64::from_polar(1.0, w * t)).im
            }
        }
        Kernel::Scaling => {
            let s = band_sign(w);
            if m == 0 {
                s * fam.psi_sq(0, w) * (w * t).cos()
            } else {
                let f = fam.psi(m, w) * fam.psi(0, w).conj();
                s * (f * Complex64::from_polar(1.0, w * t)).re
            }
        }
        Kernel::Plain { dual, d } => {
            if m == mp {
                fam.psi_sq(m, w) * (w * t).cos()
            } else {
                let mut f = fam.psi(m, w) * fam.psi(mp, w).conj();
                if dual {
                    f *= dual_factor(m, w, d) * dual_factor(mp, w, d).conj();
                }
                (f * Complex64::from_polar(1.0, w * t)).re
            }
        }
    }
}

fn panel_width(t: f64) -> f64 {
    (PI / 2.0).min(PI / (t.abs() + 0.5))
}

fn breakpoints(lo: f64, hi: f64, knots: &[f64], kernel: Kernel, t: f64) -> Vec<f64> {
    let mut pts: Vec<f64> = knots.iter().copied().filter(|&k| k > lo && k < hi).collect();
    pts.push(lo);
    pts.push(hi);
    if matches!(kernel, Kernel::Scaling | Kernel::Plain { dual: true, .. }) {
        let first = (lo / (2.0 * PI)).ceil() as i64;
        let mut k = first;
        while (k as f64) * 2.0 * PI < hi {
            let p = k as f64 * 2.0 * PI;
            if p > lo {
                pts.push(p);
            }
            k += 1;
        }
    }
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    pts.dedup_by(|a, b| (*a - *b).abs() < 1e-14);
    refine_points(&pts, panel_width(t))
}

fn options() -> QuadOptions {
    QuadOptions {
        abs_tol: 1e-13,
        rel_tol: 1e-12,
        max_subdivisions: 4000,
        fail_above: 1e-7,
    }
}

fn check_pair(a: &WaveletSpectrum<'_>, b: &WaveletSpectrum<'_>) -> Result<()> {
    if !std::ptr::eq(a.family(), b.family()) && a.family().bands() != b.family().bands() {
        return Err(Error::InvalidParam("spectra must belong to the same family".into()));
    }
    Ok(())
}

fn general(fam: &WaveletFamily, m: usize, mp: usize, kernel: Kernel, t: f64) -> Result<GammaValue> {
    let sm = fam.support(m)?;
    let sp = fam.support(mp)?;
    let lo = sm.lo.max(sp.lo);
    let hi = sm.hi.min(sp.hi);
    if hi <= lo {
        return Ok(GammaValue {
            value: 0.0,
            abs_err: 0.0,
        });
    }
    let f = |w: f64| integrand(fam, m, mp, kernel, t, w);
    if hi.is_finite() {
        let mut knots = sm.knots.clone();
        knots.extend_from_slice(&sp.knots);
        let pts = breakpoints(lo, hi, &knots, kernel, t);
        let r = integrate_points(&f, &pts, options())?;
        if r.abs_err > BAND_LIMITED_TOL * PI {
            return Err(Error::QuadratureNonConvergent(format!(
                "error estimate {:.3e} above target",
                r.abs_err / PI
            )));
        }
        return Ok(GammaValue {
            value: r.value / PI,
            abs_err: r.abs_err / PI,
        });
    }
    // (decay of |ψ̂_m|² + decay of |ψ̂_m'|²)/2 is the decay of the product
    let qd = (fam.sq_decay(m).unwrap_or(2) + fam.sq_decay(mp).unwrap_or(2)) / 2;
    let omega0 = match qd {
        0..=2 => 1024.0 * PI,
        3..=4 => 256.0 * PI,
        5..=6 => 128.0 * PI,
        _ => 64.0 * PI,
    };
    let block = fam.period_hint();
    let n0 = (omega0 / block).ceil() as usize;
    let blocks: Vec<Result<(f64, f64)>> = (0..4 * n0)
        .into_par_iter()
        .map(|b| {
            let a = b as f64 * block;
            let pts = breakpoints(a, a + block, &[], kernel, t);
            let r = integrate_points(&f, &pts, options())?;
            Ok((r.value, r.abs_err))
        })
        .collect();
    let mut partial = [0.0; 3];
    let mut err = 0.0;
    let mut acc = 0.0;
    for (b, r) in blocks.into_iter().enumerate() {
        let (v, e) = r?;
        acc += v;
        err += e;
        if b + 1 == n0 {
            partial[0] = acc;
        } else if b + 1 == 2 * n0 {
            partial[1] = acc;
        }
    }
    partial[2] = acc;
    let (value, rerr) = richardson3(partial[0], partial[1], partial[2], qd.max(2) - 1);
    let abs_err = (err + rerr) / PI;
    if abs_err > GENERAL_TOL {
        return Err(Error::QuadratureNonConvergent(format!(
            "tail extrapolation error {abs_err:.3e} above target"
        )));
    }
    Ok(GammaValue {
        value: value / PI,
        abs_err,
    })
}

/// `γ_{ψ_m, ψ_m'^H}(τ)` for `m' ≠ 0`.
pub fn gamma_mother_quad(
    spec_m: &WaveletSpectrum<'_>,
    spec_mp: &WaveletSpectrum<'_>,
    tau: f64,
) -> Result<GammaValue> {
    check_pair(spec_m, spec_mp)?;
    if spec_mp.index() == 0 {
        return Err(Error::InvalidBand(
            "the mother-wavelet integral needs m' ≠ 0; use gamma_scaling_quad".into(),
        ));
    }
    let fam = spec_m.family();
    if spec_m.index() != spec_mp.index() {
        require_phase(fam, spec_m.index(), spec_mp.index())?;
    }
    general(fam, spec_m.index(), spec_mp.index(), Kernel::Mother, tau)
}

/// `γ_{ψ_m, ψ_0^H}(τ)` with delay `d`.
pub fn gamma_scaling_quad(spec_m: &WaveletSpectrum<'_>, tau: f64, d: i64) -> Result<GammaValue> {
    let fam = spec_m.family();
    if spec_m.index() != 0 {
        require_phase(fam, spec_m.index(), 0)?;
    }
    general(fam, spec_m.index(), 0, Kernel::Scaling, tau + d as f64 + 0.5)
}

fn require_phase(fam: &WaveletFamily, m: usize, mp: usize) -> Result<()> {
    if fam.has_phase(m) && fam.has_phase(mp) {
        Ok(())
    } else {
        Err(Error::PhaseUnavailable(format!(
            "{} bands {m} and {mp} need configured phases for inter-band work",
            fam.label()
        )))
    }
}

/// Inter-band `γ_{ψ_m, ψ_m'^H}(τ)` with `m ≠ m'`.
pub fn interband_gamma(fam: &WaveletFamily, m: usize, mp: usize, tau: f64, d: i64) -> Result<GammaValue> {
    fam.check_band(m)?;
    fam.check_band(mp)?;
    if m == mp {
        return Err(Error::InvalidBand("inter-band correlation needs m ≠ m'".into()));
    }
    if let crate::spectra::Family::Shannon = fam.family() {
        return Ok(GammaValue {
            value: 0.0,
            abs_err: 0.0,
        });
    }
    require_phase(fam, m, mp)?;
    if mp == 0 {
        general(fam, m, 0, Kernel::Scaling, tau + d as f64 + 0.5)
    } else {
        general(fam, m, mp, Kernel::Mother, tau)
    }
}

/// Dispatches to the mother or scaling integral.
pub fn gamma_quad(fam: &WaveletFamily, m: usize, mp: usize, tau: f64, d: i64) -> Result<GammaValue> {
    fam.check_band(m)?;
    fam.check_band(mp)?;
    if m != mp {
        return interband_gamma(fam, m, mp, tau, d);
    }
    if mp == 0 {
        gamma_scaling_quad(&fam.band(m)?, tau, d)
    } else {
        gamma_mother_quad(&fam.band(m)?, &fam.band(mp)?, tau)
    }
}

/// `γ_{ψ_m, ψ_m'}(τ)` (or `γ_{ψ_m^H, ψ_m'^H}` when `dual`) by quadrature.
pub fn autocorr_quad(fam: &WaveletFamily, m: usize, mp: usize, tau: f64, dual: bool, d: i64) -> Result<GammaValue> {
    fam.check_band(m)?;
    fam.check_band(mp)?;
    if m != mp {
        require_phase(fam, m, mp)?;
    }
    general(fam, m, mp, Kernel::Plain { dual, d }, tau)
}
