//! Closed-form primal/dual cross-correlations.

use crate::error::{Error, Result};
use crate::special::{gauss_legendre_64, richardson3, si, sinc, LogCombination};
use crate::spectra::Taper;
use std::f64::consts::PI;
use std::sync::OnceLock;

/// `−2 sin(π(2m+1)τ/2) sin(πτ/2) / (πτ)`, i.e. `(cos π(m+1)τ − cos πmτ)/(πτ)`
/// without the cancellation near zero.
fn cos_band_ratio(m: f64, tau: f64) -> f64 {
    if tau == 0.0 {
        return 0.0;
    }
    let s = (0.5 * PI * tau).sin();
    -2.0 * (0.5 * PI * (2.0 * m + 1.0) * tau).sin() * s / (PI * tau)
}

/// Shannon wavelets, real lag.
pub fn shannon_gamma(m: usize, tau: f64, d: i64) -> f64 {
    if m == 0 {
        let y = tau + d as f64 + 0.5;
        sinc(PI * y)
    } else {
        cos_band_ratio(m as f64, tau)
    }
}

/// Shannon wavelets, integer lag.
pub fn gamma_shannon_closed(m: usize, l: i64, d: i64) -> f64 {
    if m == 0 {
        let s = if (d + l).rem_euclid(2) == 0 { 1.0 } else { -1.0 };
        s / (PI * ((d + l) as f64 + 0.5))
    } else if l.rem_euclid(2) == 0 {
        0.0
    } else {
        let s = if ((m as i64 + 1) * l).rem_euclid(2) == 0 {
            1.0
        } else {
            -1.0
        };
        2.0 * s / (PI * l as f64)
    }
}

/// `I_ε(x) = 2ε ∫₀¹ W²((1+θ)/2) sin(πεxθ) dθ`.
///
/// Composite 64-point Gauss-Legendre with one panel per 8 units of `εx`.
pub fn meyer_i_eps(x: f64, eps: f64, taper: Taper) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    let (nodes, weights) = gauss_legendre_64();
    let panels = ((eps * x.abs() / 8.0).ceil() as usize).max(1);
    let h = 1.0 / panels as f64;
    let mut acc = 0.0;
    for p in 0..panels {
        let a = p as f64 * h;
        for (t, w) in nodes.iter().zip(weights) {
            let th = a + 0.5 * h * (t + 1.0);
            let win = taper.w(0.5 * (1.0 + th));
            acc += w * win * win * (PI * eps * x * th).sin();
        }
    }
    acc * h * eps
}

fn check_meyer(bands: usize, eps: f64) -> Result<()> {
    if bands < 2 || !(eps > 0.0 && eps <= 1.0 / (bands as f64 + 1.0) + 1e-15) {
        return Err(Error::InvalidParam(format!(
            "Meyer needs M ≥ 2 and 0 < eps ≤ 1/(M+1), got M={bands}, eps={eps}"
        )));
    }
    Ok(())
}

/// Meyer wavelets, real lag.
pub fn meyer_gamma(bands: usize, eps: f64, taper: Taper, m: usize, tau: f64, d: i64) -> Result<f64> {
    check_meyer(bands, eps)?;
    if m >= bands {
        return Err(Error::UnknownBand { m, bands });
    }
    let mf = m as f64;
    Ok(if m == 0 {
        let y = d as f64 + 0.5 + tau;
        sinc(PI * y) - (PI * y).sin() * meyer_i_eps(y, eps, taper)
    } else if m + 1 < bands {
        let c = (PI * (mf + 1.0) * tau).cos() - (PI * mf * tau).cos();
        cos_band_ratio(mf, tau) - c * meyer_i_eps(tau, eps, taper)
    } else {
        let big = bands as f64;
        cos_band_ratio(big - 1.0, tau) + (PI * (big - 1.0) * tau).cos() * meyer_i_eps(tau, eps, taper)
            - (PI * big * tau).cos() * meyer_i_eps(tau, big * eps, taper)
    })
}

/// Meyer wavelets, integer lag.
pub fn gamma_meyer_closed(
    bands: usize,
    eps: f64,
    taper: Taper,
    m: usize,
    l: i64,
    d: i64,
) -> Result<f64> {
    check_meyer(bands, eps)?;
    if m >= bands {
        return Err(Error::UnknownBand { m, bands });
    }
    let sgn = |e: i64| if e.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
    let lf = l as f64;
    Ok(if m == 0 {
        let x = (d + l) as f64 + 0.5;
        sgn(d + l) / (PI * x) - sgn(d + l) * meyer_i_eps(x, eps, taper)
    } else if l == 0 {
        0.0
    } else if m + 1 < bands {
        sgn((m as i64 + 1) * l) * (1.0 - sgn(l)) * (1.0 / (PI * lf) - meyer_i_eps(lf, eps, taper))
    } else {
        let big = bands as i64;
        sgn(big * l)
            * ((1.0 - sgn(l)) / (PI * lf) + sgn(l) * meyer_i_eps(lf, eps, taper)
                - meyer_i_eps(lf, bands as f64 * eps, taper))
    })
}

/// `S_k(x) = x (Si((k+1)πx) − Si(kπx))`.
fn s_k(k: usize, x: f64) -> f64 {
    x * (si((k as f64 + 1.0) * PI * x) - si(k as f64 * PI * x))
}

/// Haar scaling function against its dual, from the alternating `S_k` series.
pub fn haar_gamma_scaling(tau: f64, d: i64) -> f64 {
    let base = 2.0 * (d as f64 + tau);
    let (a, b, c) = (3.0 + base, 1.0 + base, -1.0 + base);
    let n = 16384;
    let mut partial = 0.0;
    let mut sums = [0.0; 3];
    for k in 0..n {
        let t = 0.5 * s_k(k, a) - s_k(k, b) + 0.5 * s_k(k, c);
        partial += if k % 2 == 0 { t } else { -t };
        match k + 1 {
            4096 => sums[0] = partial,
            8192 => sums[1] = partial,
            16384 => sums[2] = partial,
            _ => {}
        }
    }
    richardson3(sums[0], sums[1], sums[2], 1).0 / PI
}

fn haar_mother_combination() -> &'static LogCombination {
    static LC: OnceLock<LogCombination> = OnceLock::new();
    LC.get_or_init(|| {
        LogCombination::new(
            vec![6.0, 1.0, 1.0, -4.0, -4.0],
            vec![0.0, 1.0, -1.0, 0.5, -0.5],
            1,
            1.0 / PI,
        )
    })
}

/// Haar (`m ∈ {0, 1}`).
pub fn gamma_haar_closed(m: usize, tau: f64, d: i64) -> Result<f64> {
    match m {
        0 => Ok(haar_gamma_scaling(tau, d)),
        1 => Ok(haar_mother_combination().eval(tau)),
        _ => Err(Error::UnknownBand { m, bands: 2 }),
    }
}

/// Log-combination for Walsh-Hadamard band `m ≥ 1`, obtained by unrolling
/// the packet recursion on the Haar closed form.
pub fn hadamard_combination(m: usize) -> Result<LogCombination> {
    if m == 0 {
        return Err(Error::InvalidBand("the packet recursion starts at m = 1".into()));
    }
    let mut coeffs = vec![6.0, 1.0, 1.0, -4.0, -4.0];
    let mut shifts = vec![0.0, 1.0, -1.0, 0.5, -0.5];
    let bits = usize::BITS - m.leading_zeros();
    // digits below the leading one, most significant first
    for i in (0..bits - 1).rev() {
        let odd = (m >> i) & 1 == 1;
        let w1 = if odd { -0.5 } else { 0.5 };
        let mut next: Vec<(f64, f64)> = Vec::new();
        for (c, a) in coeffs.iter().zip(&shifts) {
            for (k, w) in [(0.0, 1.0), (1.0, w1), (-1.0, w1)] {
                let s = (k + a) / 2.0;
                let v = 2.0 * w * c;
                match next.iter_mut().find(|(sh, _)| *sh == s) {
                    Some(e) => e.1 += v,
                    None => next.push((s, v)),
                }
            }
        }
        next.retain(|(_, v)| *v != 0.0);
        next.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
        shifts = next.iter().map(|e| e.0).collect();
        coeffs = next.iter().map(|e| e.1).collect();
    }
    Ok(LogCombination::new(coeffs, shifts, 1, 1.0 / PI))
}

/// Walsh-Hadamard band `m ≥ 1`.
pub fn hadamard_gamma(m: usize, tau: f64) -> Result<f64> {
    Ok(hadamard_combination(m)?.eval(tau))
}

fn franklin_chi() -> &'static LogCombination {
    static LC: OnceLock<LogCombination> = OnceLock::new();
    LC.get_or_init(|| {
        let q = [-35.0 / 16.0, 7.0 / 4.0, -7.0 / 8.0, 1.0 / 4.0, -1.0 / 32.0];
        let mut c = vec![q[0]];
        let mut a = vec![0.0];
        for (p, qp) in q.iter().enumerate().skip(1) {
            c.extend([*qp, *qp]);
            a.extend([p as f64, -(p as f64)]);
        }
        LogCombination::new(c, a, 3, 1.0 / (3.0 * PI))
    })
}

/// Cross-correlation of the Franklin-type function `χ` with its Hilbert dual.
pub fn franklin_gamma_chi(tau: f64) -> f64 {
    franklin_chi().eval(tau)
}

/// Autocorrelation of the Franklin wavelet filter `ã₁` at lag `k`.
pub fn franklin_a1_autocorr(k: i64) -> f64 {
    let r = 2.0 - 3f64.sqrt();
    let s3 = 3f64.sqrt();
    let k = k.unsigned_abs();
    let j = (k / 2) as i32;
    let sgn = if j % 2 == 0 { 1.0 } else { -1.0 };
    if k % 2 == 0 {
        2.0 * s3 / 9.0 * r.powi(j) * (7.0 * sgn + 4.0 * r.powi(j))
    } else {
        8.0 * s3 / 9.0 * r.powi(j) * (sgn * (1.0 - s3) - r.powi(j + 1))
    }
}

/// Franklin wavelet against its dual, as a series in `γ_χ`.
///
/// Terms are dropped once `|γ_{ã₁}[k]| < tol` (`|γ_χ| ≤ 1`).
pub fn franklin_gamma_mother(tau: f64, tol: f64) -> f64 {
    let mut acc = franklin_a1_autocorr(0) * franklin_gamma_chi(2.0 * tau);
    let mut k = 1i64;
    loop {
        let g = franklin_a1_autocorr(k);
        acc += g * (franklin_gamma_chi(2.0 * tau + k as f64) + franklin_gamma_chi(2.0 * tau - k as f64));
        // the envelope decays like r^{k/2}; check two consecutive lags
        if g.abs() < tol && franklin_a1_autocorr(k + 1).abs() < tol {
            break;
        }
        k += 1;
    }
    acc
}

/// Franklin scaling function against its dual: `(6/π) Σ (−1)^k T_k(1+2d+2τ)`
/// with `T_k(x) = ∫_{kπ}^{(k+1)π} sinc⁴(u) cos(xu) / (1 + 2cos²u) du`.
pub fn franklin_gamma_scaling(tau: f64, d: i64) -> Result<f64> {
    let x = 1.0 + 2.0 * d as f64 + 2.0 * tau;
    // Σ_{k>K} |T_k| ≤ 1/(3π³K³) < 1e-9
    let bands = 240usize;
    let step = (PI / 4.0).min(PI / (x.abs() + 0.5));
    let opts = crate::quad::QuadOptions {
        abs_tol: 1e-14,
        ..Default::default()
    };
    let f = |u: f64| {
        let c = u.cos();
        sinc(u).powi(4) * (x * u).cos() / (1.0 + 2.0 * c * c)
    };
    let mut acc = 0.0;
    for k in 0..bands {
        let a = k as f64 * PI;
        let r = crate::quad::integrate_uniform(&f, a, a + PI, step, opts)?;
        acc += if k % 2 == 0 { r.value } else { -r.value };
    }
    Ok(6.0 / PI * acc)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shannon_integer_and_real_forms_agree() {
        for m in 0..4 {
            for l in -6i64..=6 {
                for d in [-1i64, 0, 2] {
                    let a = gamma_shannon_closed(m, l, d);
                    let b = shannon_gamma(m, l as f64, d);
                    assert!((a - b).abs() < 1e-14, "m={m} l={l} d={d}");
                }
            }
        }
    }

    #[test]
    fn meyer_integer_and_real_forms_agree() {
        for (bands, eps) in [(2usize, 1.0 / 3.0), (3, 0.25), (5, 1.0 / 6.0)] {
            for m in 0..bands {
                for l in -5i64..=5 {
                    let a = gamma_meyer_closed(bands, eps, Taper::Standard, m, l, 0).unwrap();
                    let b = meyer_gamma(bands, eps, Taper::Standard, m, l as f64, 0).unwrap();
                    assert!((a - b).abs() < 1e-13, "M={bands} m={m} l={l}: {a} vs {b}");
                }
            }
        }
    }

    #[test]
    fn i_eps_large_argument() {
        // 1/(πx) + O(x^{-9}); the x^{-9} term oscillates around −385875/(4π⁷ε⁸).
        let eps: f64 = 1.0 / 3.0;
        let c = 385875.0 / (4.0 * PI.powi(7) * eps.powi(8));
        for i in 0..60 {
            let x = 20.0 + 3.1 * i as f64;
            let r = (meyer_i_eps(x, eps, Taper::Standard) - 1.0 / (PI * x)) * x.powi(9);
            assert!(r.abs() < 2.0 * c, "x={x}: {r}");
        }
    }

    #[test]
    fn a1_autocorr_sum() {
        let total: f64 = (-80i64..=80).map(franklin_a1_autocorr).sum();
        assert!((total - 2.0 / 3.0).abs() < 1e-12, "{total}");
        let expected = 22.0 * 3f64.sqrt() / 9.0;
        assert!((franklin_a1_autocorr(0) - expected).abs() < 1e-14);
    }

    #[test]
    fn hadamard_combination_reproduces_haar() {
        for i in -20..20 {
            let t = 0.3 * i as f64;
            let a = hadamard_gamma(1, t).unwrap();
            let b = gamma_haar_closed(1, t, 0).unwrap();
            assert!((a - b).abs() < 1e-15);
        }
        assert!(hadamard_gamma(0, 1.0).is_err());
    }
}
