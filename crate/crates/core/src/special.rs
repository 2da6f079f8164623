//! Special functions: sinc, sine/cosine integrals, Gauss-Legendre rules and
//! shifted `x^p ln|x|` combinations evaluated without cancellation.

use num_complex::Complex64;
use std::f64::consts::{FRAC_PI_2, PI};
use std::sync::OnceLock;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// `sin(x)/x` with the removable singularity filled in.
pub fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        let x2 = x * x;
        1.0 - x2 / 6.0 + x2 * x2 / 120.0
    } else {
        x.sin() / x
    }
}

/// Sine integral `Si(x) = ∫₀ˣ sin(t)/t dt`.
pub fn si(x: f64) -> f64 {
    si_ci(x.abs()).0.copysign(x)
}

/// Cosine integral `Ci(x)` for `x > 0`.
pub fn ci(x: f64) -> f64 {
    assert!(x > 0.0, "Ci is only defined for positive arguments");
    si_ci(x).1
}

/// Returns `(Si(x), Ci(x))` for `x >= 0`.
///
/// Power series below 4, continued fraction for `E1(ix)` above. Both branches
/// reach full double precision.
fn si_ci(x: f64) -> (f64, f64) {
    debug_assert!(x >= 0.0);
    if x == 0.0 {
        return (0.0, f64::NEG_INFINITY);
    }
    if x <= 4.0 {
        let mut si = 0.0;
        let mut ci = 0.0;
        // term_k = (-1)^k x^k / k!
        let mut term = 1.0;
        let mut k = 1usize;
        loop {
            term *= x / k as f64;
            let kk = k as f64;
            let contrib = term / kk;
            match k % 4 {
                1 => si += contrib,
                2 => ci -= contrib,
                3 => si -= contrib,
                _ => ci += contrib,
            }
            if contrib.abs() < 1e-18 * (si.abs() + ci.abs() + 1.0) && k > 4 {
                break;
            }
            k += 1;
            if k > 200 {
                break;
            }
        }
        (si, EULER_GAMMA + x.ln() + ci)
    } else {
        // Modified Lentz evaluation of E1(ix).
        let tiny = 1e-300;
        let mut b = Complex64::new(1.0, x);
        let mut c = Complex64::new(1.0 / tiny, 0.0);
        let mut d = Complex64::new(1.0, 0.0) / b;
        let mut h = d;
        for i in 2..1000 {
            let a = -((i - 1) * (i - 1)) as f64;
            b += 2.0;
            d = Complex64::new(1.0, 0.0) / (d * a + b);
            c = b + Complex64::new(a, 0.0) / c;
            let del = c * d;
            h *= del;
            if (del.re - 1.0).abs() + del.im.abs() < 1e-16 {
                break;
            }
        }
        h *= Complex64::new(x.cos(), -x.sin());
        (FRAC_PI_2 + h.im, -h.re)
    }
}

/// Nodes and weights of the `n`-point Gauss-Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = (n + 1) / 2;
    for i in 0..m {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let mut p1 = 1.0;
            let mut p2 = 0.0;
            for j in 0..n {
                let p3 = p2;
                p2 = p1;
                p1 = ((2 * j + 1) as f64 * z * p2 - j as f64 * p3) / (j + 1) as f64;
            }
            dp = n as f64 * (z * p1 - p2) / (z * z - 1.0);
            let z1 = z;
            z = z1 - p1 / dp;
            if (z - z1).abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -z;
        nodes[n - 1 - i] = z;
        let w = 2.0 / ((1.0 - z * z) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// Cached 64-point Gauss-Legendre rule.
pub fn gauss_legendre_64() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(64))
}

/// Linear combination `scale · Σᵢ cᵢ (τ+aᵢ)^p ln|τ+aᵢ|` with `0·ln 0 = 0`.
///
/// Such combinations appear as closed-form Hilbert correlations of piecewise
/// polynomial functions. For large `|τ|` the individual terms are huge and
/// cancel, so the moment expansion in `1/τ` is used there instead.
#[derive(Clone, Debug)]
pub struct LogCombination {
    coeffs: Vec<f64>,
    shifts: Vec<f64>,
    power: u32,
    scale: f64,
    // moments[n] = Σ cᵢ aᵢⁿ
    moments: Vec<f64>,
    // series[n] = coefficient of uⁿ in (1+u)^p ln(1+u)
    series: Vec<f64>,
    reach: f64,
}

const LOG_SERIES_TERMS: usize = 80;

impl LogCombination {
    pub fn new(coeffs: Vec<f64>, shifts: Vec<f64>, power: u32, scale: f64) -> Self {
        assert_eq!(coeffs.len(), shifts.len());
        let moments = (0..=LOG_SERIES_TERMS)
            .map(|n| {
                coeffs
                    .iter()
                    .zip(&shifts)
                    .map(|(c, a)| c * a.powi(n as i32))
                    .sum()
            })
            .collect();
        let p = power as usize;
        let mut series = vec![0.0; LOG_SERIES_TERMS + 1];
        for (n, s) in series.iter_mut().enumerate().skip(1) {
            let mut acc = 0.0;
            for j in 0..=p.min(n - 1) {
                let sign = if (n - j) % 2 == 1 { 1.0 } else { -1.0 };
                acc += binomial(p, j) * sign / (n - j) as f64;
            }
            *s = acc;
        }
        let reach = shifts.iter().fold(0.0f64, |r, a| r.max(a.abs()));
        Self {
            coeffs,
            shifts,
            power,
            scale,
            moments,
            series,
            reach,
        }
    }

    pub fn eval(&self, tau: f64) -> f64 {
        if tau.abs() > 4.0 * self.reach.max(0.5) {
            self.scale * self.eval_series(tau)
        } else {
            self.scale * self.eval_direct(tau)
        }
    }

    fn eval_direct(&self, tau: f64) -> f64 {
        let p = self.power as i32;
        self.coeffs
            .iter()
            .zip(&self.shifts)
            .map(|(c, a)| {
                let x = tau + a;
                if x == 0.0 {
                    0.0
                } else {
                    c * x.powi(p) * x.abs().ln()
                }
            })
            .sum()
    }

    fn eval_series(&self, tau: f64) -> f64 {
        let p = self.power as usize;
        let lt = tau.abs().ln();
        // ln|τ| · Σ_k C(p,k) τ^{p-k} M_k
        let mut log_part = 0.0;
        for k in 0..=p {
            log_part += binomial(p, k) * tau.powi((p - k) as i32) * self.moments[k];
        }
        let mut acc = log_part * lt;
        let inv = 1.0 / tau;
        let mut tpow = tau.powi(p as i32);
        for n in 1..=LOG_SERIES_TERMS {
            tpow *= inv;
            acc += self.series[n] * self.moments[n] * tpow;
        }
        acc
    }
}

fn binomial(n: usize, k: usize) -> f64 {
    let mut r = 1.0;
    for i in 0..k {
        r = r * (n - i) as f64 / (i + 1) as f64;
    }
    r
}

/// Richardson extrapolation of partial results at `N`, `2N`, `4N` whose error
/// behaves like `c₁ N^{-q} + c₂ N^{-q-1} + …`.
///
/// Returns the extrapolated value and a conservative error estimate.
pub fn richardson3(s1: f64, s2: f64, s4: f64, q: u32) -> (f64, f64) {
    let f1 = 2f64.powi(q as i32);
    let r1 = (f1 * s2 - s1) / (f1 - 1.0);
    let r2 = (f1 * s4 - s2) / (f1 - 1.0);
    let f2 = 2f64.powi(q as i32 + 1);
    let rr = (f2 * r2 - r1) / (f2 - 1.0);
    let err = (rr - r2).abs() + (rr - s4).abs() * 1e-3;
    (rr, err)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn si_reference_values() {
        // Abramowitz & Stegun table values.
        assert!((si(1.0) - 0.946_083_070_367_183).abs() < 1e-14);
        assert!((si(5.0) - 1.549_931_244_944_674).abs() < 1e-14);
        assert!((si(10.0) - 1.658_347_594_218_874).abs() < 1e-14);
        assert!((si(-3.0) + 1.848_652_527_999_468).abs() < 1e-14);
        assert!((ci(1.0) - 0.337_403_922_900_968).abs() < 1e-14);
        assert!((ci(10.0) + 0.045_456_433_004_455).abs() < 1e-14);
    }

    #[test]
    fn si_branches_agree_at_switch() {
        let below = si(4.0 - 1e-12);
        let above = si(4.0 + 1e-12);
        assert!((below - above).abs() < 5e-13, "{below} vs {above}");
    }

    #[test]
    fn si_large_argument_approaches_half_pi() {
        let x: f64 = 1e6;
        let expected = FRAC_PI_2 - x.cos() / x;
        assert!((si(x) - expected).abs() < 1e-11);
    }

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(64);
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(10)).sum();
        assert!((s - 2.0 / 11.0).abs() < 1e-14);
        let total: f64 = w.iter().sum();
        assert!((total - 2.0).abs() < 1e-13);
    }

    #[test]
    fn log_combination_series_matches_direct() {
        let lc = LogCombination::new(
            vec![6.0, 1.0, 1.0, -4.0, -4.0],
            vec![0.0, 1.0, -1.0, 0.5, -0.5],
            1,
            1.0,
        );
        for &t in &[2.5, 3.0, -3.5, 6.0] {
            let d = lc.eval_direct(t);
            let s = lc.eval_series(t);
            assert!((d - s).abs() < 1e-12, "t={t}: {d} vs {s}");
        }
        // Leading term 1/(8τ³).
        let t = 1e3;
        assert!((lc.eval(t) * t.powi(3) * 8.0 - 1.0).abs() < 1e-5);
    }

    #[test]
    fn richardson_removes_leading_terms() {
        let f = |n: f64| 1.0 + 3.0 / n + 5.0 / (n * n) + 7.0 / n.powi(3);
        let (v, _) = richardson3(f(100.0), f(200.0), f(400.0), 1);
        assert!((v - 1.0).abs() < 1e-6);
    }
}
