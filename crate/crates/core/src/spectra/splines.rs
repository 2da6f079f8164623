//! Battle-Lemarié spline wavelets.

use crate::error::{Error, Result};
use crate::special::sinc;
use num_complex::Complex64;

/// Orthonormalization sum `S(ω) = Σ_k sinc^{2n}(ω/2 + kπ)` of a spline of
/// degree `n − 1`, evaluated in closed form.
///
/// With `x = ω/2` and `u = cot x`, `S = Q(u) sin^{2n}(x) / (2n−1)!` where
/// `Q = D^{2n−2}(1+u²)` and `D P = −(1+u²) P'`.
#[derive(Clone, Debug, PartialEq)]
pub struct SplineLattice {
    order: u32,
    n: usize,
    // coefficient of cos^{2j}(x) sin^{2(n−j)}(x)
    coeffs: Vec<f64>,
}

impl SplineLattice {
    pub fn new(order: u32) -> Result<Self> {
        if order % 2 == 0 || order > 15 {
            return Err(Error::InvalidParam(format!(
                "spline order must be odd and at most 15, got {order}"
            )));
        }
        let n = order as usize + 1;
        let mut poly = vec![1.0, 0.0, 1.0];
        for _ in 0..(2 * n - 2) {
            let deriv: Vec<f64> = (1..poly.len()).map(|k| k as f64 * poly[k]).collect();
            let mut next = vec![0.0; deriv.len() + 2];
            for (k, c) in deriv.iter().enumerate() {
                next[k] -= c;
                next[k + 2] -= c;
            }
            poly = next;
        }
        let fact: f64 = (1..2 * n).map(|k| k as f64).product();
        let coeffs = (0..=n).map(|j| poly[2 * j] / fact).collect();
        Ok(Self { order, n, coeffs })
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    /// `Σ_k sinc^{2n}(ω/2 + kπ)`.
    pub fn sum(&self, w: f64) -> f64 {
        let x = 0.5 * w;
        let c2 = x.cos().powi(2);
        let s2 = x.sin().powi(2);
        let mut acc = 0.0;
        for (j, c) in self.coeffs.iter().enumerate() {
            acc += c * c2.powi(j as i32) * s2.powi((self.n - j) as i32);
        }
        acc
    }

    fn mother_ratio(&self, w: f64) -> f64 {
        self.sum(0.5 * w + std::f64::consts::PI) / (self.sum(w) * self.sum(0.5 * w))
    }

    pub fn sq_modulus(&self, m: usize, w: f64) -> f64 {
        let n2 = 2 * self.n as i32;
        if m == 0 {
            sinc(0.5 * w).powi(n2) / self.sum(w)
        } else {
            (0.25 * w).sin().powi(n2) * sinc(0.25 * w).powi(n2) * self.mother_ratio(w)
        }
    }

    pub fn spectrum(&self, m: usize, w: f64) -> Complex64 {
        let n = self.n as i32;
        if m == 0 {
            Complex64::new(sinc(0.5 * w).powi(n) / self.sum(w).sqrt(), 0.0)
        } else {
            let amp =
                (0.25 * w).sin().powi(n) * sinc(0.25 * w).powi(n) * self.mother_ratio(w).sqrt();
            -Complex64::from_polar(amp, -0.5 * w)
        }
    }
}
