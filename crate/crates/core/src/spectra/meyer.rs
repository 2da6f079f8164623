//! Meyer M-band spectra.

use super::BandSupport;
use crate::error::{Error, Result};
use std::f64::consts::PI;

/// Polynomial `ν` used in the transition window `W(θ) = cos(π ν(θ) / 2)`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Taper {
    /// `θ⁴(35 − 84θ + 70θ² − 20θ³)`
    #[default]
    Standard,
    /// `θ²(3 − 2θ)`
    Cubic,
    /// `θ`
    Linear,
}

impl Taper {
    pub fn nu(self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        if t >= 1.0 {
            return 1.0;
        }
        match self {
            Taper::Standard => t.powi(4) * (35.0 - 84.0 * t + 70.0 * t * t - 20.0 * t.powi(3)),
            Taper::Cubic => t * t * (3.0 - 2.0 * t),
            Taper::Linear => t,
        }
    }

    /// `W(θ)`, equal to 1 below 0 and 0 above 1.
    pub fn w(self, t: f64) -> f64 {
        if t <= 0.0 {
            1.0
        } else if t >= 1.0 {
            0.0
        } else {
            (0.5 * PI * self.nu(t)).cos()
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "standard" | "degree7" | "poly7" => Ok(Taper::Standard),
            "cubic" => Ok(Taper::Cubic),
            "linear" => Ok(Taper::Linear),
            _ => Err(Error::InvalidParam(format!("unknown taper '{s}'"))),
        }
    }
}

/// Phase `η_m(ω) = a_m ω + c_m sign(ω)` of each Meyer band.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearPhase {
    pub slopes: Vec<f64>,
    pub offsets: Vec<f64>,
}

impl LinearPhase {
    /// Slope −1/2 on every wavelet band with offsets `−(m−1)π/2`, the
    /// simplest linear choice meeting the compatibility conditions.
    pub fn half_sample(bands: usize) -> Self {
        let mut slopes = vec![-0.5; bands];
        let mut offsets: Vec<f64> = (0..bands).map(|m| -(m as f64 - 1.0) * PI / 2.0).collect();
        slopes[0] = 0.0;
        offsets[0] = 0.0;
        Self { slopes, offsets }
    }

    pub fn eta(&self, m: usize, w: f64) -> f64 {
        if m == 0 {
            return 0.0;
        }
        let s = if w > 0.0 {
            1.0
        } else if w < 0.0 {
            -1.0
        } else {
            0.0
        };
        self.slopes[m] * w + self.offsets[m] * s
    }

    /// Checks that the phases keep the Meyer filter bank para-unitary.
    pub fn check(&self, bands: usize, eps: f64) -> Result<()> {
        if self.slopes.len() != bands || self.offsets.len() != bands {
            return Err(Error::InvalidParam(format!(
                "linear phase needs {bands} slopes and offsets"
            )));
        }
        if self.slopes[0] != 0.0 || self.offsets[0] != 0.0 {
            return Err(Error::InvalidParam("the scaling band must have zero phase".into()));
        }
        let wrap = |x: f64| {
            let r = x.rem_euclid(2.0 * PI);
            r.min(2.0 * PI - r)
        };
        let mut worst = 0.0f64;
        let samples = 17;
        let mf = bands as f64;
        for i in 1..samples {
            let t = i as f64 / samples as f64;
            // odd symmetry of the last band around Mπ
            let w = mf * PI + t * mf * eps * PI;
            let m = bands - 1;
            worst = worst.max(wrap(self.eta(m, w) + self.eta(m, 2.0 * mf * PI - w)));
            for m in 1..bands {
                let mm = m as f64;
                let w = (mm - eps) * PI + 2.0 * eps * PI * t;
                let s = w - 2.0 * mm * PI;
                let lhs = self.eta(m, s) - self.eta(m - 1, s);
                let rhs = self.eta(m, w) - self.eta(m - 1, w) + PI;
                worst = worst.max(wrap(lhs - rhs));
            }
        }
        if worst > 1e-9 {
            return Err(Error::InvalidParam(format!(
                "linear phase violates the Meyer compatibility conditions (residual {worst:.3e})"
            )));
        }
        Ok(())
    }
}

/// `|ψ̂_m(ω)|` of the Meyer band `m` among `bands`.
pub(crate) fn amplitude(bands: usize, m: usize, eps: f64, taper: Taper, w: f64) -> f64 {
    let a = w.abs();
    let mf = m as f64;
    let big = bands as f64;
    if m == 0 {
        if a <= PI * (1.0 - eps) {
            return 1.0;
        }
        if a >= PI * (1.0 + eps) {
            return 0.0;
        }
        return taper.w(a / (2.0 * PI * eps) - (1.0 - eps) / (2.0 * eps));
    }
    if a <= (mf - eps) * PI {
        return 0.0;
    }
    if a < (mf + eps) * PI {
        return taper.w((mf + eps) / (2.0 * eps) - a / (2.0 * PI * eps));
    }
    if m + 1 < bands {
        if a <= (mf + 1.0 - eps) * PI {
            1.0
        } else if a < (mf + 1.0 + eps) * PI {
            taper.w(a / (2.0 * PI * eps) - (mf + 1.0 - eps) / (2.0 * eps))
        } else {
            0.0
        }
    } else if a <= big * (1.0 - eps) * PI {
        1.0
    } else if a < big * (1.0 + eps) * PI {
        taper.w(a / (2.0 * PI * eps * big) - (1.0 - eps) / (2.0 * eps))
    } else {
        0.0
    }
}

pub(crate) fn support(bands: usize, m: usize, eps: f64) -> BandSupport {
    let mf = m as f64;
    let big = bands as f64;
    let knots = if m == 0 {
        vec![0.0, (1.0 - eps) * PI, (1.0 + eps) * PI]
    } else if m + 1 < bands {
        vec![
            (mf - eps) * PI,
            (mf + eps) * PI,
            (mf + 1.0 - eps) * PI,
            (mf + 1.0 + eps) * PI,
        ]
    } else {
        vec![
            (mf - eps) * PI,
            (mf + eps) * PI,
            big * (1.0 - eps) * PI,
            big * (1.0 + eps) * PI,
        ]
    };
    BandSupport {
        lo: knots[0],
        hi: *knots.last().unwrap(),
        knots,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn window_is_power_complementary() {
        for taper in [Taper::Standard, Taper::Cubic, Taper::Linear] {
            for i in 0..=100 {
                let t = i as f64 / 100.0;
                let s = taper.w(t).powi(2) + taper.w(1.0 - t).powi(2);
                assert!((s - 1.0).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn bands_partition_unity() {
        // Σ_m |ψ̂_m(ω)|² = 1 on [π(1+ε)/M... ] is not required, but the
        // squared amplitudes of adjacent bands overlap complementarily.
        let eps = 0.2;
        for i in 0..400 {
            let w = 0.01 + 4.5 * PI * i as f64 / 400.0;
            let s: f64 = (0..4)
                .map(|m| amplitude(4, m, eps, Taper::Standard, w).powi(2))
                .sum();
            if w < 4.0 * PI * (1.0 - eps) {
                assert!((s - 1.0).abs() < 1e-14, "w={w} s={s}");
            }
        }
    }

    #[test]
    fn half_sample_phase_is_compatible() {
        for bands in 2..7 {
            let eps = 1.0 / (bands as f64 + 1.0);
            LinearPhase::half_sample(bands).check(bands, eps).unwrap();
        }
        let bad = LinearPhase {
            slopes: vec![0.0, 0.3],
            offsets: vec![0.0, 0.0],
        };
        assert!(bad.check(2, 1.0 / 3.0).is_err());
    }
}
