//! Fourier-domain descriptions of the supported wavelet families and their
//! Hilbert duals.
//!
//! Every family exposes `ψ̂_m(ω)` for `0 ≤ m < M`, the squared modulus, the
//! support used to bound quadrature domains and the number of vanishing
//! moments. Spectra are immutable and can be shared between threads.

mod filters;
mod meyer;
mod splines;

pub use filters::{para_unitary_residual, parse_filter_file, parse_filter_text, spectrum_from_filters, FilterBank, ProductValue};
pub use meyer::{LinearPhase, Taper};
pub use splines::SplineLattice;

use crate::error::{Error, Result};
use crate::special::sinc;
use num_complex::Complex64;
use std::f64::consts::PI;

/// Default depth of truncated infinite products.
pub const DEFAULT_PRODUCT_DEPTH: usize = 24;

/// Family-specific parameters.
#[derive(Clone, Debug)]
pub enum Family {
    /// Ideal band-pass filters.
    Shannon,
    /// Meyer wavelets with transition half-width `eps`.
    Meyer {
        eps: f64,
        taper: Taper,
        phase: Option<LinearPhase>,
    },
    /// Haar (`M = 2`) and Walsh-Hadamard packets (`M = 2^P`).
    HaarPacket { depth: u32 },
    /// Franklin (linear spline) wavelets.
    Franklin,
    /// Battle-Lemarié spline wavelets of odd order.
    BattleLemarie(SplineLattice),
    /// Wavelets defined by a user supplied para-unitary filter bank.
    CustomFir { bank: FilterBank, depth: usize },
}

/// A wavelet family together with its number of bands `M`.
#[derive(Clone, Debug)]
pub struct WaveletFamily {
    family: Family,
    bands: usize,
}

/// Interval on the positive frequency axis outside of which `ψ̂_m` vanishes
/// (or drops below 1e-12), plus the interior points where the spectrum is
/// not smooth.
#[derive(Clone, Debug, PartialEq)]
pub struct BandSupport {
    pub lo: f64,
    /// `f64::INFINITY` for families that are not band-limited.
    pub hi: f64,
    /// Sorted breakpoints in `[lo, hi]`, including the ends when finite.
    pub knots: Vec<f64>,
}

impl BandSupport {
    pub fn is_bounded(&self) -> bool {
        self.hi.is_finite()
    }
}

impl WaveletFamily {
    pub fn shannon(bands: usize) -> Result<Self> {
        check_bands(bands)?;
        Ok(Self {
            family: Family::Shannon,
            bands,
        })
    }

    /// Meyer wavelets with the standard degree-7 taper and no phase.
    pub fn meyer(bands: usize, eps: f64) -> Result<Self> {
        Self::meyer_with(bands, eps, Taper::Standard, None)
    }

    pub fn meyer_with(
        bands: usize,
        eps: f64,
        taper: Taper,
        phase: Option<LinearPhase>,
    ) -> Result<Self> {
        check_bands(bands)?;
        if !(eps > 0.0 && eps <= 1.0 / (bands as f64 + 1.0) + 1e-15) {
            return Err(Error::InvalidParam(format!(
                "Meyer eps must lie in (0, 1/(M+1)] = (0, {:.6}], got {eps}",
                1.0 / (bands as f64 + 1.0)
            )));
        }
        if let Some(p) = &phase {
            p.check(bands, eps)?;
        }
        Ok(Self {
            family: Family::Meyer { eps, taper, phase },
            bands,
        })
    }

    /// Haar for `M = 2`, Walsh-Hadamard packets for larger powers of two.
    pub fn haar_packet(bands: usize) -> Result<Self> {
        check_bands(bands)?;
        if !bands.is_power_of_two() {
            return Err(Error::InvalidParam(format!(
                "Walsh-Hadamard packets need M a power of two, got {bands}"
            )));
        }
        Ok(Self {
            family: Family::HaarPacket {
                depth: bands.trailing_zeros(),
            },
            bands,
        })
    }

    pub fn haar() -> Self {
        Self {
            family: Family::HaarPacket { depth: 1 },
            bands: 2,
        }
    }

    pub fn franklin() -> Self {
        Self {
            family: Family::Franklin,
            bands: 2,
        }
    }

    /// Battle-Lemarié wavelets of odd spline order (order 1 is Franklin).
    pub fn battle_lemarie(order: u32) -> Result<Self> {
        Ok(Self {
            family: Family::BattleLemarie(SplineLattice::new(order)?),
            bands: 2,
        })
    }

    /// Wavelets generated by a filter bank, with product depth `depth`.
    pub fn custom_fir(bank: FilterBank, depth: usize) -> Result<Self> {
        if depth < 8 {
            return Err(Error::InvalidParam(format!(
                "product depth must be at least 8, got {depth}"
            )));
        }
        let bands = bank.bands();
        Ok(Self {
            family: Family::CustomFir { bank, depth },
            bands,
        })
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn bands(&self) -> usize {
        self.bands
    }

    /// Short label used in reports.
    pub fn label(&self) -> String {
        match &self.family {
            Family::Shannon => "shannon".into(),
            Family::Meyer { .. } => "meyer".into(),
            Family::HaarPacket { .. } => "haar".into(),
            Family::Franklin => "franklin".into(),
            Family::BattleLemarie(s) => format!("spline{}", s.order()),
            Family::CustomFir { .. } => "custom".into(),
        }
    }

    /// Meyer transition parameter, if any.
    pub fn eps(&self) -> Option<f64> {
        match &self.family {
            Family::Meyer { eps, .. } => Some(*eps),
            _ => None,
        }
    }

    pub fn is_band_limited(&self) -> bool {
        matches!(self.family, Family::Shannon | Family::Meyer { .. })
    }

    /// Whether `ψ̂_m` carries its true phase (needed by inter-band work).
    pub fn has_phase(&self, m: usize) -> bool {
        match &self.family {
            Family::Meyer { phase, .. } => m == 0 || phase.is_some(),
            _ => true,
        }
    }

    pub fn check_band(&self, m: usize) -> Result<()> {
        if m >= self.bands {
            Err(Error::UnknownBand {
                m,
                bands: self.bands,
            })
        } else {
            Ok(())
        }
    }

    /// Band `m` as a [`WaveletSpectrum`].
    pub fn band(&self, m: usize) -> Result<WaveletSpectrum<'_>> {
        self.check_band(m)?;
        Ok(WaveletSpectrum { family: self, m })
    }

    /// `ψ̂_m(ω)`.
    pub fn spectrum(&self, m: usize, w: f64) -> Result<Complex64> {
        self.check_band(m)?;
        Ok(self.psi(m, w))
    }

    /// `|ψ̂_m(ω)|²`.
    pub fn sq_modulus(&self, m: usize, w: f64) -> Result<f64> {
        self.check_band(m)?;
        Ok(self.psi_sq(m, w))
    }

    /// `ψ̂_m^H(ω)` for the dual tree with delay `d`.
    pub fn dual_spectrum(&self, m: usize, w: f64, d: i64) -> Result<Complex64> {
        self.check_band(m)?;
        Ok(self.psi_dual(m, w, d))
    }

    pub(crate) fn psi(&self, m: usize, w: f64) -> Complex64 {
        match &self.family {
            Family::Shannon => {
                let a = w.abs();
                let lo = m as f64 * PI;
                if a >= lo && a < lo + PI {
                    Complex64::new(1.0, 0.0)
                } else {
                    Complex64::new(0.0, 0.0)
                }
            }
            Family::Meyer { eps, taper, phase } => {
                let amp = meyer::amplitude(self.bands, m, *eps, *taper, w);
                if amp == 0.0 {
                    return Complex64::new(0.0, 0.0);
                }
                match phase {
                    Some(p) if m > 0 => Complex64::from_polar(amp, p.eta(m, w)),
                    _ => Complex64::new(amp, 0.0),
                }
            }
            Family::HaarPacket { depth } => haar_packet_spectrum(*depth, m, w),
            Family::Franklin => franklin_spectrum(m, w),
            Family::BattleLemarie(s) => s.spectrum(m, w),
            Family::CustomFir { bank, depth } => bank.product(m, w, *depth).value,
        }
    }

    pub(crate) fn psi_sq(&self, m: usize, w: f64) -> f64 {
        match &self.family {
            Family::Shannon => self.psi(m, w).re,
            Family::Meyer { eps, taper, .. } => {
                let a = meyer::amplitude(self.bands, m, *eps, *taper, w);
                a * a
            }
            Family::Franklin => franklin_sq(m, w),
            Family::BattleLemarie(s) => s.sq_modulus(m, w),
            _ => self.psi(m, w).norm_sqr(),
        }
    }

    pub(crate) fn psi_dual(&self, m: usize, w: f64, d: i64) -> Complex64 {
        let p = self.psi(m, w);
        p * dual_factor(m, w, d)
    }

    /// Positive-frequency support of `ψ̂_m`.
    pub fn support(&self, m: usize) -> Result<BandSupport> {
        self.check_band(m)?;
        Ok(match &self.family {
            Family::Shannon => {
                let lo = m as f64 * PI;
                BandSupport {
                    lo,
                    hi: lo + PI,
                    knots: vec![lo, lo + PI],
                }
            }
            Family::Meyer { eps, .. } => meyer::support(self.bands, m, *eps),
            _ => BandSupport {
                lo: 0.0,
                hi: f64::INFINITY,
                knots: vec![0.0],
            },
        })
    }

    /// Exponent `q` with `|ψ̂_m(ω)|² = O(|ω|^{-q})`; `None` when band-limited.
    pub fn sq_decay(&self, _m: usize) -> Option<u32> {
        match &self.family {
            Family::Shannon | Family::Meyer { .. } => None,
            Family::HaarPacket { .. } | Family::CustomFir { .. } => Some(2),
            Family::Franklin => Some(4),
            Family::BattleLemarie(s) => Some(2 * (s.order() + 1)),
        }
    }

    /// A frequency length over which the spectra of non-band-limited
    /// families repeat their numerator pattern, used to align truncation.
    pub fn period_hint(&self) -> f64 {
        match &self.family {
            Family::HaarPacket { depth } => 2f64.powi(*depth as i32 + 2) * PI,
            Family::CustomFir { bank, .. } => match bank.packet_depth() {
                Some(p) => 2f64.powi(p as i32 + 2) * PI,
                None => 4.0 * PI * self.bands as f64,
            },
            _ => 8.0 * PI,
        }
    }

    /// Order of the zero of `ψ̂_m` at the origin.
    ///
    /// For `m = 0` the minimum over the wavelet bands is returned. `None`
    /// stands for infinitely many (spectrum vanishing near zero).
    pub fn vanishing_moments(&self, m: usize) -> Result<Option<u32>> {
        self.check_band(m)?;
        if m == 0 {
            let mut best: Option<u32> = None;
            for k in 1..self.bands {
                if let Some(n) = self.vanishing_moments(k)? {
                    best = Some(best.map_or(n, |b: u32| b.min(n)));
                }
            }
            return Ok(best);
        }
        Ok(match &self.family {
            Family::Shannon | Family::Meyer { .. } => None,
            Family::HaarPacket { .. } => Some(m.count_ones()),
            Family::Franklin => Some(2),
            Family::BattleLemarie(s) => Some(s.order() + 1),
            Family::CustomFir { bank, .. } => Some(bank.vanishing_moments(m)),
        })
    }
}

fn check_bands(bands: usize) -> Result<()> {
    if bands < 2 {
        Err(Error::InvalidParam(format!(
            "number of bands must be at least 2, got {bands}"
        )))
    } else {
        Ok(())
    }
}

/// Phase factor mapping `ψ̂_m` to `ψ̂_m^H`.
pub(crate) fn dual_factor(m: usize, w: f64, d: i64) -> Complex64 {
    if m != 0 {
        // −i·sign(ω)
        if w > 0.0 {
            Complex64::new(0.0, -1.0)
        } else if w < 0.0 {
            Complex64::new(0.0, 1.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    } else {
        let k = (w / (2.0 * PI)).floor() as i64;
        let e = if k >= 0 { k } else { k + 1 };
        let sign = if e.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
        Complex64::from_polar(sign, -(d as f64 + 0.5) * w)
    }
}

/// `(-1)^{floor(ω/2π)}` on the positive axis, the sign pattern of the dual
/// scaling function.
pub(crate) fn band_sign(w: f64) -> f64 {
    let k = (w / (2.0 * PI)).floor() as i64;
    if k.rem_euclid(2) == 0 {
        1.0
    } else {
        -1.0
    }
}

fn haar_packet_spectrum(depth: u32, m: usize, w: f64) -> Complex64 {
    let mut acc = Complex64::new(1.0, 0.0);
    let mut digits = m;
    let mut scale = 0.5;
    for _ in 0..depth {
        let e = Complex64::from_polar(1.0, -w * scale);
        let factor = if digits & 1 == 0 {
            (Complex64::new(1.0, 0.0) + e) * 0.5
        } else {
            (Complex64::new(1.0, 0.0) - e) * 0.5
        };
        acc *= factor;
        digits >>= 1;
        scale *= 0.5;
    }
    // Haar scaling spectrum at ω/2^P: sinc(ω/2^{P+1}) e^{-iω/2^{P+1}}
    acc * Complex64::from_polar(sinc(w * scale), -w * scale)
}

fn franklin_sq(m: usize, w: f64) -> f64 {
    if m == 0 {
        let c = (0.5 * w).cos();
        let s = sinc(0.5 * w);
        3.0 / (1.0 + 2.0 * c * c) * s.powi(4)
    } else {
        let c2 = (0.5 * w).cos();
        let c4 = (0.25 * w).cos();
        let s4 = (0.25 * w).sin();
        let num = 3.0 * (1.0 + 2.0 * s4 * s4);
        let den = (1.0 + 2.0 * c2 * c2) * (1.0 + 2.0 * c4 * c4);
        num / den * s4.powi(4) * sinc(0.25 * w).powi(4)
    }
}

fn franklin_spectrum(m: usize, w: f64) -> Complex64 {
    if m == 0 {
        let c = (0.5 * w).cos();
        let s = sinc(0.5 * w);
        Complex64::new((3.0 / (1.0 + 2.0 * c * c)).sqrt() * s * s, 0.0)
    } else {
        let c2 = (0.5 * w).cos();
        let c4 = (0.25 * w).cos();
        let s4 = (0.25 * w).sin();
        let num = 3.0 * (1.0 + 2.0 * s4 * s4);
        let den = (1.0 + 2.0 * c2 * c2) * (1.0 + 2.0 * c4 * c4);
        let amp = (num / den).sqrt() * s4 * s4 * sinc(0.25 * w).powi(2);
        -Complex64::from_polar(amp, -0.5 * w)
    }
}

/// One band of a wavelet family.
#[derive(Clone, Copy, Debug)]
pub struct WaveletSpectrum<'a> {
    family: &'a WaveletFamily,
    m: usize,
}

impl<'a> WaveletSpectrum<'a> {
    pub fn family(&self) -> &'a WaveletFamily {
        self.family
    }

    pub fn index(&self) -> usize {
        self.m
    }

    pub fn eval_complex(&self, w: f64) -> Complex64 {
        self.family.psi(self.m, w)
    }

    pub fn eval_sq(&self, w: f64) -> f64 {
        self.family.psi_sq(self.m, w)
    }

    pub fn band_support(&self) -> BandSupport {
        self.family
            .support(self.m)
            .expect("band index validated at construction")
    }

    pub fn vanishing_moments(&self) -> Option<u32> {
        self.family
            .vanishing_moments(self.m)
            .expect("band index validated at construction")
    }

    /// The Hilbert dual of this band with delay `d`.
    pub fn dual(&self, d: i64) -> DualSpectrum<'a> {
        DualSpectrum { primal: *self, d }
    }
}

/// `ψ_m^H` for a given delay.
#[derive(Clone, Copy, Debug)]
pub struct DualSpectrum<'a> {
    primal: WaveletSpectrum<'a>,
    d: i64,
}

impl DualSpectrum<'_> {
    pub fn delay(&self) -> i64 {
        self.d
    }

    pub fn eval_complex(&self, w: f64) -> Complex64 {
        self.primal.eval_complex(w) * dual_factor(self.primal.m, w, self.d)
    }

    pub fn eval_sq(&self, w: f64) -> f64 {
        self.primal.eval_sq(w)
    }
}
