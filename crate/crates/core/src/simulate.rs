//! Monte Carlo estimation of subband covariances.
//!
//! Noise lives on a periodic grid of `L·R` points (`R` points per unit
//! length). Subband coefficients are the inner products
//! `n_{j,m}[k] = ∫ n(x) M^{−j/2} ψ_m(x/M^j − k) dx`, computed in the Fourier
//! domain: the noise spectrum is multiplied by the dilated (dual) wavelet
//! spectrum, folded onto the `L/M^j` coefficient frequencies and inverted.

use crate::covariance::{CovKind, NoiseModel, NoiseModel2D};
use crate::error::{Error, Result};
use crate::spectra::{Family, WaveletFamily};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};
use std::f64::consts::PI;
use std::sync::Arc;

/// Monte Carlo configuration.
#[derive(Clone, Debug)]
pub struct SimConfig {
    pub family: WaveletFamily,
    /// Delay of the dual scaling function.
    pub d: i64,
    /// Coarsest level `J`; levels `1..=J` are analysed.
    pub levels: u32,
    /// Signal length `L` (1D) or side length (2D) in unit lengths.
    pub signal_length: usize,
    /// Grid points per unit length.
    pub oversample: usize,
    pub runs: usize,
    pub base_seed: u64,
}

impl SimConfig {
    pub fn new(family: WaveletFamily, levels: u32, signal_length: usize) -> Self {
        Self {
            family,
            d: 0,
            levels,
            signal_length,
            oversample: 16,
            runs: 100,
            base_seed: 0,
        }
    }

    fn coarsest(&self) -> usize {
        self.family.bands().pow(self.levels)
    }

    /// Coefficients per subband (per axis in 2D) at level `j`.
    pub fn coefficients(&self, j: u32) -> usize {
        self.signal_length / self.family.bands().pow(j)
    }

    fn check_common(&self) -> Result<()> {
        if self.levels < 1 {
            return Err(Error::InvalidParam("at least one level is required".into()));
        }
        if self.runs < 2 {
            return Err(Error::InvalidParam("runs ≥ 2 required for a standard error".into()));
        }
        if self.oversample < 8 {
            return Err(Error::InvalidParam("oversampling must be at least 8".into()));
        }
        if self.signal_length % self.coarsest() != 0 {
            return Err(Error::InvalidParam(format!(
                "signal length {} is not a multiple of M^J = {}",
                self.signal_length,
                self.coarsest()
            )));
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        self.check_common()?;
        if self.coefficients(self.levels) < 64 {
            return Err(Error::InvalidParam(
                "fewer than 64 coefficients per subband at the coarsest level".into(),
            ));
        }
        Ok(())
    }

    pub fn validate_2d(&self) -> Result<()> {
        self.check_common()?;
        if self.coefficients(self.levels).pow(2) < 64 {
            return Err(Error::InvalidParam(
                "fewer than 64 coefficients per subband at the coarsest level".into(),
            ));
        }
        Ok(())
    }

    fn grid_points(&self) -> usize {
        self.signal_length * self.oversample
    }

    fn spacing(&self) -> f64 {
        1.0 / self.oversample as f64
    }
}

/// Noise samples on a uniform periodic grid.
#[derive(Clone, Debug, PartialEq)]
pub struct GridSignal {
    pub spacing: f64,
    pub values: Vec<f64>,
}

/// Noise samples on a square periodic grid, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct GridSignal2D {
    pub side: usize,
    pub spacing: f64,
    pub values: Vec<f64>,
}

/// Eigenvalues of the circulant covariance of `n` samples with spacing `dx`.
fn circulant_eigs(model: &NoiseModel, n: usize, dx: f64, planner: &mut FftPlanner<f64>) -> Result<Vec<f64>> {
    if let NoiseModel::White { sigma2 } = model {
        return Ok(vec![sigma2 / dx; n]);
    }
    let mut c: Vec<Complex64> = (0..n)
        .map(|p| Complex64::new(model.autocov(p.min(n - p) as f64 * dx), 0.0))
        .collect();
    planner.plan_fft_forward(n).process(&mut c);
    let max = c.iter().map(|z| z.re).fold(0.0, f64::max);
    let min = c.iter().map(|z| z.re).fold(f64::INFINITY, f64::min);
    if min < -1e-8 * max {
        return Err(Error::NonPositiveDefinite(min));
    }
    Ok(c.into_iter().map(|z| z.re.max(0.0)).collect())
}

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

/// DFT of a real stationary sequence with `E|X_q|² = n·λ_q`, Hermitian.
fn synth_spectrum_1d(lambda: &[f64], rng: &mut ChaCha8Rng) -> Vec<Complex64> {
    let n = lambda.len();
    let nf = n as f64;
    let mut x = vec![Complex64::new(0.0, 0.0); n];
    for q in 0..=n / 2 {
        let p = (n - q) % n;
        if p == q {
            x[q] = Complex64::new((nf * lambda[q]).sqrt() * normal(rng), 0.0);
        } else {
            let s = (0.5 * nf * lambda[q]).sqrt();
            let z = Complex64::new(s * normal(rng), s * normal(rng));
            x[q] = z;
            x[p] = z.conj();
        }
    }
    x
}

/// 2D analogue with `λ[q1,q2] = λ1[q1]·λ2[q2]`.
fn synth_spectrum_2d(l1: &[f64], l2: &[f64], rng: &mut ChaCha8Rng) -> Vec<Complex64> {
    let n = l1.len();
    let nn = (n * n) as f64;
    let mut x = vec![Complex64::new(0.0, 0.0); n * n];
    for q1 in 0..n {
        for q2 in 0..n {
            let i = q1 * n + q2;
            let p = ((n - q1) % n) * n + (n - q2) % n;
            let lam = l1[q1] * l2[q2];
            if p == i {
                x[i] = Complex64::new((nn * lam).sqrt() * normal(rng), 0.0);
            } else if p > i {
                let s = (0.5 * nn * lam).sqrt();
                let z = Complex64::new(s * normal(rng), s * normal(rng));
                x[i] = z;
                x[p] = z.conj();
            }
        }
    }
    x
}

/// Stationary noise on `n` periodic samples (`n` even) with spacing `dx`.
///
/// White noise of intensity `σ²` has i.i.d. samples of variance `σ²/dx`;
/// colored models use circulant embedding of `Γ_n`.
pub fn synth_noise(model: &NoiseModel, n: usize, dx: f64, seed: u64) -> Result<GridSignal> {
    check_grid(n, dx)?;
    model.validate()?;
    let mut planner = FftPlanner::new();
    let lambda = circulant_eigs(model, n, dx, &mut planner)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x = synth_spectrum_1d(&lambda, &mut rng);
    planner.plan_fft_inverse(n).process(&mut x);
    Ok(GridSignal {
        spacing: dx,
        values: x.iter().map(|z| z.re / n as f64).collect(),
    })
}

/// Separable noise on an `n × n` periodic grid.
pub fn synth_noise_2d(model: &NoiseModel2D, n: usize, dx: f64, seed: u64) -> Result<GridSignal2D> {
    check_grid(n, dx)?;
    let mut planner = FftPlanner::new();
    let (l1, l2) = eigs_2d(model, n, dx, &mut planner)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x = synth_spectrum_2d(&l1, &l2, &mut rng);
    let inv = planner.plan_fft_inverse(n);
    fft2(&mut x, n, &inv);
    let nn = (n * n) as f64;
    Ok(GridSignal2D {
        side: n,
        spacing: dx,
        values: x.iter().map(|z| z.re / nn).collect(),
    })
}

fn check_grid(n: usize, dx: f64) -> Result<()> {
    if n < 2 || n % 2 != 0 || !(dx > 0.0) {
        return Err(Error::InvalidParam("grid needs an even number of points and positive spacing".into()));
    }
    Ok(())
}

fn eigs_2d(model: &NoiseModel2D, n: usize, dx: f64, planner: &mut FftPlanner<f64>) -> Result<(Vec<f64>, Vec<f64>)> {
    match model {
        NoiseModel2D::White { sigma2 } => {
            if !(*sigma2 > 0.0) {
                return Err(Error::InvalidParam("sigma2 must be positive".into()));
            }
            Ok((vec![sigma2 / dx; n], vec![1.0 / dx; n]))
        }
        NoiseModel2D::Separable(a, b) => {
            a.validate()?;
            b.validate()?;
            Ok((circulant_eigs(a, n, dx, planner)?, circulant_eigs(b, n, dx, planner)?))
        }
    }
}

/// In-place 2D transform of a row-major `n × n` array.
fn fft2(x: &mut [Complex64], n: usize, fft: &Arc<dyn Fft<f64>>) {
    fft.process(x);
    transpose(x, n);
    fft.process(x);
    transpose(x, n);
}

fn transpose(x: &mut [Complex64], n: usize) {
    for i in 0..n {
        for k in i + 1..n {
            x.swap(i * n + k, k * n + i);
        }
    }
}

/// Uniform sampling grid `start + i·step`, `i < len`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid {
    pub start: f64,
    pub step: f64,
    pub len: usize,
}

/// A wavelet sampled on a grid, with the fraction of its energy captured.
#[derive(Clone, Debug, PartialEq)]
pub struct SampledFunction {
    pub grid: Grid,
    pub values: Vec<f64>,
    /// Fraction of the sampled energy inside the grid window.
    pub retained_energy: f64,
    /// Set when less than 99.9% of the energy lies on the grid.
    pub truncated: bool,
}

/// Minimum number of frequencies used by [`sample_wavelet`].
pub const SAMPLE_FREQUENCIES: usize = 1 << 16;

/// Samples `M^{−j/2} ψ_m(x/M^j − k)` (or its dual) on `grid`.
///
/// The primal Haar functions use their time-domain formula; everything else
/// is an inverse discrete Fourier sum of the spectrum.
pub fn sample_wavelet(
    fam: &WaveletFamily,
    m: usize,
    dual: bool,
    d: i64,
    j: i32,
    k: i64,
    grid: Grid,
) -> Result<SampledFunction> {
    fam.check_band(m)?;
    if grid.len == 0 || !(grid.step > 0.0) {
        return Err(Error::InvalidParam("empty sampling grid".into()));
    }
    let s = (fam.bands() as f64).powi(j);
    let amp = s.powf(-0.5);
    let u0 = grid.start / s - k as f64;
    let h = grid.step / s;
    let (values, total): (Vec<f64>, f64) = if !dual && matches!(fam.family(), Family::HaarPacket { depth: 1 }) {
        let v = (0..grid.len)
            .map(|i| {
                let u = u0 + i as f64 * h;
                let v = if !(0.0..1.0).contains(&u) {
                    0.0
                } else if m == 0 || u < 0.5 {
                    1.0
                } else {
                    -1.0
                };
                amp * v
            })
            .collect();
        (v, 1.0)
    } else {
        let n = (2 * grid.len).max(SAMPLE_FREQUENCIES).next_power_of_two();
        let period = n as f64 * h;
        let mut a: Vec<Complex64> = (0..n)
            .map(|q| {
                let qs = if q <= n / 2 { q as f64 } else { q as f64 - n as f64 };
                let w = 2.0 * PI * qs / period;
                let f = if dual { fam.psi_dual(m, w, d) } else { fam.psi(m, w) };
                f * Complex64::from_polar(1.0, w * u0)
            })
            .collect();
        FftPlanner::new().plan_fft_inverse(n).process(&mut a);
        let all: Vec<f64> = a.iter().map(|z| amp * z.re / period).collect();
        // energy of the band-limited samples over a whole period
        let total = all.iter().map(|v| v * v).sum::<f64>() * grid.step;
        (all[..grid.len].to_vec(), total)
    };
    let retained_energy = values.iter().map(|v| v * v).sum::<f64>() * grid.step / total;
    Ok(SampledFunction {
        grid,
        values,
        retained_energy,
        truncated: retained_energy < 0.999,
    })
}

/// Sample cross-covariance averaged over runs.
#[derive(Clone, Debug, PartialEq)]
pub struct MCEstimate {
    pub j: u32,
    pub m: usize,
    pub mprime: usize,
    pub kind: CovKind,
    pub lag: i64,
    pub mean: f64,
    /// Standard deviation across runs divided by `√runs`.
    pub stderr: f64,
    pub runs: usize,
}

/// Sequences correlated in 2D estimates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FieldKind {
    /// `Γ_{n, n^H}`
    PrimalDual,
    /// `Γ_{w, w}`
    WW,
    /// `Γ_{w^H, w^H}`
    WhWh,
    /// `Γ_{w, w^H}`
    WWh,
}

impl FieldKind {
    pub fn as_str(self) -> &'static str {
        match self {
            FieldKind::PrimalDual => "n_nH",
            FieldKind::WW => "w_w",
            FieldKind::WhWh => "wH_wH",
            FieldKind::WWh => "w_wH",
        }
    }
}

/// 2D sample cross-covariance averaged over runs.
#[derive(Clone, Debug, PartialEq)]
pub struct MCEstimate2D {
    pub j: u32,
    pub m: (usize, usize),
    pub kind: FieldKind,
    pub lag: (i64, i64),
    pub mean: f64,
    pub stderr: f64,
    pub runs: usize,
}

/// Nonzero samples of `H(ω_q) = M^{j/2} conj(ψ̂(M^j ω_q))` on the DFT frequencies.
struct Filter {
    taps: Vec<(usize, Complex64)>,
}

fn build_filter(fam: &WaveletFamily, m: usize, dual: bool, d: i64, j: u32, n: usize, length: f64) -> Filter {
    let s = (fam.bands() as f64).powi(j as i32);
    let amp = s.sqrt();
    let mut taps = Vec::new();
    for q in 0..n {
        // the Nyquist bin is dropped to keep the spectrum Hermitian
        if q == n / 2 {
            continue;
        }
        let qs = if q < n / 2 { q as f64 } else { q as f64 - n as f64 };
        let w = 2.0 * PI * qs / length * s;
        let f = if dual { fam.psi_dual(m, w, d) } else { fam.psi(m, w) };
        if f.norm_sqr() > 0.0 {
            taps.push((q, amp * f.conj()));
        }
    }
    Filter { taps }
}

/// Real coefficients `c[k] = (1/N) Σ_q X_q H_q e^{2πi q k / K}`.
fn project_1d(x: &[Complex64], filter: &Filter, k: usize, ifft: &Arc<dyn Fft<f64>>) -> Vec<f64> {
    let mut folded = vec![Complex64::new(0.0, 0.0); k];
    for &(q, h) in &filter.taps {
        folded[q % k] += x[q] * h;
    }
    ifft.process(&mut folded);
    let n = x.len() as f64;
    folded.iter().map(|z| z.re / n).collect()
}

fn project_2d(
    x: &[Complex64],
    n: usize,
    f1: &Filter,
    f2: &Filter,
    k: usize,
    ifft: &Arc<dyn Fft<f64>>,
) -> Vec<f64> {
    let mut folded = vec![Complex64::new(0.0, 0.0); k * k];
    for &(q1, h1) in &f1.taps {
        let row = &x[q1 * n..(q1 + 1) * n];
        let base = (q1 % k) * k;
        for &(q2, h2) in &f2.taps {
            folded[base + q2 % k] += row[q2] * (h1 * h2);
        }
    }
    fft2(&mut folded, k, ifft);
    let nn = (n * n) as f64;
    folded.iter().map(|z| z.re / nn).collect()
}

/// Biased circular estimate `(1/K) Σ_k a[k+ℓ] b[k]`.
fn circular_cov(a: &[f64], b: &[f64], lag: i64) -> f64 {
    let k = a.len();
    let shift = lag.rem_euclid(k as i64) as usize;
    let mut acc = 0.0;
    for (i, bi) in b.iter().enumerate() {
        let mut p = i + shift;
        if p >= k {
            p -= k;
        }
        acc += a[p] * bi;
    }
    acc / k as f64
}

fn circular_cov_2d(a: &[f64], b: &[f64], k: usize, lag: (i64, i64)) -> f64 {
    let s1 = lag.0.rem_euclid(k as i64) as usize;
    let s2 = lag.1.rem_euclid(k as i64) as usize;
    let mut acc = 0.0;
    for i1 in 0..k {
        let r = ((i1 + s1) % k) * k;
        let brow = &b[i1 * k..(i1 + 1) * k];
        for (i2, bv) in brow.iter().enumerate() {
            let mut p = i2 + s2;
            if p >= k {
                p -= k;
            }
            acc += a[r + p] * bv;
        }
    }
    acc / (k * k) as f64
}

fn mean_stderr(samples: &[f64]) -> (f64, f64) {
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Aggregates per-run estimate vectors in run order.
fn aggregate(per_run: &[Vec<f64>]) -> Vec<(f64, f64)> {
    let cells = per_run.first().map_or(0, |r| r.len());
    (0..cells)
        .map(|c| {
            let col: Vec<f64> = per_run.iter().map(|r| r[c]).collect();
            mean_stderr(&col)
        })
        .collect()
}

/// Cell layout of a 1D run: level, primal band, second band, kind, lag.
fn cells_1d(config: &SimConfig, lags: &[i64]) -> Vec<(u32, usize, usize, CovKind, i64)> {
    let bands = config.family.bands();
    let mut out = Vec::new();
    for j in 1..=config.levels {
        for m in 0..bands {
            for mp in 0..bands {
                for kind in [CovKind::PrimalPrimal, CovKind::DualDual, CovKind::PrimalDual] {
                    for &l in lags {
                        out.push((j, m, mp, kind, l));
                    }
                }
            }
        }
    }
    out
}

/// Estimates `E{a_{j,m}[k+ℓ] b_{j,m'}[k]}` for every level `1..=J`, band
/// pair and kind (primal/primal, dual/dual, primal/dual).
pub fn mc_run_1d(config: &SimConfig, model: &NoiseModel, lags: &[i64]) -> Result<Vec<MCEstimate>> {
    config.validate()?;
    model.validate()?;
    let fam = &config.family;
    let bands = fam.bands();
    let n = config.grid_points();
    let length = config.signal_length as f64;
    let mut planner = FftPlanner::new();
    let lambda = circulant_eigs(model, n, config.spacing(), &mut planner)?;
    let mut filters = Vec::new();
    let mut iffts = Vec::new();
    for j in 1..=config.levels {
        iffts.push(planner.plan_fft_inverse(config.coefficients(j)));
        for m in 0..bands {
            for dual in [false, true] {
                filters.push(build_filter(fam, m, dual, config.d, j, n, length));
            }
        }
    }
    let filter_at = |j: u32, m: usize, dual: bool| &filters[((j - 1) as usize * bands + m) * 2 + dual as usize];
    let cells = cells_1d(config, lags);

    let per_run: Vec<Vec<f64>> = (0..config.runs)
        .into_par_iter()
        .map(|run| {
            let mut rng = ChaCha8Rng::seed_from_u64(config.base_seed.wrapping_add(run as u64));
            let x = synth_spectrum_1d(&lambda, &mut rng);
            let mut coeffs: Vec<Vec<f64>> = Vec::with_capacity(filters.len());
            for j in 1..=config.levels {
                let k = config.coefficients(j);
                for m in 0..bands {
                    for dual in [false, true] {
                        coeffs.push(project_1d(&x, filter_at(j, m, dual), k, &iffts[(j - 1) as usize]));
                    }
                }
            }
            let c = |j: u32, m: usize, dual: bool| &coeffs[((j - 1) as usize * bands + m) * 2 + dual as usize];
            cells
                .iter()
                .map(|&(j, m, mp, kind, l)| {
                    let (a, b) = match kind {
                        CovKind::PrimalPrimal => (c(j, m, false), c(j, mp, false)),
                        CovKind::DualDual => (c(j, m, true), c(j, mp, true)),
                        CovKind::PrimalDual => (c(j, m, false), c(j, mp, true)),
                    };
                    circular_cov(a, b, l)
                })
                .collect()
        })
        .collect();

    Ok(cells
        .iter()
        .zip(aggregate(&per_run))
        .map(|(&(j, m, mprime, kind, lag), (mean, stderr))| MCEstimate {
            j,
            m,
            mprime,
            kind,
            lag,
            mean,
            stderr,
            runs: config.runs,
        })
        .collect())
}

/// Estimates `Γ_{n_{j,𝐦}, n^H_{j,𝐦}}[𝓵]` for every level `1..=J` and subband
/// `𝐦 ∈ {0..M−1}²`; with `post_transform`, also the `w`/`w^H` covariances of
/// the detail subbands with both components nonzero.
pub fn mc_run_2d(
    config: &SimConfig,
    model: &NoiseModel2D,
    lags: &[(i64, i64)],
    post_transform: bool,
) -> Result<Vec<MCEstimate2D>> {
    config.validate_2d()?;
    let fam = &config.family;
    let bands = fam.bands();
    let n = config.grid_points();
    let length = config.signal_length as f64;
    let mut planner = FftPlanner::new();
    let (l1, l2) = eigs_2d(model, n, config.spacing(), &mut planner)?;
    let mut filters = Vec::new();
    let mut iffts = Vec::new();
    for j in 1..=config.levels {
        iffts.push(planner.plan_fft_inverse(config.coefficients(j)));
        for m in 0..bands {
            for dual in [false, true] {
                filters.push(build_filter(fam, m, dual, config.d, j, n, length));
            }
        }
    }
    let filter_at = |j: u32, m: usize, dual: bool| &filters[((j - 1) as usize * bands + m) * 2 + dual as usize];

    let mut cells = Vec::new();
    for j in 1..=config.levels {
        for m1 in 0..bands {
            for m2 in 0..bands {
                let mut kinds = vec![FieldKind::PrimalDual];
                if post_transform && m1 != 0 && m2 != 0 {
                    kinds.extend([FieldKind::WW, FieldKind::WhWh, FieldKind::WWh]);
                }
                for kind in kinds {
                    for &l in lags {
                        cells.push((j, (m1, m2), kind, l));
                    }
                }
            }
        }
    }

    let per_run: Vec<Vec<f64>> = (0..config.runs)
        .into_par_iter()
        .map(|run| {
            let mut rng = ChaCha8Rng::seed_from_u64(config.base_seed.wrapping_add(run as u64));
            let x = synth_spectrum_2d(&l1, &l2, &mut rng);
            let mut out = Vec::with_capacity(cells.len());
            let mut current: Option<(u32, (usize, usize), [Vec<f64>; 4])> = None;
            for &(j, m, kind, l) in &cells {
                let fresh = !matches!(&current, Some((cj, cm, _)) if *cj == j && *cm == m);
                if fresh {
                    let k = config.coefficients(j);
                    let ifft = &iffts[(j - 1) as usize];
                    let a = project_2d(&x, n, filter_at(j, m.0, false), filter_at(j, m.1, false), k, ifft);
                    let b = project_2d(&x, n, filter_at(j, m.0, true), filter_at(j, m.1, true), k, ifft);
                    let r = std::f64::consts::FRAC_1_SQRT_2;
                    let w: Vec<f64> = a.iter().zip(&b).map(|(p, q)| r * (p + q)).collect();
                    let wh: Vec<f64> = a.iter().zip(&b).map(|(p, q)| r * (p - q)).collect();
                    current = Some((j, m, [a, b, w, wh]));
                }
                let (_, _, f) = current.as_ref().unwrap();
                let k = config.coefficients(j);
                let v = match kind {
                    FieldKind::PrimalDual => circular_cov_2d(&f[0], &f[1], k, l),
                    FieldKind::WW => circular_cov_2d(&f[2], &f[2], k, l),
                    FieldKind::WhWh => circular_cov_2d(&f[3], &f[3], k, l),
                    FieldKind::WWh => circular_cov_2d(&f[2], &f[3], k, l),
                };
                out.push(v);
            }
            out
        })
        .collect();

    Ok(cells
        .iter()
        .zip(aggregate(&per_run))
        .map(|(&(j, m, kind, lag), (mean, stderr))| MCEstimate2D {
            j,
            m,
            kind,
            lag,
            mean,
            stderr,
            runs: config.runs,
        })
        .collect())
}

/// `(mean − theory)/stderr`, with `stderr = 0` mapped to 0 or ±∞.
pub fn z_score(mean: f64, stderr: f64, theory: f64) -> f64 {
    let diff = mean - theory;
    if stderr > 0.0 {
        diff / stderr
    } else if diff.abs() < 1e-12 {
        0.0
    } else {
        diff.signum() * f64::INFINITY
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::covariance::TabulatedCov;
    use crate::xcorr::{gamma, Method};

    #[test]
    fn synthesis_is_deterministic() {
        let m = NoiseModel::exponential(1.0, 1.0);
        let a = synth_noise(&m, 256, 0.25, 7).unwrap();
        let b = synth_noise(&m, 256, 0.25, 7).unwrap();
        let c = synth_noise(&m, 256, 0.25, 8).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn white_synthesis_variance() {
        let dx = 1.0 / 16.0;
        let s = synth_noise(&NoiseModel::white(1.0), 1 << 16, dx, 3).unwrap();
        let v = s.values.iter().map(|x| x * x).sum::<f64>() / s.values.len() as f64;
        // iid samples of variance 16; relative stderr √(2/65536)
        assert!((v / 16.0 - 1.0).abs() < 3.0 * (2.0f64 / 65536.0).sqrt() * 3.0);
    }

    #[test]
    fn white_noise_isometry_on_unit_norm_function() {
        // ∫ n f with f = indicator of [0,1): variance ‖f‖² = 1
        let dx = 1.0 / 16.0;
        let vals: Vec<f64> = (0..100)
            .map(|run| {
                let s = synth_noise(&NoiseModel::white(1.0), 512, dx, 1000 + run).unwrap();
                s.values[..16].iter().sum::<f64>() * dx
            })
            .collect();
        let v: Vec<f64> = vals.iter().map(|x| x * x).collect();
        let (mean, se) = mean_stderr(&v);
        assert!((mean - 1.0).abs() <= 3.0 * se, "{mean} ± {se}");
    }

    #[test]
    fn exponential_synthesis_lag_one() {
        let dx = 0.25;
        let n = 1 << 14;
        let m = NoiseModel::exponential(1.0, 1.0);
        let est: Vec<f64> = (0..20)
            .map(|run| {
                let s = synth_noise(&m, n, dx, run).unwrap();
                (0..n).map(|i| s.values[i] * s.values[(i + 4) % n]).sum::<f64>() / n as f64
            })
            .collect();
        let (mean, se) = mean_stderr(&est);
        let target = (-1.0f64).exp();
        assert!((mean - target).abs() <= 3.0 * se, "{mean} ± {se}");
    }

    #[test]
    fn non_positive_tabulated_covariance_is_rejected() {
        let t = TabulatedCov::new(1.0, vec![1.0, 1.0, 1.0, -1.0, -1.0, 0.0]).unwrap();
        let r = synth_noise(&NoiseModel::Tabulated(t), 64, 1.0, 0);
        assert!(matches!(r, Err(Error::NonPositiveDefinite(_))));
    }

    #[test]
    fn haar_sampling() {
        let fam = WaveletFamily::haar();
        let g = Grid { start: -1.0, step: 0.125, len: 32 };
        let s = sample_wavelet(&fam, 0, false, 0, 0, 0, g).unwrap();
        for (i, v) in s.values.iter().enumerate() {
            let x = -1.0 + i as f64 * 0.125;
            assert_eq!(*v, if (0.0..1.0).contains(&x) { 1.0 } else { 0.0 });
        }
        assert!((s.retained_energy - 1.0).abs() < 1e-12);

        let g = Grid { start: -64.0, step: 1.0 / 32.0, len: 128 * 32 };
        let s = sample_wavelet(&fam, 1, true, 0, 0, 0, g).unwrap();
        assert!(s.retained_energy >= 0.999 && !s.truncated, "{}", s.retained_energy);
    }

    #[test]
    fn haar_fourier_sampling_matches_formula() {
        // the Fourier route of the scaling function, away from its jumps
        let fam = WaveletFamily::haar_packet(2).unwrap();
        let g = Grid { start: 0.1, step: 0.2, len: 4 };
        let s = sample_wavelet(&fam, 1, false, 0, 0, 0, g).unwrap();
        let expect = [1.0, 1.0, -1.0, -1.0];
        for (v, e) in s.values.iter().zip(expect) {
            assert!((v - e).abs() < 0.02, "{v} vs {e}");
        }
    }

    #[test]
    fn shannon_sampled_norm() {
        let fam = WaveletFamily::shannon(2).unwrap();
        let g = Grid { start: -2048.0, step: 1.0 / 16.0, len: 4096 * 16 };
        let s = sample_wavelet(&fam, 0, false, 0, 0, 0, g).unwrap();
        assert!((s.retained_energy - 1.0).abs() < 1e-4, "{}", s.retained_energy);
    }

    #[test]
    fn config_validation() {
        let mut c = SimConfig::new(WaveletFamily::shannon(2).unwrap(), 3, 1 << 10);
        assert!(c.validate().is_ok());
        c.runs = 1;
        assert!(c.validate().is_err());
        c.runs = 2;
        c.signal_length = 1001;
        assert!(c.validate().is_err());
        c.signal_length = 256;
        assert!(c.validate().is_err());
        c.signal_length = 1 << 10;
        c.oversample = 4;
        assert!(c.validate().is_err());
    }

    #[test]
    fn small_shannon_run_agrees_with_theory() {
        let fam = WaveletFamily::shannon(2).unwrap();
        let mut c = SimConfig::new(fam.clone(), 2, 1 << 10);
        c.runs = 40;
        c.oversample = 8;
        let est = mc_run_1d(&c, &NoiseModel::white(1.0), &[0, 1, 2]).unwrap();
        let mut ok = 0;
        let mut total = 0;
        for e in &est {
            let theory = match e.kind {
                CovKind::PrimalDual => gamma(&fam, e.m, e.mprime, -(e.lag as f64), 0, Method::Auto).unwrap().0.value,
                _ => (e.m == e.mprime && e.lag == 0) as u8 as f64,
            };
            total += 1;
            if z_score(e.mean, e.stderr, theory).abs() <= 3.0 {
                ok += 1;
            }
        }
        assert!(ok as f64 >= 0.9 * total as f64, "{ok}/{total}");
        let again = mc_run_1d(&c, &NoiseModel::white(1.0), &[0, 1, 2]).unwrap();
        assert_eq!(est, again);
    }

    #[test]
    fn small_two_dimensional_run() {
        let fam = WaveletFamily::meyer(3, 0.25).unwrap();
        let mut c = SimConfig::new(fam, 1, 36);
        c.runs = 10;
        c.oversample = 8;
        let est = mc_run_2d(&c, &NoiseModel2D::White { sigma2: 1.0 }, &[(0, 0), (0, 1), (1, 1)], true).unwrap();
        assert_eq!(est.len(), 9 * 3 + 4 * 9);
        let first = &est[0];
        assert_eq!(first.m, (0, 0));
        assert!(first.mean > 0.2);
    }
}
