//! Covariances of stationary noise seen through a dual-tree decomposition.
//!
//! With `Γ_n(τ) = E{n(x+τ) n(x)}`, the subband covariances are
//! `Γ[ℓ] = E{n_{j,m}[k+ℓ] n'_{j,m'}[k]} = ∫ Γ_n(x) γ(x/M^j − ℓ) dx`
//! where `γ` is the deterministic correlation of the two analysing functions.

use crate::error::{Error, Result};
use crate::quad::{integrate_points, refine_points, QuadOptions};
use crate::spectra::WaveletFamily;
use crate::xcorr::{self, autocorr_quad, CorrelationSequence, Method};
use rayon::prelude::*;
use std::fmt;
use std::path::Path;

/// Cubic (Catmull-Rom) interpolation on a uniform grid.
#[derive(Clone, Debug, PartialEq)]
pub struct UniformTable {
    pub start: f64,
    pub step: f64,
    pub values: Vec<f64>,
}

impl UniformTable {
    pub fn new(start: f64, step: f64, values: Vec<f64>) -> Result<Self> {
        if !(step > 0.0) || values.len() < 2 {
            return Err(Error::InvalidParam(
                "a table needs a positive step and at least two samples".into(),
            ));
        }
        Ok(Self { start, step, values })
    }

    pub fn end(&self) -> f64 {
        self.start + self.step * (self.values.len() - 1) as f64
    }

    /// Interpolated value, `None` outside `[start, end]`.
    pub fn eval(&self, x: f64) -> Option<f64> {
        self.eval_with(x, |i| self.values.get(i as usize).copied())
    }

    // `sample(i)` supplies the ghost points beyond both ends.
    fn eval_with<S: Fn(i64) -> Option<f64>>(&self, x: f64, sample: S) -> Option<f64> {
        let n = self.values.len() as i64;
        let t = (x - self.start) / self.step;
        if !(t >= -1e-9 && t <= (n - 1) as f64 + 1e-9) {
            return None;
        }
        let i = (t.floor() as i64).clamp(0, n - 2);
        let u = t - i as f64;
        let p1 = self.values[i as usize];
        let p2 = self.values[(i + 1) as usize];
        let p0 = if i >= 1 { self.values[(i - 1) as usize] } else { sample(i - 1).unwrap_or(2.0 * p1 - p2) };
        let p3 = if i + 2 < n { self.values[(i + 2) as usize] } else { sample(i + 2).unwrap_or(2.0 * p2 - p1) };
        Some(catmull_rom(p0, p1, p2, p3, u))
    }
}

fn catmull_rom(p0: f64, p1: f64, p2: f64, p3: f64, u: f64) -> f64 {
    let a = -0.5 * p0 + 1.5 * p1 - 1.5 * p2 + 0.5 * p3;
    let b = p0 - 2.5 * p1 + 2.0 * p2 - 0.5 * p3;
    let c = -0.5 * p0 + 0.5 * p2;
    ((a * u + b) * u + c) * u + p1
}

/// Even autocovariance sampled at `τ = 0, Δτ, 2Δτ, …`; zero beyond the last sample.
#[derive(Clone, Debug, PartialEq)]
pub struct TabulatedCov {
    table: UniformTable,
}

impl TabulatedCov {
    pub fn new(step: f64, values: Vec<f64>) -> Result<Self> {
        if values.len() < 4 {
            return Err(Error::InvalidParam("a tabulated covariance needs at least 4 samples".into()));
        }
        Ok(Self {
            table: UniformTable::new(0.0, step, values)?,
        })
    }

    /// Parses `tau,gamma_n` rows. A non-numeric first row is a header.
    /// Negative lags are dropped (the covariance is even).
    pub fn from_csv_reader<R: std::io::Read>(rdr: R) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .comment(Some(b'#'))
            .from_reader(rdr);
        let mut pts = Vec::new();
        for (i, rec) in reader.records().enumerate() {
            let rec = rec?;
            if rec.len() < 2 {
                return Err(Error::Parse(format!("row {}: expected two columns", i + 1)));
            }
            let parsed = (rec[0].parse::<f64>(), rec[1].parse::<f64>());
            match parsed {
                (Ok(t), Ok(g)) => pts.push((t, g)),
                _ if i == 0 => continue,
                _ => return Err(Error::Parse(format!("row {}: not numeric", i + 1))),
            }
        }
        pts.retain(|p| p.0 >= -1e-12);
        pts.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        if pts.len() < 4 {
            return Err(Error::Parse("need at least 4 rows with tau ≥ 0".into()));
        }
        if pts[0].0.abs() > 1e-12 {
            return Err(Error::Parse("the table must start at tau = 0".into()));
        }
        let step = pts[1].0 - pts[0].0;
        for (k, p) in pts.iter().enumerate() {
            if (p.0 - k as f64 * step).abs() > 1e-9 * step.max(1.0) * (k as f64 + 1.0) {
                return Err(Error::Parse(format!("tau spacing is not uniform near tau = {}", p.0)));
            }
        }
        Self::new(step, pts.into_iter().map(|p| p.1).collect())
    }

    pub fn from_csv_path(path: &Path) -> Result<Self> {
        Self::from_csv_reader(std::fs::File::open(path)?)
    }

    pub fn step(&self) -> f64 {
        self.table.step
    }

    pub fn values(&self) -> &[f64] {
        &self.table.values
    }

    /// Largest tabulated lag.
    pub fn range(&self) -> f64 {
        self.table.end()
    }

    pub fn eval(&self, tau: f64) -> f64 {
        let v = &self.table.values;
        let n = v.len() as i64;
        self.table
            .eval_with(tau.abs(), |i| {
                if i < 0 {
                    v.get((-i) as usize).copied()
                } else if i >= n {
                    Some(0.0)
                } else {
                    None
                }
            })
            .unwrap_or(0.0)
    }
}

/// Stationary noise description.
#[derive(Clone, Debug, PartialEq)]
pub enum NoiseModel {
    White { sigma2: f64 },
    /// `Γ_n(τ) = A e^{−α|τ|}`.
    Exponential { amplitude: f64, alpha: f64 },
    Tabulated(TabulatedCov),
}

impl NoiseModel {
    pub fn white(sigma2: f64) -> Self {
        NoiseModel::White { sigma2 }
    }

    pub fn exponential(amplitude: f64, alpha: f64) -> Self {
        NoiseModel::Exponential { amplitude, alpha }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            NoiseModel::White { sigma2 } if !(*sigma2 > 0.0 && sigma2.is_finite()) => {
                Err(Error::InvalidParam("sigma2 must be positive".into()))
            }
            NoiseModel::Exponential { amplitude, alpha }
                if !(*amplitude > 0.0 && *alpha > 0.0 && amplitude.is_finite() && alpha.is_finite()) =>
            {
                Err(Error::InvalidParam("A and alpha must be positive".into()))
            }
            NoiseModel::Tabulated(t) => {
                let v = t.values();
                if !(v[0] > 0.0) {
                    return Err(Error::InvalidParam("tabulated covariance needs Γ_n(0) > 0".into()));
                }
                if let Some(x) = v.iter().find(|x| !x.is_finite() || x.abs() > v[0] * (1.0 + 1e-12)) {
                    return Err(Error::InvalidParam(format!(
                        "tabulated covariance violates |Γ_n(τ)| ≤ Γ_n(0) (value {x})"
                    )));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// `Γ_n(τ)`. For white noise this is the intensity `σ²` at `τ = 0` and
    /// zero elsewhere (the Dirac mass is handled by the callers).
    pub fn autocov(&self, tau: f64) -> f64 {
        match self {
            NoiseModel::White { sigma2 } => {
                if tau == 0.0 {
                    *sigma2
                } else {
                    0.0
                }
            }
            NoiseModel::Exponential { amplitude, alpha } => amplitude * (-alpha * tau.abs()).exp(),
            NoiseModel::Tabulated(t) => t.eval(tau),
        }
    }

    /// `Γ_n(0)`; `σ²` for white noise.
    pub fn variance(&self) -> f64 {
        self.autocov(0.0)
    }

    pub fn is_white(&self) -> bool {
        matches!(self, NoiseModel::White { .. })
    }

    /// Half width of the integration window for the covariance integrals.
    pub fn reach(&self) -> f64 {
        match self {
            NoiseModel::White { .. } => 0.0,
            NoiseModel::Exponential { alpha, .. } => 1e12f64.ln() / alpha,
            NoiseModel::Tabulated(t) => t.range(),
        }
    }

    /// `Γ̂_n(0) = ∫ Γ_n`.
    pub fn spectral_density_at_zero(&self) -> Result<f64> {
        match self {
            NoiseModel::White { sigma2 } => Ok(*sigma2),
            NoiseModel::Exponential { amplitude, alpha } => Ok(2.0 * amplitude / alpha),
            NoiseModel::Tabulated(t) => {
                let v = t.values();
                let edge = *v.last().unwrap();
                if edge.abs() > 1e-6 * v[0] {
                    return Err(Error::NotIntegrable(format!(
                        "Γ_n at the last lag is {edge:.3e}, above 1e-6·Γ_n(0)"
                    )));
                }
                let n = v.len();
                let inner: f64 = v[1..n - 1].iter().sum();
                Ok(t.step() * (v[0] + 2.0 * inner + edge))
            }
        }
    }
}

impl fmt::Display for NoiseModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NoiseModel::White { sigma2 } => write!(f, "white(sigma2={sigma2})"),
            NoiseModel::Exponential { amplitude, alpha } => write!(f, "exponential(A={amplitude},alpha={alpha})"),
            NoiseModel::Tabulated(t) => write!(f, "tabulated(step={},n={})", t.step(), t.values().len()),
        }
    }
}

/// Which pair of coefficient sequences is correlated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CovKind {
    PrimalPrimal,
    DualDual,
    PrimalDual,
}

impl CovKind {
    pub fn as_str(self) -> &'static str {
        match self {
            CovKind::PrimalPrimal => "primal_primal",
            CovKind::DualDual => "dual_dual",
            CovKind::PrimalDual => "primal_dual",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "primal_primal" | "pp" => Ok(CovKind::PrimalPrimal),
            "dual_dual" | "dd" => Ok(CovKind::DualDual),
            "primal_dual" | "pd" => Ok(CovKind::PrimalDual),
            _ => Err(Error::InvalidParam(format!("unknown covariance kind '{s}'"))),
        }
    }
}

impl fmt::Display for CovKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Band pair and kind described by a provider.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ProviderInfo {
    pub bands: usize,
    pub m: usize,
    pub mprime: usize,
    pub kind: CovKind,
}

/// Source of the deterministic correlation `γ(τ)` at real arguments.
pub trait CorrelationProvider: Sync {
    fn info(&self) -> ProviderInfo;
    fn gamma(&self, tau: f64) -> Result<f64>;
}

/// Correlations computed from a wavelet family.
pub struct FamilyProvider<'a> {
    family: &'a WaveletFamily,
    m: usize,
    mprime: usize,
    d: i64,
    kind: CovKind,
    method: Method,
}

impl<'a> FamilyProvider<'a> {
    pub fn new(family: &'a WaveletFamily, m: usize, mprime: usize, d: i64, kind: CovKind) -> Result<Self> {
        family.check_band(m)?;
        family.check_band(mprime)?;
        Ok(Self {
            family,
            m,
            mprime,
            d,
            kind,
            method: Method::Auto,
        })
    }

    /// Selects the method used for primal/dual correlations.
    pub fn with_method(mut self, method: Method) -> Self {
        self.method = method;
        self
    }

    pub fn family(&self) -> &WaveletFamily {
        self.family
    }
}

impl CorrelationProvider for FamilyProvider<'_> {
    fn info(&self) -> ProviderInfo {
        ProviderInfo {
            bands: self.family.bands(),
            m: self.m,
            mprime: self.mprime,
            kind: self.kind,
        }
    }

    fn gamma(&self, tau: f64) -> Result<f64> {
        match self.kind {
            CovKind::PrimalDual => Ok(xcorr::gamma(self.family, self.m, self.mprime, tau, self.d, self.method)?.0.value),
            CovKind::PrimalPrimal | CovKind::DualDual => {
                // both bases are orthonormal
                if tau == tau.round() {
                    let one = self.m == self.mprime && tau == 0.0;
                    return Ok(if one { 1.0 } else { 0.0 });
                }
                let dual = self.kind == CovKind::DualDual;
                Ok(autocorr_quad(self.family, self.m, self.mprime, tau, dual, self.d)?.value)
            }
        }
    }
}

/// Correlations read from a precomputed sequence; cubic interpolation between
/// uniform samples, [`Error::GammaDomainExceeded`] outside them.
pub struct SequenceProvider {
    info: ProviderInfo,
    lags: Vec<f64>,
    values: Vec<f64>,
    table: Option<UniformTable>,
}

impl SequenceProvider {
    pub fn new(seq: &CorrelationSequence) -> Self {
        Self::from_samples(
            ProviderInfo {
                bands: seq.bands,
                m: seq.m,
                mprime: seq.mprime,
                kind: CovKind::PrimalDual,
            },
            seq.lags.clone(),
            seq.values.clone(),
        )
    }

    pub fn from_samples(info: ProviderInfo, lags: Vec<f64>, values: Vec<f64>) -> Self {
        let mut idx: Vec<usize> = (0..lags.len()).collect();
        idx.sort_by(|&a, &b| lags[a].partial_cmp(&lags[b]).unwrap());
        let lags: Vec<f64> = idx.iter().map(|&i| lags[i]).collect();
        let values: Vec<f64> = idx.iter().map(|&i| values[i]).collect();
        let table = if lags.len() >= 4 {
            let h = lags[1] - lags[0];
            let uniform = h > 0.0
                && lags
                    .windows(2)
                    .all(|w| ((w[1] - w[0]) - h).abs() <= 1e-9 * h.max(1.0));
            if uniform {
                UniformTable::new(lags[0], h, values.clone()).ok()
            } else {
                None
            }
        } else {
            None
        };
        Self { info, lags, values, table }
    }
}

impl CorrelationProvider for SequenceProvider {
    fn info(&self) -> ProviderInfo {
        self.info
    }

    fn gamma(&self, tau: f64) -> Result<f64> {
        if let Some(i) = self.lags.iter().position(|l| (l - tau).abs() < 1e-9) {
            return Ok(self.values[i]);
        }
        self.table
            .as_ref()
            .and_then(|t| t.eval(tau))
            .ok_or(Error::GammaDomainExceeded(tau))
    }
}

/// `Γ[ℓ]` on an integer lag grid.
#[derive(Clone, Debug, PartialEq)]
pub struct CovSequence1D {
    pub j: i32,
    pub m: usize,
    pub mprime: usize,
    pub kind: CovKind,
    pub lags: Vec<i64>,
    pub values: Vec<f64>,
    pub abs_err: Vec<f64>,
}

impl CovSequence1D {
    pub fn at(&self, l: i64) -> Option<f64> {
        self.lags.iter().position(|&x| x == l).map(|i| self.values[i])
    }
}

/// Absolute error target of the colored-noise integrals, relative to `Γ_n(0)`.
pub const COLORED_TOL: f64 = 1e-7;

fn scale(bands: usize, j: i32) -> f64 {
    (bands as f64).powi(j)
}

/// `∫ Γ_n(x) γ(x/M^j − ℓ) dx` for a colored model.
fn colored_integral(noise: &NoiseModel, gamma: &dyn CorrelationProvider, s: f64, l: i64) -> Result<(f64, f64)> {
    let reach = noise.reach();
    let g0 = noise.variance();
    // γ may have kinks at half-integers; Γ_n at 0
    let mut knots = vec![-reach, 0.0, reach];
    let h = 0.5 * s;
    let kmin = ((-reach / s + l as f64) * 2.0).ceil() as i64;
    let kmax = ((reach / s + l as f64) * 2.0).floor() as i64;
    if kmax - kmin < 4096 {
        for k in kmin..=kmax {
            let x = (k as f64 * 0.5 - l as f64) * s;
            if x > -reach && x < reach {
                knots.push(x);
            }
        }
    }
    knots.sort_by(|a, b| a.partial_cmp(b).unwrap());
    knots.dedup_by(|a, b| (*a - *b).abs() < 1e-12 * s.max(1.0));
    let pts = refine_points(&knots, h.min(reach / 8.0));
    let err = std::cell::Cell::new(None);
    let f = |x: f64| {
        let gx = noise.autocov(x);
        if gx == 0.0 {
            return 0.0;
        }
        match gamma.gamma(x / s - l as f64) {
            Ok(v) => gx * v,
            Err(e) => {
                let first = err.take();
                err.set(Some(first.unwrap_or(e)));
                0.0
            }
        }
    };
    let opts = QuadOptions {
        abs_tol: 0.1 * COLORED_TOL * g0,
        rel_tol: 1e-10,
        max_subdivisions: 2000,
        fail_above: COLORED_TOL * g0,
    };
    let r = integrate_points(&f, &pts, opts)?;
    if let Some(e) = err.into_inner() {
        return Err(e);
    }
    Ok((r.value, r.abs_err))
}

/// Covariance sequence of level `j` for the band pair and kind of `gamma`.
pub fn cov_1d(noise: &NoiseModel, gamma: &dyn CorrelationProvider, j: i32, lags: &[i64]) -> Result<CovSequence1D> {
    noise.validate()?;
    let info = gamma.info();
    let s = scale(info.bands, j);
    let results: Vec<Result<(f64, f64)>> = lags
        .par_iter()
        .map(|&l| match noise {
            NoiseModel::White { sigma2 } => Ok((sigma2 * gamma.gamma(-(l as f64))?, 0.0)),
            _ => colored_integral(noise, gamma, s, l),
        })
        .collect();
    let mut values = Vec::with_capacity(lags.len());
    let mut abs_err = Vec::with_capacity(lags.len());
    for r in results {
        let (v, e) = r?;
        values.push(v);
        abs_err.push(e);
    }
    Ok(CovSequence1D {
        j,
        m: info.m,
        mprime: info.mprime,
        kind: info.kind,
        lags: lags.to_vec(),
        values,
        abs_err,
    })
}

/// White-noise limit `Γ̂_n(0)·γ(−ℓ)` reached at coarse resolution.
pub fn coarse_limit(noise: &NoiseModel, gamma: &dyn CorrelationProvider, l: i64) -> Result<f64> {
    if noise.is_white() {
        return Err(Error::InvalidParam(
            "white noise is its own coarse limit; use cov_1d".into(),
        ));
    }
    noise.validate()?;
    Ok(noise.spectral_density_at_zero()? * gamma.gamma(-(l as f64))?)
}

/// Separable two-dimensional noise.
#[derive(Clone, Debug, PartialEq)]
pub enum NoiseModel2D {
    White { sigma2: f64 },
    /// `Γ_n(x₁, x₂) = Γ₁(x₁) Γ₂(x₂)`.
    Separable(NoiseModel, NoiseModel),
}

impl NoiseModel2D {
    /// Factors a tabulated field `values[i₁][i₂] = Γ_n(i₁Δ, i₂Δ)`; fails with
    /// [`Error::NotSeparable`] unless it has rank one.
    pub fn from_table(step: f64, values: &[Vec<f64>]) -> Result<Self> {
        let n1 = values.len();
        let n2 = values.first().map_or(0, |r| r.len());
        if n1 < 4 || n2 < 4 || values.iter().any(|r| r.len() != n2) {
            return Err(Error::InvalidParam("2D table must be rectangular with at least 4×4 samples".into()));
        }
        let v00 = values[0][0];
        if !(v00 > 0.0) {
            return Err(Error::InvalidParam("2D table needs Γ_n(0,0) > 0".into()));
        }
        if values.iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::InvalidParam("non-finite table entry".into()));
        }
        for i in 0..n1 {
            for k in 0..n2 {
                if (values[i][k] * v00 - values[i][0] * values[0][k]).abs() > 1e-10 * v00 * v00 {
                    return Err(Error::NotSeparable);
                }
            }
        }
        let r = v00.sqrt();
        let a: Vec<f64> = values.iter().map(|row| row[0] / r).collect();
        let b: Vec<f64> = values[0].iter().map(|x| x / r).collect();
        Ok(NoiseModel2D::Separable(
            NoiseModel::Tabulated(TabulatedCov::new(step, a)?),
            NoiseModel::Tabulated(TabulatedCov::new(step, b)?),
        ))
    }
}

/// `Γ[ℓ₁, ℓ₂]` on a rectangular lag grid, row-major in `ℓ₁`.
#[derive(Clone, Debug, PartialEq)]
pub struct CovField2D {
    pub j: i32,
    pub m: (usize, usize),
    pub mprime: (usize, usize),
    pub kind: CovKind,
    pub lags1: Vec<i64>,
    pub lags2: Vec<i64>,
    pub values: Vec<f64>,
    /// Set on fields produced by [`post_transform_cov`].
    pub post_transform: bool,
}

impl CovField2D {
    pub fn at(&self, l1: i64, l2: i64) -> Option<f64> {
        let i = self.lags1.iter().position(|&x| x == l1)?;
        let k = self.lags2.iter().position(|&x| x == l2)?;
        Some(self.values[i * self.lags2.len() + k])
    }

    pub fn get(&self, i: usize, k: usize) -> f64 {
        self.values[i * self.lags2.len() + k]
    }

    fn outer(j: i32, kind: CovKind, a: &CovSequence1D, b: &CovSequence1D) -> Self {
        let mut values = Vec::with_capacity(a.values.len() * b.values.len());
        for x in &a.values {
            for y in &b.values {
                values.push(x * y);
            }
        }
        Self {
            j,
            m: (a.m, b.m),
            mprime: (a.mprime, b.mprime),
            kind,
            lags1: a.lags.clone(),
            lags2: b.lags.clone(),
            values,
            post_transform: false,
        }
    }
}

/// Separable covariance field: the outer product of two 1D sequences.
pub fn cov_2d(
    noise: &NoiseModel2D,
    gamma1: &dyn CorrelationProvider,
    gamma2: &dyn CorrelationProvider,
    j: i32,
    lags1: &[i64],
    lags2: &[i64],
) -> Result<CovField2D> {
    let (i1, i2) = (gamma1.info(), gamma2.info());
    if i1.kind != i2.kind {
        return Err(Error::InvalidParam("both factors must have the same kind".into()));
    }
    let (n1, n2) = match noise {
        NoiseModel2D::White { sigma2 } => (NoiseModel::white(*sigma2), NoiseModel::white(1.0)),
        NoiseModel2D::Separable(a, b) => (a.clone(), b.clone()),
    };
    let a = cov_1d(&n1, gamma1, j, lags1)?;
    let b = cov_1d(&n2, gamma2, j, lags2)?;
    Ok(CovField2D::outer(j, i1.kind, &a, &b))
}

/// Covariances after `w = (n + n^H)/√2`, `w^H = (n − n^H)/√2`.
#[derive(Clone, Debug, PartialEq)]
pub struct PostTransformPair {
    pub ww: CovField2D,
    pub whwh: CovField2D,
    /// `Γ_{w, w^H}`, zero by construction.
    pub wwh: CovField2D,
}

/// Post-transform covariances from `Γ_{n,n}` and `Γ_{n,n^H}` of a detail subband.
pub fn post_transform_cov(nn: &CovField2D, nnh: &CovField2D) -> Result<PostTransformPair> {
    for f in [nn, nnh] {
        if f.m.0 == 0 || f.m.1 == 0 || f.m != f.mprime {
            return Err(Error::InvalidSubband(format!(
                "post-transform needs m = m' with both components nonzero, got m = {:?}, m' = {:?}",
                f.m, f.mprime
            )));
        }
    }
    if nn.m != nnh.m || nn.lags1 != nnh.lags1 || nn.lags2 != nnh.lags2 || nn.j != nnh.j {
        return Err(Error::InvalidParam("fields must share subband, level and lag grid".into()));
    }
    if nnh.kind != CovKind::PrimalDual || nn.kind == CovKind::PrimalDual {
        return Err(Error::InvalidParam(
            "expected an auto-covariance field and a primal/dual field".into(),
        ));
    }
    let make = |values: Vec<f64>| CovField2D {
        values,
        post_transform: true,
        kind: nn.kind,
        ..nn.clone()
    };
    let plus = nn.values.iter().zip(&nnh.values).map(|(a, b)| a + b).collect();
    let minus = nn.values.iter().zip(&nnh.values).map(|(a, b)| a - b).collect();
    let wwh = CovField2D {
        kind: CovKind::PrimalDual,
        ..make(vec![0.0; nn.values.len()])
    };
    Ok(PostTransformPair {
        ww: make(plus),
        whwh: make(minus),
        wwh,
    })
}

/// Empirical decay check against `C/(1+|ℓ|^{2N+1})`.
#[derive(Clone, Debug, PartialEq)]
pub struct DecayReport {
    pub order: u32,
    /// `sup |Γ[ℓ]| (1 + |ℓ|^{2N+1})` over the supplied lags.
    pub sup: f64,
    /// Log-log slope of the weighted values over `8 ≤ |ℓ| ≤ 63` (0 if undefined).
    pub trend: f64,
    pub passes: bool,
}

/// Slope above which the weighted sequence is considered growing.
pub const DECAY_TREND_LIMIT: f64 = 0.25;

fn weight(l: i64, order: u32) -> f64 {
    1.0 + (l.unsigned_abs() as f64).powi(2 * order as i32 + 1)
}

fn trend_of(points: &[(f64, f64)]) -> f64 {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|(l, w)| *l >= 8.0 && *l <= 63.0 && *w > 0.0)
        .map(|(l, w)| (l.ln(), w.ln()))
        .collect();
    if pts.len() < 2 {
        return 0.0;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx > 0.0 {
        sxy / sxx
    } else {
        0.0
    }
}

fn decay_1d(lags: &[i64], values: &[f64], order: u32) -> DecayReport {
    let weighted: Vec<(f64, f64)> = lags
        .iter()
        .zip(values)
        .map(|(&l, v)| (l.unsigned_abs() as f64, v.abs() * weight(l, order)))
        .collect();
    let sup = weighted.iter().map(|p| p.1).fold(0.0, f64::max);
    let trend = trend_of(&weighted);
    DecayReport {
        order,
        sup,
        trend,
        passes: sup.is_finite() && trend <= DECAY_TREND_LIMIT,
    }
}

/// Decay check of a 1D sequence with `N_m = order`.
pub fn verify_cov_decay(seq: &CovSequence1D, order: u32) -> DecayReport {
    decay_1d(&seq.lags, &seq.values, order)
}

/// Decay check of a 2D field with the product weight; the trend is taken
/// along the row and column through the largest entry.
pub fn verify_cov_decay_2d(field: &CovField2D, orders: (u32, u32)) -> DecayReport {
    let n2 = field.lags2.len();
    let mut sup: f64 = 0.0;
    let mut arg = (0, 0);
    let mut best = -1.0;
    for (i, &l1) in field.lags1.iter().enumerate() {
        for (k, &l2) in field.lags2.iter().enumerate() {
            let v = field.values[i * n2 + k].abs();
            sup = sup.max(v * weight(l1, orders.0) * weight(l2, orders.1));
            if v > best {
                best = v;
                arg = (i, k);
            }
        }
    }
    let row: Vec<f64> = (0..n2).map(|k| field.get(arg.0, k)).collect();
    let col: Vec<f64> = (0..field.lags1.len()).map(|i| field.get(i, arg.1)).collect();
    let a = decay_1d(&field.lags2, &row, orders.1);
    let b = decay_1d(&field.lags1, &col, orders.0);
    let trend = a.trend.max(b.trend);
    DecayReport {
        order: orders.0.max(orders.1),
        sup,
        trend,
        passes: sup.is_finite() && trend <= DECAY_TREND_LIMIT,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectra::{Taper, WaveletFamily};
    use std::f64::consts::PI;

    fn pd<'a>(f: &'a WaveletFamily, m: usize) -> FamilyProvider<'a> {
        FamilyProvider::new(f, m, m, 0, CovKind::PrimalDual).unwrap()
    }

    #[test]
    fn white_noise_is_sigma2_gamma_at_minus_l() {
        let f = WaveletFamily::shannon(2).unwrap();
        let s = cov_1d(&NoiseModel::white(2.0), &pd(&f, 1), 1, &[-1, 0, 1, 3]).unwrap();
        assert!((s.values[0] - 4.0 / PI).abs() < 1e-14);
        assert_eq!(s.values[1], 0.0);
        assert!((s.values[2] + 4.0 / PI).abs() < 1e-14);
        assert!((s.values[3] + 4.0 / (3.0 * PI)).abs() < 1e-14);
    }

    #[test]
    fn white_noise_primal_primal_is_kronecker() {
        let f = WaveletFamily::haar();
        for kind in [CovKind::PrimalPrimal, CovKind::DualDual] {
            let p = FamilyProvider::new(&f, 1, 1, 0, kind).unwrap();
            let s = cov_1d(&NoiseModel::white(1.5), &p, 3, &[-2, -1, 0, 1, 2]).unwrap();
            assert_eq!(s.values, vec![0.0, 0.0, 1.5, 0.0, 0.0]);
        }
    }

    #[test]
    fn spectral_density_at_zero() {
        assert_eq!(NoiseModel::exponential(1.0, 2.0).spectral_density_at_zero().unwrap(), 1.0);
        let h = 0.01;
        let v: Vec<f64> = (0..4000).map(|k| (-(k as f64 * h)).exp()).collect();
        let t = NoiseModel::Tabulated(TabulatedCov::new(h, v).unwrap());
        assert!((t.spectral_density_at_zero().unwrap() - 2.0).abs() < 1e-4);
        let v: Vec<f64> = (0..40).map(|k| (-(k as f64 * 0.1)).exp()).collect();
        let t = NoiseModel::Tabulated(TabulatedCov::new(0.1, v).unwrap());
        assert!(matches!(t.spectral_density_at_zero(), Err(Error::NotIntegrable(_))));
    }

    #[test]
    fn tabulated_interpolation_is_even_and_cubic() {
        let h = 0.05;
        let v: Vec<f64> = (0..200).map(|k| (-(k as f64 * h).powi(2)).exp()).collect();
        let t = TabulatedCov::new(h, v).unwrap();
        for x in [0.0, 0.013, 0.5, 1.234, 3.3] {
            let exact = (-(x * x) as f64).exp();
            assert!((t.eval(x) - exact).abs() < 2e-5, "{x}");
            assert_eq!(t.eval(x), t.eval(-x));
        }
        assert_eq!(t.eval(20.0), 0.0);
    }

    #[test]
    fn tabulated_csv_parsing() {
        let text = "tau,gamma\n0,1\n0.5,0.5\n1,0.25\n1.5,0.125\n";
        let t = TabulatedCov::from_csv_reader(text.as_bytes()).unwrap();
        assert_eq!(t.step(), 0.5);
        assert_eq!(t.values().len(), 4);
        let bad = "0,1\n0.5,0.5\n1.2,0.25\n1.5,0.125\n";
        assert!(TabulatedCov::from_csv_reader(bad.as_bytes()).is_err());
        let bad = "0,1\n0.5,x\n1,0.25\n1.5,0.125\n";
        assert!(matches!(TabulatedCov::from_csv_reader(bad.as_bytes()), Err(Error::Parse(_))));
    }

    #[test]
    fn validation() {
        assert!(NoiseModel::white(0.0).validate().is_err());
        assert!(NoiseModel::exponential(1.0, -1.0).validate().is_err());
        let t = TabulatedCov::new(1.0, vec![1.0, 1.5, 0.2, 0.0]).unwrap();
        assert!(NoiseModel::Tabulated(t).validate().is_err());
    }

    // Frequency-domain oracle for Shannon m=1, M=2. With Ĝ = ψ̂ conj(ψ̂^H) = i·sign(ω) on
    // π ≤ |ω| ≤ 2π: Γ[ℓ] = (1/2π) ∫ Ĝ(ω) Γ̂_n(ω/M^j) e^{−iωℓ} dω = (1/π) ∫_π^{2π} Γ̂_n(ω/M^j) sin(ωℓ) dω.
    fn shannon_oracle(alpha: f64, j: i32, l: i64) -> f64 {
        let s = 2f64.powi(j);
        let spec = |w: f64| 2.0 * alpha / (alpha * alpha + (w / s).powi(2));
        let f = |w: f64| spec(w) * (w * l as f64).sin() / PI;
        crate::quad::integrate_uniform(&f, PI, 2.0 * PI, 0.1, QuadOptions::default())
            .unwrap()
            .value
    }

    #[test]
    fn exponential_matches_frequency_oracle() {
        let f = WaveletFamily::shannon(2).unwrap();
        let noise = NoiseModel::exponential(1.0, 1.0);
        for j in [1, 3] {
            let s = cov_1d(&noise, &pd(&f, 1), j, &[-2, -1, 0, 1, 2]).unwrap();
            for (l, v) in s.lags.iter().zip(&s.values) {
                let o = shannon_oracle(1.0, j, *l);
                assert!((v - o).abs() < 2e-6, "j={j} l={l}: {v} vs {o}");
            }
        }
    }

    #[test]
    fn coarse_limit_is_approached() {
        let f = WaveletFamily::shannon(2).unwrap();
        let noise = NoiseModel::exponential(1.0, 1.0);
        let p = pd(&f, 1);
        let lim = coarse_limit(&noise, &p, 1).unwrap();
        assert!((lim + 4.0 / PI).abs() < 1e-14);
        let s = cov_1d(&noise, &p, 6, &[1]).unwrap();
        assert!(((s.values[0] - lim) / lim).abs() < 0.05);
        assert!(coarse_limit(&NoiseModel::white(1.0), &p, 1).is_err());
    }

    #[test]
    fn primal_primal_equals_dual_dual_for_colored_noise() {
        let f = WaveletFamily::meyer(2, 1.0 / 3.0).unwrap();
        let noise = NoiseModel::exponential(1.0, 1.5);
        for m in [0usize, 1] {
            let pp = FamilyProvider::new(&f, m, m, 0, CovKind::PrimalPrimal).unwrap();
            let dd = FamilyProvider::new(&f, m, m, 0, CovKind::DualDual).unwrap();
            let a = cov_1d(&noise, &pp, 1, &[0, 1, 2]).unwrap();
            let b = cov_1d(&noise, &dd, 1, &[0, 1, 2]).unwrap();
            for (x, y) in a.values.iter().zip(&b.values) {
                assert!((x - y).abs() < 1e-7, "m={m}: {x} vs {y}");
            }
            assert!(a.values[0] > 0.0);
        }
    }

    #[test]
    fn sequence_provider_interpolates_and_bounds() {
        let f = WaveletFamily::meyer_with(2, 1.0 / 3.0, Taper::Standard, None).unwrap();
        let lags: Vec<f64> = (-100..=100).map(|k| k as f64 / 20.0).collect();
        let seq = xcorr::correlation_sequence(&f, 1, 1, 0, &lags, Method::Auto).unwrap();
        let p = SequenceProvider::new(&seq);
        let exact = xcorr::meyer_gamma(2, 1.0 / 3.0, Taper::Standard, 1, 0.337, 0).unwrap();
        assert!((p.gamma(0.337).unwrap() - exact).abs() < 1e-4);
        assert!(matches!(p.gamma(5.5), Err(Error::GammaDomainExceeded(_))));
        let noise = NoiseModel::exponential(1.0, 1.0);
        assert!(matches!(cov_1d(&noise, &p, 1, &[1]), Err(Error::GammaDomainExceeded(_))));
    }

    #[test]
    fn separable_field_and_post_transform() {
        let f = WaveletFamily::shannon(2).unwrap();
        let p = pd(&f, 1);
        let pp = FamilyProvider::new(&f, 1, 1, 0, CovKind::PrimalPrimal).unwrap();
        let noise = NoiseModel2D::White { sigma2: 1.0 };
        let lags = [-1i64, 0, 1, 3];
        let nnh = cov_2d(&noise, &p, &p, 1, &lags, &lags).unwrap();
        let nn = cov_2d(&noise, &pp, &pp, 1, &lags, &lags).unwrap();
        assert_eq!(nn.at(0, 0), Some(1.0));
        let g1 = 2.0 / PI;
        assert!((nnh.at(1, 3).unwrap() - g1 * g1 / 3.0).abs() < 1e-14);
        let pt = post_transform_cov(&nn, &nnh).unwrap();
        assert!((pt.ww.at(1, 1).unwrap() - 4.0 / (PI * PI)).abs() < 1e-14);
        assert!(pt.wwh.values.iter().all(|&v| v == 0.0));
        assert_eq!(pt.whwh.at(0, 0), Some(1.0));

        let p0 = pd(&f, 0);
        let bad = cov_2d(&noise, &p0, &p, 1, &lags, &lags).unwrap();
        assert!(matches!(post_transform_cov(&bad, &bad), Err(Error::InvalidSubband(_))));
    }

    #[test]
    fn two_dimensional_tables() {
        let a: Vec<f64> = (0..6).map(|k| (-(k as f64)).exp()).collect();
        let b: Vec<f64> = (0..5).map(|k| 1.0 / (1.0 + k as f64)).collect();
        let t: Vec<Vec<f64>> = a.iter().map(|x| b.iter().map(|y| x * y).collect()).collect();
        assert!(matches!(NoiseModel2D::from_table(1.0, &t).unwrap(), NoiseModel2D::Separable(..)));
        let mut t2 = t.clone();
        t2[2][3] += 0.1;
        assert!(matches!(NoiseModel2D::from_table(1.0, &t2), Err(Error::NotSeparable)));
    }

    #[test]
    fn decay_reports() {
        let f = WaveletFamily::haar();
        let lags: Vec<i64> = (1..=64).collect();
        let s = cov_1d(&NoiseModel::white(1.0), &pd(&f, 1), 1, &lags).unwrap();
        let r = verify_cov_decay(&s, 1);
        assert!(r.passes && r.sup.is_finite(), "{r:?}");

        let zero = CovSequence1D { values: vec![0.0; 64], ..s.clone() };
        let r = verify_cov_decay(&zero, 1);
        assert_eq!(r.sup, 0.0);
        assert!(r.passes);

        let f = WaveletFamily::shannon(2).unwrap();
        let s = cov_1d(&NoiseModel::white(1.0), &pd(&f, 1), 1, &lags).unwrap();
        let r = verify_cov_decay(&s, 1);
        assert!(!r.passes && r.trend > 1.5, "{r:?}");
    }
}
