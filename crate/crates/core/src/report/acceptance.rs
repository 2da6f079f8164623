//! The numbered acceptance checks, shared by the test suite and `dtnoise verify`.

use super::{build_table, fraction_within, hadamard_asymptotics, white_theory_1d, TableId, TableRow};
use crate::covariance::{
    coarse_limit, cov_1d, cov_2d, post_transform_cov, CovKind, FamilyProvider, NoiseModel, NoiseModel2D,
};
use crate::error::Result;
use crate::simulate::{mc_run_1d, mc_run_2d, z_score, FieldKind, MCEstimate2D, SimConfig};
use crate::spectra::{LinearPhase, Taper, WaveletFamily};
use crate::xcorr::{gamma, Method};
use std::f64::consts::PI;
use std::fmt;
use std::time::{Duration, Instant};

pub const CRITERIA: usize = 9;

/// Outcome of one criterion.
#[derive(Clone, Debug)]
pub struct Criterion {
    pub number: usize,
    pub title: &'static str,
    pub passed: bool,
    pub detail: String,
    pub elapsed: Duration,
}

impl fmt::Display for Criterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} [{}] {}: {} ({:.1} s)",
            if self.passed { "PASS" } else { "FAIL" },
            self.number,
            self.title,
            self.detail,
            self.elapsed.as_secs_f64()
        )
    }
}

pub fn title(number: usize) -> &'static str {
    match number {
        1 => "dyadic theory table",
        2 => "Meyer M-band tables",
        3 => "Walsh-Hadamard packets",
        4 => "Haar packet asymptotics",
        5 => "Franklin decay limit",
        6 => "inter-band correlations",
        7 => "symmetry and oracle properties",
        8 => "Monte Carlo agreement",
        9 => "coarse-scale convergence",
        _ => "unknown",
    }
}

/// Runs criterion `number` (1..=9). Numerical errors count as failures.
pub fn run(number: usize) -> Criterion {
    let start = Instant::now();
    let outcome = match number {
        1 => dyadic(),
        2 => meyer_tables(),
        3 => hadamard(),
        4 => asymptotics(),
        5 => franklin_limit(),
        6 => interband(),
        7 => properties(),
        8 => monte_carlo(),
        9 => convergence(),
        _ => Ok((false, format!("no criterion {number}"))),
    };
    let (passed, detail) = outcome.unwrap_or_else(|e| (false, format!("error: {e}")));
    Criterion {
        number,
        title: title(number),
        passed,
        detail,
        elapsed: start.elapsed(),
    }
}

pub fn run_all() -> Vec<Criterion> {
    (1..=CRITERIA).map(run).collect()
}

type Outcome = Result<(bool, String)>;

fn worst<'a>(rows: impl Iterator<Item = &'a TableRow>, tol: impl Fn(&TableRow) -> f64) -> (usize, usize, f64) {
    let (mut n, mut ok, mut max) = (0, 0, 0.0f64);
    for r in rows {
        let d = r.delta().map(f64::abs).unwrap_or(f64::INFINITY);
        n += 1;
        if d <= tol(r) {
            ok += 1;
        }
        max = max.max(d);
    }
    (ok, n, max)
}

fn table_check(id: TableId, tol: impl Fn(&TableRow) -> f64, budget: f64, start: Instant) -> Outcome {
    let rows = build_table(id)?;
    let (ok, n, max) = worst(rows.iter(), tol);
    let secs = start.elapsed().as_secs_f64();
    Ok((ok == n && n > 0 && secs < budget, format!("{ok}/{n} within tolerance, max |delta| {max:.2e}, {secs:.1} s")))
}

fn dyadic() -> Outcome {
    table_check(
        TableId::DyadicTheory,
        |r| if r.family == "spline3" { 2e-4 } else { 5e-5 },
        30.0,
        Instant::now(),
    )
}

fn meyer_tables() -> Outcome {
    let start = Instant::now();
    let mut rows = build_table(TableId::MeyerFirst)?;
    rows.extend(build_table(TableId::MeyerLast)?);
    let (ok, n, max) = worst(rows.iter(), |_| 5e-5);
    let secs = start.elapsed().as_secs_f64();
    Ok((ok == n && n > 0 && secs < 60.0, format!("{ok}/{n} within 5e-5, max |delta| {max:.2e}, {secs:.1} s")))
}

fn hadamard() -> Outcome {
    let rows = build_table(TableId::Hadamard)?;
    let rec: Vec<&TableRow> = rows.iter().filter(|r| r.method == Method::PacketRecursion.as_str()).collect();
    let quad: Vec<&TableRow> = rows.iter().filter(|r| r.method == Method::Quadrature.as_str()).collect();
    let (ok, n, max) = worst(rec.iter().copied(), |_| 5e-5);
    let mut agree = 0;
    let mut max_q = 0.0f64;
    for (a, b) in rec.iter().zip(&quad) {
        let d = (a.computed - b.computed).abs();
        max_q = max_q.max(d);
        if a.m == b.m && a.lag == b.lag && d <= 1e-6 {
            agree += 1;
        }
    }
    Ok((
        ok == n && n > 0 && agree == n && quad.len() == n,
        format!("{ok}/{n} within 5e-5 (max {max:.2e}); {agree}/{n} match filter-bank quadrature (max {max_q:.2e})"),
    ))
}

fn asymptotics() -> Outcome {
    let targets = [(1usize, 3u32, 1.0 / 8.0), (3, 5, -3.0 / 128.0), (7, 7, 45.0 / 16384.0)];
    let mut pass = true;
    let mut parts = Vec::new();
    for (m, power, c) in targets {
        let (e, coeff) = hadamard_asymptotics(m, power)?;
        let ratio = coeff / c;
        pass &= (e - power as f64).abs() <= 0.3 && (ratio - 1.0).abs() <= 0.15;
        parts.push(format!("m={m}: exponent {e:.3}, ratio {ratio:.3}"));
    }
    Ok((pass, parts.join("; ")))
}

fn franklin_limit() -> Outcome {
    let fam = WaveletFamily::franklin();
    let tau = 64.0f64;
    let (g, _) = gamma(&fam, 1, 1, tau, 0, Method::Auto)?;
    let scaled = tau.powi(5) * g.value;
    let target = -1.0 / (32.0 * PI);
    let rel = (scaled / target - 1.0).abs();
    Ok((rel <= 0.10, format!("tau^5 gamma(64) = {scaled:.4e} vs {target:.4e} ({:.1}% off)", 100.0 * rel)))
}

fn interband() -> Outcome {
    let rows = build_table(TableId::Interband)?;
    let gated = |r: &&TableRow| r.family == "haar" || r.family.starts_with("spline");
    let (ok, n, max) = worst(rows.iter().filter(gated), |_| 2e-4);
    let zeros: Vec<&TableRow> = rows.iter().filter(|r| r.family == "shannon").collect();
    let exact = zeros.iter().filter(|r| r.computed == 0.0).count();
    Ok((
        ok == n && n > 0 && exact == zeros.len() && !zeros.is_empty(),
        format!("{ok}/{n} Haar/spline rows within 2e-4 (max {max:.2e}); {exact}/{} Shannon rows exactly 0", zeros.len()),
    ))
}

fn sample_taus() -> Vec<f64> {
    (0..=32).map(|i| -8.0 + 0.5 * i as f64 + 0.137).collect()
}

fn properties() -> Outcome {
    let mut failures = Vec::new();
    let mut checks = 0usize;
    let mut check = |name: String, err: f64, tol: f64| {
        checks += 1;
        if !(err <= tol) {
            failures.push(format!("{name} ({err:.1e})"));
        }
    };

    let closed = [
        WaveletFamily::shannon(2)?,
        WaveletFamily::meyer(2, 1.0 / 3.0)?,
        WaveletFamily::meyer(3, 0.25)?,
        WaveletFamily::haar(),
        WaveletFamily::franklin(),
    ];
    let quad = [WaveletFamily::battle_lemarie(3)?];
    let g = |f: &WaveletFamily, m: usize, mp: usize, t: f64, d: i64| -> Result<f64> {
        Ok(gamma(f, m, mp, t, d, Method::Auto)?.0.value)
    };

    for (fams, tol) in [(&closed[..], 1e-9), (&quad[..], 1e-6)] {
        for f in fams {
            let taus: Vec<f64> = if tol < 1e-6 { sample_taus() } else { vec![0.637, 1.5, 2.25, 3.9] };
            for &t in &taus {
                let a = g(f, 1, 1, t, 0)?;
                let b = g(f, 1, 1, -t, 0)?;
                check(format!("{} odd at {t}", f.label()), (a + b).abs(), tol);
                check(format!("{} bound at {t}", f.label()), (a.abs() - 1.0).max(0.0), 0.0);
                for d in [0i64, 1, -2] {
                    let a = g(f, 0, 0, t, d)?;
                    let b = g(f, 0, 0, -t - 2.0 * d as f64 - 1.0, d)?;
                    check(format!("{} scaling symmetry d={d} at {t}", f.label()), (a - b).abs(), tol);
                    check(format!("{} scaling bound", f.label()), (a.abs() - 1.0).max(0.0), 0.0);
                }
            }
        }
    }

    for bands in [3usize, 4] {
        let eps = 1.0 / (bands as f64 + 1.0);
        let f = WaveletFamily::meyer_with(bands, eps, Taper::Standard, Some(LinearPhase::half_sample(bands)))?;
        for t in [-1.3, 0.4, 2.0] {
            let a = g(&f, 1, 2, t, 0)?;
            let b = g(&f, 2, 1, -t, 0)?;
            check(format!("meyer M={bands} swap at {t}"), (a + b).abs(), 1e-6);
        }
    }

    for f in [&closed[0], &closed[1], &closed[3], &closed[4]] {
        for m in 0..2 {
            for l in -8..=8i64 {
                let c = gamma(f, m, m, l as f64, 0, Method::ClosedForm)?.0.value;
                let q = gamma(f, m, m, l as f64, 0, Method::Quadrature)?.0.value;
                check(format!("{} m={m} closed vs quadrature at {l}", f.label()), (c - q).abs(), 1e-6);
            }
        }
    }

    let f = &closed[2];
    let lags: Vec<i64> = (-3..=3).collect();
    let noise = NoiseModel2D::White { sigma2: 1.0 };
    let nn_p = FamilyProvider::new(f, 1, 1, 0, CovKind::PrimalPrimal)?;
    let nn_q = FamilyProvider::new(f, 2, 2, 0, CovKind::PrimalPrimal)?;
    let pd_p = FamilyProvider::new(f, 1, 1, 0, CovKind::PrimalDual)?;
    let pd_q = FamilyProvider::new(f, 2, 2, 0, CovKind::PrimalDual)?;
    let nn = cov_2d(&noise, &nn_p, &nn_q, 1, &lags, &lags)?;
    let nnh = cov_2d(&noise, &pd_p, &pd_q, 1, &lags, &lags)?;
    let pair = post_transform_cov(&nn, &nnh)?;
    let cross = pair.wwh.values.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    check("post-transform cross-covariance".into(), cross, 0.0);

    let (a, b) = (NoiseModel::exponential(1.0, 1.0), NoiseModel::exponential(2.0, 0.5));
    let s1 = cov_1d(&a, &pd_p, 2, &lags)?;
    let s2 = cov_1d(&b, &pd_q, 2, &lags)?;
    let field = cov_2d(&NoiseModel2D::Separable(a, b), &pd_p, &pd_q, 2, &lags, &lags)?;
    let mut sep = 0.0f64;
    for (i, x) in s1.values.iter().enumerate() {
        for (k, y) in s2.values.iter().enumerate() {
            sep = sep.max((field.get(i, k) - x * y).abs());
        }
    }
    check("2D separability".into(), sep, 0.0);

    let n = failures.len();
    let detail = if n == 0 {
        format!("{checks} checks hold")
    } else {
        format!("{n}/{checks} checks failed: {}", failures.into_iter().take(4).collect::<Vec<_>>().join(", "))
    };
    Ok((n == 0, detail))
}

/// Lags of the Monte Carlo comparison.
pub const MC_LAGS: [i64; 4] = [0, 1, 2, 3];

/// White-noise theory for a 2D estimate, including post-transformed sequences.
pub fn white_theory_2d(fam: &WaveletFamily, d: i64, sigma2: f64, e: &MCEstimate2D) -> Result<f64> {
    let g = |m: usize, l: i64| -> Result<f64> { Ok(gamma(fam, m, m, -(l as f64), d, Method::Auto)?.0.value) };
    let nnh = sigma2 * g(e.m.0, e.lag.0)? * g(e.m.1, e.lag.1)?;
    let nn = if e.lag == (0, 0) { sigma2 } else { 0.0 };
    Ok(match e.kind {
        FieldKind::PrimalDual => nnh,
        FieldKind::WW => nn + nnh,
        FieldKind::WhWh => nn - nnh,
        FieldKind::WWh => 0.0,
    })
}

fn monte_carlo() -> Outcome {
    let start = Instant::now();
    let mut parts = Vec::new();
    let mut pass = true;
    for fam in [WaveletFamily::shannon(2)?, WaveletFamily::meyer(2, 1.0 / 3.0)?] {
        let config = SimConfig::new(fam.clone(), 3, 1 << 14);
        let est = mc_run_1d(&config, &NoiseModel::white(1.0), &MC_LAGS)?;
        let mut zs = Vec::new();
        for e in est.iter().filter(|e| e.kind == CovKind::PrimalDual && e.m == e.mprime) {
            zs.push(z_score(e.mean, e.stderr, white_theory_1d(&fam, 0, 1.0, e)?));
        }
        let frac = fraction_within(zs.iter().copied());
        pass &= frac >= 0.95;
        parts.push(format!("{} 1D {:.1}% of {} cells", fam.label(), 100.0 * frac, zs.len()));
    }

    let fam = WaveletFamily::meyer(3, 0.25)?;
    let mut config = SimConfig::new(fam.clone(), 2, 252);
    config.oversample = 8;
    let lags: Vec<(i64, i64)> = (0..4).flat_map(|a| (0..4).map(move |b| (a, b))).collect();
    let est = mc_run_2d(&config, &NoiseModel2D::White { sigma2: 1.0 }, &lags, true)?;
    let mut zs = Vec::new();
    for e in &est {
        zs.push(z_score(e.mean, e.stderr, white_theory_2d(&fam, 0, 1.0, e)?));
    }
    let frac = fraction_within(zs.iter().copied());
    pass &= frac >= 0.90;
    parts.push(format!("meyer M=3 2D {:.1}% of {} cells", 100.0 * frac, zs.len()));

    let secs = start.elapsed().as_secs_f64();
    pass &= secs < 600.0;
    Ok((pass, format!("{}, {secs:.0} s", parts.join("; "))))
}

/// Levels of the coarse-scale convergence check.
pub const CONVERGENCE_LEVELS: [i32; 3] = [2, 4, 6];

/// Relative maximum deviation from the coarse-scale limit at each level.
pub fn convergence_errors() -> Result<Vec<f64>> {
    let fam = WaveletFamily::meyer(2, 1.0 / 3.0)?;
    let noise = NoiseModel::exponential(1.0, 1.0);
    let p = FamilyProvider::new(&fam, 1, 1, 0, CovKind::PrimalDual)?;
    let lags: Vec<i64> = (-8..=8).collect();
    let limit = lags.iter().map(|&l| coarse_limit(&noise, &p, l)).collect::<Result<Vec<_>>>()?;
    let scale = limit.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    CONVERGENCE_LEVELS
        .iter()
        .map(|&j| {
            let s = cov_1d(&noise, &p, j, &lags)?;
            Ok(s.values.iter().zip(&limit).fold(0.0f64, |a, (v, l)| a.max((v - l).abs())) / scale)
        })
        .collect()
}

fn convergence() -> Outcome {
    let errs = convergence_errors()?;
    let monotone = errs.windows(2).all(|w| w[1] < w[0]);
    let last = *errs.last().unwrap();
    let list: Vec<String> = CONVERGENCE_LEVELS
        .iter()
        .zip(&errs)
        .map(|(j, e)| format!("j={j}: {:.2}%", 100.0 * e))
        .collect();
    Ok((monotone && last <= 0.05, list.join(", ")))
}
