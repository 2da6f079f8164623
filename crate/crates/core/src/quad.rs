//! Adaptive Gauss-Kronrod quadrature.
//!
//! A 21-point Kronrod rule with the QUADPACK error heuristic, driven by a
//! global bisection queue over user supplied breakpoints.

use crate::error::{Error, Result};
use std::cmp::Ordering;
use std::collections::BinaryHeap;

const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_958_109_831_074,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

/// Value and error estimate of a definite integral.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub abs_err: f64,
}

impl std::ops::Add for QuadResult {
    type Output = QuadResult;
    fn add(self, o: QuadResult) -> QuadResult {
        QuadResult {
            value: self.value + o.value,
            abs_err: self.abs_err + o.abs_err,
        }
    }
}

/// Single application of the 21-point Gauss-Kronrod rule on `[a, b]`.
pub fn gk21<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> QuadResult {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut resg = 0.0;
    let mut resk = WGK[10] * fc;
    let mut resabs = resk.abs();
    let mut fv1 = [0.0; 10];
    let mut fv2 = [0.0; 10];
    for j in 0..10 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        resk += WGK[j] * (f1 + f2);
        resabs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            resg += WG[j / 2] * (f1 + f2);
        }
    }
    let reskh = resk * 0.5;
    let mut resasc = WGK[10] * (fc - reskh).abs();
    for j in 0..10 {
        resasc += WGK[j] * ((fv1[j] - reskh).abs() + (fv2[j] - reskh).abs());
    }
    let value = resk * half;
    resabs *= half.abs();
    resasc *= half.abs();
    let mut err = ((resk - resg) * half).abs();
    if resasc != 0.0 && err != 0.0 {
        err = resasc * (200.0 * err / resasc).powf(1.5).min(1.0);
    }
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * resabs);
    }
    QuadResult {
        value,
        abs_err: err,
    }
}

struct Segment {
    a: f64,
    b: f64,
    r: QuadResult,
}

impl PartialEq for Segment {
    fn eq(&self, o: &Self) -> bool {
        self.r.abs_err == o.r.abs_err
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Segment {
    fn cmp(&self, o: &Self) -> Ordering {
        self.r
            .abs_err
            .partial_cmp(&o.r.abs_err)
            .unwrap_or(Ordering::Equal)
    }
}

/// Tolerances and subdivision budget for [`integrate_points`].
#[derive(Clone, Copy, Debug)]
pub struct QuadOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    /// Extra bisections allowed beyond the initial panels.
    pub max_subdivisions: usize,
    /// Error level above which failing to meet the tolerance becomes an error.
    pub fail_above: f64,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self {
            abs_tol: 1e-13,
            rel_tol: 1e-12,
            max_subdivisions: 4000,
            fail_above: 1e-7,
        }
    }
}

/// Integrates `f` over `[points[0], points[last]]`, treating every interior
/// point as a breakpoint of the initial partition.
///
/// Segments with the largest error estimate are bisected until the total
/// estimate is below `max(abs_tol, rel_tol·|I|)` or the budget is exhausted.
pub fn integrate_points<F: Fn(f64) -> f64>(
    f: &F,
    points: &[f64],
    opts: QuadOptions,
) -> Result<QuadResult> {
    if points.len() < 2 {
        return Ok(QuadResult::default());
    }
    let mut heap = BinaryHeap::with_capacity(points.len() * 2);
    let mut total = QuadResult::default();
    for w in points.windows(2) {
        if w[1] <= w[0] {
            continue;
        }
        let r = gk21(f, w[0], w[1]);
        total = total + r;
        heap.push(Segment { a: w[0], b: w[1], r });
    }
    let mut splits = 0;
    loop {
        let tol = opts.abs_tol.max(opts.rel_tol * total.value.abs());
        if total.abs_err <= tol {
            break;
        }
        if splits >= opts.max_subdivisions {
            if total.abs_err > opts.fail_above {
                return Err(Error::QuadratureNonConvergent(format!(
                    "error estimate {:.3e} after {} subdivisions",
                    total.abs_err, splits
                )));
            }
            break;
        }
        let seg = match heap.pop() {
            Some(s) => s,
            None => break,
        };
        let mid = 0.5 * (seg.a + seg.b);
        if mid <= seg.a || mid >= seg.b {
            // Interval exhausted at machine precision; keep its estimate.
            heap.push(seg);
            if total.abs_err > opts.fail_above {
                return Err(Error::QuadratureNonConvergent(
                    "interval collapsed below machine precision".into(),
                ));
            }
            break;
        }
        let left = gk21(f, seg.a, mid);
        let right = gk21(f, mid, seg.b);
        total.value += left.value + right.value - seg.r.value;
        total.abs_err += left.abs_err + right.abs_err - seg.r.abs_err;
        heap.push(Segment {
            a: seg.a,
            b: mid,
            r: left,
        });
        heap.push(Segment {
            a: mid,
            b: seg.b,
            r: right,
        });
        splits += 1;
    }
    // Re-sum to shed the rounding drift of incremental updates.
    let mut value = 0.0;
    let mut err = 0.0;
    let mut segs: Vec<Segment> = heap.into_vec();
    segs.sort_by(|x, y| x.a.partial_cmp(&y.a).unwrap_or(Ordering::Equal));
    for s in &segs {
        value += s.r.value;
        err += s.r.abs_err;
    }
    Ok(QuadResult {
        value,
        abs_err: err,
    })
}

/// Integrates over `[a, b]` with breakpoints every `step` (at least one panel).
pub fn integrate_uniform<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    step: f64,
    opts: QuadOptions,
) -> Result<QuadResult> {
    integrate_points(f, &uniform_points(a, b, step), opts)
}

/// Breakpoints `a, a+h, …, b` with `h ≤ step`.
pub fn uniform_points(a: f64, b: f64, step: f64) -> Vec<f64> {
    let n = (((b - a) / step).ceil() as usize).max(1);
    let h = (b - a) / n as f64;
    (0..=n)
        .map(|i| if i == n { b } else { a + h * i as f64 })
        .collect()
}

/// Merges a sorted breakpoint list with uniform refinement of width `step`.
pub fn refine_points(knots: &[f64], step: f64) -> Vec<f64> {
    let mut out = Vec::new();
    for w in knots.windows(2) {
        if w[1] <= w[0] {
            continue;
        }
        let pts = uniform_points(w[0], w[1], step);
        if out.is_empty() {
            out.extend_from_slice(&pts);
        } else {
            out.extend_from_slice(&pts[1..]);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn gk21_exact_on_polynomials() {
        let r = gk21(&|x: f64| x.powi(20), 0.0, 1.0);
        assert!((r.value - 1.0 / 21.0).abs() < 1e-15);
    }

    #[test]
    fn adaptive_handles_oscillation() {
        let f = |x: f64| (50.0 * x).sin() * (-x).exp();
        let r = integrate_uniform(&f, 0.0, 10.0, 0.5, QuadOptions::default()).unwrap();
        // ∫₀^10 e^{-x} sin(50x) dx
        let exact = {
            let a = 50.0f64;
            let e = (-10.0f64).exp();
            (a - e * (10.0 * a).sin() - a * e * (10.0 * a).cos()) / (1.0 + a * a)
        };
        assert!((r.value - exact).abs() < 1e-12, "{} vs {}", r.value, exact);
        assert!(r.abs_err < 1e-10);
    }

    #[test]
    fn adaptive_handles_kinks_at_breakpoints() {
        let f = |x: f64| (x - 1.0).abs();
        let r = integrate_points(&f, &[0.0, 1.0, 3.0], QuadOptions::default()).unwrap();
        assert!((r.value - 2.5).abs() < 1e-14);
        let g = |x: f64| x.sqrt();
        let r = integrate_points(&g, &[0.0, 1.0], QuadOptions::default()).unwrap();
        assert!((r.value - 2.0 / 3.0).abs() < 1e-10);
        let h = |x: f64| (PI * x).sin();
        let r = integrate_points(&h, &[0.0, 1.0], QuadOptions::default()).unwrap();
        assert!((r.value - 2.0 / PI).abs() < 1e-14);
    }

    #[test]
    fn refine_keeps_knots() {
        let p = refine_points(&[0.0, 1.0, 1.5], 0.3);
        assert_eq!(p[0], 0.0);
        assert!(p.contains(&1.0));
        assert_eq!(*p.last().unwrap(), 1.5);
        assert!(p.windows(2).all(|w| w[1] > w[0] && w[1] - w[0] <= 0.3 + 1e-12));
    }
}
