use dtnoise::covariance::{
    cov_1d, cov_2d, post_transform_cov, CovKind, FamilyProvider, NoiseModel, NoiseModel2D,
};
use dtnoise::spectra::{LinearPhase, Taper, WaveletFamily};
use dtnoise::xcorr::{gamma, Method};
use proptest::prelude::*;

fn closed_family(i: usize) -> WaveletFamily {
    match i {
        0 => WaveletFamily::shannon(2).unwrap(),
        1 => WaveletFamily::shannon(4).unwrap(),
        2 => WaveletFamily::meyer(2, 1.0 / 3.0).unwrap(),
        3 => WaveletFamily::meyer(3, 0.25).unwrap(),
        4 => WaveletFamily::haar(),
        _ => WaveletFamily::franklin(),
    }
}

fn g(f: &WaveletFamily, m: usize, mp: usize, t: f64, d: i64) -> f64 {
    gamma(f, m, mp, t, d, Method::Auto).unwrap().0.value
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn mother_correlation_is_odd(i in 0usize..6, t in -12.0f64..12.0) {
        let f = closed_family(i);
        for m in 1..f.bands() {
            prop_assert!((g(&f, m, m, t, 0) + g(&f, m, m, -t, 0)).abs() <= 1e-9);
        }
    }

    #[test]
    fn scaling_correlation_is_symmetric(i in 0usize..6, t in -12.0f64..12.0, d in -3i64..3) {
        let f = closed_family(i);
        let a = g(&f, 0, 0, t, d);
        let b = g(&f, 0, 0, -t - 2.0 * d as f64 - 1.0, d);
        prop_assert!((a - b).abs() <= 1e-9, "{a} vs {b}");
    }

    #[test]
    fn correlations_are_bounded(i in 0usize..6, t in -20.0f64..20.0, d in -2i64..2) {
        let f = closed_family(i);
        for m in 0..f.bands() {
            prop_assert!(g(&f, m, m, t, d).abs() <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn shannon_inter_band_vanishes(bands in 2usize..6, t in -10.0f64..10.0) {
        let f = WaveletFamily::shannon(bands).unwrap();
        for m in 0..bands {
            for mp in 0..bands {
                if m != mp {
                    prop_assert_eq!(g(&f, m, mp, t, 0), 0.0);
                }
            }
        }
    }

    #[test]
    fn white_noise_covariance_is_scaled_correlation(
        i in 0usize..6, sigma2 in 0.1f64..5.0, j in -2i32..5, l in -6i64..6
    ) {
        let f = closed_family(i);
        let m = f.bands() - 1;
        let p = FamilyProvider::new(&f, m, m, 0, CovKind::PrimalDual).unwrap();
        let s = cov_1d(&NoiseModel::white(sigma2), &p, j, &[l]).unwrap();
        let expect = sigma2 * g(&f, m, m, -(l as f64), 0);
        prop_assert!((s.values[0] - expect).abs() <= 1e-12 * sigma2.max(1.0));
    }

    #[test]
    fn separable_fields_are_outer_products(
        a1 in 0.5f64..2.0, al1 in 0.5f64..2.0, a2 in 0.5f64..2.0, al2 in 0.5f64..2.0, j in 1i32..3
    ) {
        let f = WaveletFamily::shannon(2).unwrap();
        let p = FamilyProvider::new(&f, 1, 1, 0, CovKind::PrimalDual).unwrap();
        let q = FamilyProvider::new(&f, 0, 0, 0, CovKind::PrimalDual).unwrap();
        let lags = [-2i64, 0, 1, 3];
        let (n1, n2) = (NoiseModel::exponential(a1, al1), NoiseModel::exponential(a2, al2));
        let x = cov_1d(&n1, &p, j, &lags).unwrap();
        let y = cov_1d(&n2, &q, j, &lags).unwrap();
        let field = cov_2d(&NoiseModel2D::Separable(n1, n2), &p, &q, j, &lags, &lags).unwrap();
        for i in 0..lags.len() {
            for k in 0..lags.len() {
                prop_assert_eq!(field.get(i, k), x.values[i] * y.values[k]);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn closed_form_matches_quadrature(i in 0usize..6, l in -8i64..=8) {
        let f = closed_family(i);
        let m = f.bands() - 1;
        let c = gamma(&f, m, m, l as f64, 0, Method::ClosedForm).unwrap().0.value;
        let q = gamma(&f, m, m, l as f64, 0, Method::Quadrature).unwrap().0.value;
        prop_assert!((c - q).abs() <= 1e-6, "{c} vs {q}");
    }

    #[test]
    fn cross_band_swap_is_antisymmetric(bands in 3usize..5, t in -4.0f64..4.0) {
        let eps = 1.0 / (bands as f64 + 1.0);
        let f = WaveletFamily::meyer_with(bands, eps, Taper::Standard, Some(LinearPhase::half_sample(bands))).unwrap();
        let a = g(&f, 1, 2, t, 0);
        let b = g(&f, 2, 1, -t, 0);
        prop_assert!((a + b).abs() <= 1e-6, "{a} vs {b}");
    }

    #[test]
    fn post_transform_decorrelates(sigma2 in 0.1f64..4.0, j in 1i32..3) {
        let f = WaveletFamily::meyer(3, 0.25).unwrap();
        let lags: Vec<i64> = (-2..=2).collect();
        let pp = |m| FamilyProvider::new(&f, m, m, 0, CovKind::PrimalPrimal).unwrap();
        let pd = |m| FamilyProvider::new(&f, m, m, 0, CovKind::PrimalDual).unwrap();
        let noise = NoiseModel2D::White { sigma2 };
        let nn = cov_2d(&noise, &pp(1), &pp(2), j, &lags, &lags).unwrap();
        let nnh = cov_2d(&noise, &pd(1), &pd(2), j, &lags, &lags).unwrap();
        let pair = post_transform_cov(&nn, &nnh).unwrap();
        prop_assert!(pair.wwh.values.iter().all(|v| *v == 0.0));
        for (i, v) in pair.ww.values.iter().enumerate() {
            prop_assert!((v - nn.values[i] - nnh.values[i]).abs() <= 1e-15);
            prop_assert!((pair.whwh.values[i] - nn.values[i] + nnh.values[i]).abs() <= 1e-15);
        }
    }

    #[test]
    fn primal_and_dual_autocovariances_agree(alpha in 0.3f64..3.0, l in -4i64..4) {
        let f = WaveletFamily::meyer(2, 1.0 / 3.0).unwrap();
        let noise = NoiseModel::exponential(1.0, alpha);
        let a = cov_1d(&noise, &FamilyProvider::new(&f, 1, 1, 0, CovKind::PrimalPrimal).unwrap(), 2, &[l]).unwrap();
        let b = cov_1d(&noise, &FamilyProvider::new(&f, 1, 1, 0, CovKind::DualDual).unwrap(), 2, &[l]).unwrap();
        prop_assert!((a.values[0] - b.values[0]).abs() <= 1e-6);
    }
}
