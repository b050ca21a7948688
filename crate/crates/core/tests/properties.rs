use ccca::metrics::matched_snr_db;
use ccca::regression::{coefficients_from_text, coefficients_to_text};
use ccca::{
    cos_index, fit_alpha_regression, isr, kl_divergence_estimate, predict_alpha, pseudo_observations, Contrast,
    CopulaFamily, CopulaModel, Margins, Matrix, RegressionCoefficients, SignalMatrix, SignalRole,
};
use proptest::prelude::*;

fn model() -> impl Strategy<Value = CopulaModel<f64>> {
    prop_oneof![
        (1.0..15.0f64).prop_map(|a| CopulaModel::new(CopulaFamily::Gumbel, a).unwrap()),
        (0.05..15.0f64).prop_map(|a| CopulaModel::new(CopulaFamily::Clayton, a).unwrap()),
        (-15.0..15.0f64)
            .prop_filter("nonzero", |a| a.abs() > 1e-3)
            .prop_map(|a| CopulaModel::new(CopulaFamily::Frank, a).unwrap()),
        (-0.95..0.95f64).prop_map(|a| CopulaModel::new(CopulaFamily::Gaussian, a).unwrap()),
        Just(CopulaModel::independence()),
    ]
}

fn unit() -> impl Strategy<Value = f64> {
    0.001..0.999f64
}

fn signal(len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-50.0..50.0f64, len)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn cdf_stays_within_frechet_bounds(m in model(), u in unit(), v in unit()) {
        let c = m.cdf(u, v);
        prop_assert!(c >= (u + v - 1.0).max(0.0) - 1e-12, "{c} below lower bound at ({u}, {v})");
        prop_assert!(c <= u.min(v) + 1e-12, "{c} above upper bound at ({u}, {v})");
    }

    #[test]
    fn cdf_is_nondecreasing(m in model(), u in unit(), v in unit(), du in 0.0..0.2f64) {
        let u2 = (u + du).min(1.0);
        prop_assert!(m.cdf(u2, v) >= m.cdf(u, v) - 1e-12);
        prop_assert!(m.cdf(v, u2) >= m.cdf(v, u) - 1e-12);
    }

    #[test]
    fn density_is_positive_inside_the_square(m in model(), u in 0.01..0.99f64, v in 0.01..0.99f64) {
        let d = m.density(u, v);
        prop_assert!(d.is_finite() && d >= 0.0, "density {d}");
        prop_assert!((m.log_density(u, v) - d.ln()).abs() < 1e-8 * (1.0 + d.ln().abs()) || d == 0.0);
    }

    #[test]
    fn cos_is_a_rank_statistic_in_the_unit_interval(x in signal(60), y in signal(60)) {
        let c = cos_index(&x, &y).unwrap();
        prop_assert!((0.0..=1.0).contains(&c));
        let xe: Vec<f64> = x.iter().map(|v| (v / 10.0).exp()).collect();
        let yc: Vec<f64> = y.iter().map(|v| v.powi(3) - 7.0).collect();
        prop_assert_eq!(c, cos_index(&xe, &yc).unwrap());
    }

    #[test]
    fn pseudo_observations_lie_in_the_half_open_unit_interval(x in signal(40), y in signal(40)) {
        let p = pseudo_observations(&x, &y).unwrap();
        prop_assert!(p.u().iter().chain(p.v()).all(|&w| w > 0.0 && w <= 1.0));
        let max = p.u().iter().cloned().fold(0.0, f64::max);
        prop_assert_eq!(max, 1.0);
    }

    #[test]
    fn isr_ignores_row_order_and_row_scale(
        g in prop::collection::vec(-3.0..3.0f64, 4),
        s0 in prop_oneof![-5.0..-0.2f64, 0.2..5.0f64],
        s1 in prop_oneof![-5.0..-0.2f64, 0.2..5.0f64],
    ) {
        prop_assume!(g.iter().all(|v| v.abs() > 1e-3));
        let m = Matrix::from_rows(&[g[..2].to_vec(), g[2..].to_vec()]).unwrap();
        let swapped = Matrix::from_rows(&[g[2..].to_vec(), g[..2].to_vec()]).unwrap();
        let scaled = Matrix::from_rows(&[
            g[..2].iter().map(|v| v * s0).collect(),
            g[2..].iter().map(|v| v * s1).collect(),
        ])
        .unwrap();
        let base = isr(&m);
        prop_assert!((isr(&swapped) - base).abs() <= 1e-12 * (1.0 + base));
        prop_assert!((isr(&scaled) - base).abs() <= 1e-9 * (1.0 + base));
    }

    #[test]
    fn snr_ignores_sign_flips_and_positive_rescaling(
        s0 in signal(50), s1 in signal(50), noise in signal(50),
        k0 in 0.1..10.0f64, k1 in 0.1..10.0f64,
    ) {
        let s = SignalMatrix::new(vec![s0.clone(), s1.clone()], SignalRole::Sources).unwrap();
        prop_assume!(s.standardized().is_ok());
        let y0: Vec<f64> = s0.iter().zip(&noise).map(|(a, n)| a + 0.1 * n).collect();
        let y1: Vec<f64> = s1.iter().zip(&noise).map(|(a, n)| a - 0.2 * n).collect();
        let y = SignalMatrix::new(vec![y0.clone(), y1.clone()], SignalRole::Estimates).unwrap();
        let warped = SignalMatrix::new(
            vec![y0.iter().map(|v| -k0 * v).collect(), y1.iter().map(|v| k1 * v).collect()],
            SignalRole::Estimates,
        )
        .unwrap();
        let (_, a) = matched_snr_db(&y, &s).unwrap();
        let (_, b) = matched_snr_db(&warped, &s).unwrap();
        for (x, z) in a.iter().zip(&b) {
            prop_assert!((x - z).abs() < 1e-6, "{a:?} vs {b:?}");
        }
    }

    #[test]
    fn prediction_stays_in_the_trained_range(
        a in prop::collection::vec(-30.0..30.0f64, 3),
        cos in -0.5..1.5f64,
    ) {
        let coeffs = RegressionCoefficients {
            family: CopulaFamily::Clayton,
            a1: a[0],
            a2: a[1],
            a3: a[2],
            alpha_min: 0.001,
            alpha_max: 20.0,
            residual_norm: 0.0,
            provenance: None,
        };
        let p = predict_alpha(&coeffs, cos);
        prop_assert!((0.001..=20.0).contains(&p), "{p}");
    }

    #[test]
    fn regression_fit_ignores_point_order(
        pts in prop::collection::vec((0.0..1.0f64, 0.1..20.0f64), 5..30),
        seed in any::<u64>(),
    ) {
        prop_assume!(pts.iter().map(|p| (p.0 * 1e9) as i64).collect::<std::collections::BTreeSet<_>>().len() >= 3);
        let mut shuffled = pts.clone();
        let k = shuffled.len();
        shuffled.rotate_left((seed as usize) % k);
        shuffled.reverse();
        let a = fit_alpha_regression(CopulaFamily::Clayton, &pts).unwrap();
        let b = fit_alpha_regression(CopulaFamily::Clayton, &shuffled).unwrap();
        let scale = 1.0 + a.a1.abs() + a.a2.abs() + a.a3.abs();
        prop_assert!((a.a1 - b.a1).abs() < 1e-9 * scale);
        prop_assert!((a.a2 - b.a2).abs() < 1e-9 * scale);
        prop_assert!((a.a3 - b.a3).abs() < 1e-9 * scale);
    }

    #[test]
    fn coefficient_text_round_trips(a in prop::collection::vec(-1e3..1e3f64, 3), lo in 0.001..1.0f64) {
        let rec = RegressionCoefficients {
            family: CopulaFamily::Frank,
            a1: a[0],
            a2: a[1],
            a3: a[2],
            alpha_min: lo,
            alpha_max: 20.0,
            residual_norm: 0.5,
            provenance: None,
        };
        let back: Vec<RegressionCoefficients<f64>> = coefficients_from_text(&coefficients_to_text(std::slice::from_ref(&rec))).unwrap();
        prop_assert_eq!(back, vec![rec]);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn rank_margin_divergence_ignores_increasing_transforms(x in signal(40), y in signal(40), shift in -5.0..5.0f64) {
        let base = SignalMatrix::new(vec![x.clone(), y.clone()], SignalRole::Estimates).unwrap();
        prop_assume!(base.standardized().is_ok());
        let warped = SignalMatrix::new(
            vec![x.iter().map(|v| (v / 20.0).exp()).collect(), y.iter().map(|v| v.powi(3) + shift).collect()],
            SignalRole::Estimates,
        )
        .unwrap();
        let m = CopulaModel::new(CopulaFamily::Clayton, 2.0).unwrap();
        let contrast = Contrast::Smoothed { grid: 20 };
        let a = kl_divergence_estimate(&base, &m, contrast, Margins::Rank).unwrap();
        let b = kl_divergence_estimate(&warped, &m, contrast, Margins::Rank).unwrap();
        prop_assert_eq!(a, b);
    }
}
