use proptest::prelude::*;

use monollr::bandwidth::{cv_error, nearest_indices};
use monollr::sim::ks_statistic;
use monollr::*;

fn design() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (3usize..40).prop_flat_map(|n| {
        (
            prop::collection::vec(0.0f64..1.0, n),
            prop::collection::vec(-2.0f64..2.0, n),
        )
    })
}

/// `(S0 S2 - S1^2) / (S0 S2)` for Gaussian kernel weights: the normalized
/// spread of the design seen from `x`. Rounding in local linear weights
/// grows like `eps / spread`.
fn spread(x: f64, xs: &[f64], h: f64) -> f64 {
    let (mut s0, mut s1, mut s2) = (0.0, 0.0, 0.0);
    for &xi in xs {
        let d = x - xi;
        let k = (-0.5 * (d / h).powi(2)).exp();
        s0 += k;
        s1 += k * d;
        s2 += k * d * d;
    }
    (s0 * s2 - s1 * s1) / (s0 * s2)
}

fn cfg(h: f64, h0: f64) -> EstimatorConfig {
    EstimatorConfig::default().with_h(h).with_h0(h0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn lc_and_hansen_weights_are_nonnegative((xs, _) in design(), x in -0.2f64..1.2, h in 0.05f64..0.5) {
        for mode in [WeightMode::LocalConstant, WeightMode::Hansen] {
            if let Ok(w) = local_weights(x, &xs, h, KernelFamily::Gaussian, mode) {
                prop_assert!(w.weights.iter().all(|&v| v >= 0.0));
            }
        }
    }

    #[test]
    fn hansen_equals_ll_without_negative_weights((xs, _) in design(), x in 0.0f64..1.0, h in 0.05f64..0.5) {
        let ll = local_weights(x, &xs, h, KernelFamily::Gaussian, WeightMode::LocalLinear);
        let hn = local_weights(x, &xs, h, KernelFamily::Gaussian, WeightMode::Hansen);
        if let (Ok(ll), Ok(hn)) = (ll, hn) {
            if ll.weights.iter().all(|&v| v >= 0.0) {
                prop_assert_eq!(ll.weights, hn.weights);
            }
        }
    }

    #[test]
    fn weights_follow_translation_and_scale(
        (xs, _) in design(), x in 0.0f64..1.0, h in 0.05f64..0.5, shift in -5.0f64..5.0, scale in 0.2f64..5.0,
    ) {
        for mode in [WeightMode::LocalConstant, WeightMode::LocalLinear] {
            let Ok(base) = local_weights(x, &xs, h, KernelFamily::Gaussian, mode) else { continue };
            let moved: Vec<f64> = xs.iter().map(|v| v + shift).collect();
            let t = local_weights(x + shift, &moved, h, KernelFamily::Gaussian, mode).unwrap();
            let scaled: Vec<f64> = xs.iter().map(|v| v * scale).collect();
            let s = local_weights(x * scale, &scaled, h * scale, KernelFamily::Gaussian, mode).unwrap();
            let mass = base.abs_sum();
            let tol = 1e-14 / spread(x, &xs, h).max(1e-300);
            for k in 0..xs.len() {
                prop_assert!((t.weights[k] - base.weights[k]).abs() <= (1e-7 + tol) * mass);
                prop_assert!((s.weights[k] * scale - base.weights[k]).abs() <= (1e-9 + tol) * mass);
            }
        }
    }

    #[test]
    fn rectangular_lc_weights_are_flat((xs, _) in design(), x in 0.0f64..1.0, h in 0.05f64..0.5) {
        if let Ok(w) = local_weights(x, &xs, h, KernelFamily::Rectangular, WeightMode::LocalConstant) {
            for (k, &xi) in xs.iter().enumerate() {
                let expect = if ((x - xi) / h).abs() < 0.5 { 1.0 / h } else { 0.0 };
                prop_assert_eq!(w.weights[k], expect);
            }
        }
    }

    #[test]
    fn ll_mean_reproduces_affine_data(
        (xs, _) in design(), x in -0.5f64..1.5, h in 0.1f64..0.5, a in -3.0f64..3.0, c in -3.0f64..3.0,
    ) {
        let ys: Vec<f64> = xs.iter().map(|v| a + c * v).collect();
        let tol = (1e-9 + 1e-14 / spread(x, &xs, h).max(1e-300)) * (1.0 + a.abs() + c.abs());
        let s = RegressionSample::new(xs, ys).unwrap();
        if let Ok(m) = ll_mean(&s, x, &cfg(h, 0.01)) {
            prop_assert!((m - (a + c * x)).abs() < tol, "{} vs {}", m, a + c * x);
        }
    }

    #[test]
    fn lc_cdfs_stay_in_unit_interval(
        (xs, ys) in design(), x in -0.2f64..1.2, y in -3.0f64..3.0, h in 0.05f64..0.5, h0 in 0.01f64..0.5,
    ) {
        let s = RegressionSample::new(xs, ys).unwrap();
        let c = cfg(h, h0).with_mode(WeightMode::LocalConstant);
        let step = cdf_step(&s, x, y, &c).unwrap();
        let smooth = cdf_smooth(&s, x, y, &c).unwrap();
        prop_assert!((0.0..=1.0).contains(&step));
        prop_assert!((0.0..=1.0).contains(&smooth));
    }

    #[test]
    fn monotone_estimates_are_distributions(
        (xs, ys) in design(), x in -0.2f64..1.2, h in 0.05f64..0.5, h0 in 0.01f64..0.5, window in any::<bool>(),
    ) {
        let s = RegressionSample::new(xs, ys).unwrap();
        let window = if window { Window::OneSidedLeft } else { Window::TwoSided };
        for method in Method::DISTRIBUTIONS {
            for algorithm in [MonotoneAlgorithm::RunningMax, MonotoneAlgorithm::ClippedDensity] {
                let c = cfg(h, h0).with_window(window).with_algorithm(algorithm);
                let Ok(est) = distribution(&s, x, &c, method) else { continue };
                prop_assert!(est.monotone);
                est.check_monotone().unwrap();
                let q = quantile(&est, 0.5).unwrap();
                prop_assert!(est.cdf_at(q) >= 0.5);
            }
        }
    }

    #[test]
    fn ks_of_proper_estimates_is_a_probability(
        (xs, ys) in design(), x in 0.0f64..1.0, h in 0.05f64..0.5,
        observed in prop::collection::vec(-3.0f64..3.0, 1..30),
    ) {
        let s = RegressionSample::new(xs, ys).unwrap();
        for method in [Method::Lc, Method::Llh] {
            if let Ok(est) = distribution(&s, x, &cfg(h, 0.05), method) {
                let ks = ks_statistic(&est, &observed);
                prop_assert!((0.0..=1.0).contains(&ks));
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn cv_error_ignores_sample_order(
        n in 8usize..30, seed in 0u64..1000, x in 0.0f64..1.0, b in 2.0f64..8.0, rot in 1usize..7,
    ) {
        // Distinct design points so the neighbourhood is order-free.
        let xs: Vec<f64> = (0..n).map(|i| (i as f64 + 0.5) / n as f64).collect();
        let ys: Vec<f64> = (0..n).map(|i| (((i as u64 * 7919 + seed) % 101) as f64) / 50.0).collect();
        let s = RegressionSample::new(xs.clone(), ys.clone()).unwrap();
        let mut order: Vec<usize> = (0..n).collect();
        order.rotate_left(rot % n);
        order.swap(0, n - 1);
        let px: Vec<f64> = order.iter().map(|&i| xs[i]).collect();
        let py: Vec<f64> = order.iter().map(|&i| ys[i]).collect();
        let p = RegressionSample::new(px.clone(), py).unwrap();
        let c = EstimatorConfig::from_counts(b, n).unwrap();
        for method in Method::ALL {
            let e1 = cv_error(&s, &nearest_indices(&xs, x, 5), &c, method);
            let e2 = cv_error(&p, &nearest_indices(&px, x, 5), &c, method);
            if let (Ok(e1), Ok(e2)) = (e1, e2) {
                prop_assert!((e1 - e2).abs() <= 1e-9 * (1.0 + e1), "{} vs {}", e1, e2);
            }
        }
    }

    #[test]
    fn extra_candidates_never_raise_the_minimum(seed in 0u64..1000, extra in 1.0f64..20.0) {
        let n = 30;
        let xs: Vec<f64> = (1..=n).map(|i| i as f64 / n as f64).collect();
        let ys: Vec<f64> = (0..n).map(|i| (((i as u64 * 104729 + seed) % 97) as f64) / 40.0).collect();
        let s = RegressionSample::new(xs, ys).unwrap();
        let base = CvConfig { m: 6, candidates: vec![4.0, 8.0, 12.0], ..CvConfig::default_for(n, Method::Lc) };
        let r1 = select_bandwidth(&s, 0.5, &base, &EstimatorConfig::default()).unwrap();
        let mut more = base.clone();
        more.candidates.push(12.0 + extra);
        let r2 = select_bandwidth(&s, 0.5, &more, &EstimatorConfig::default()).unwrap();
        let min1 = r1.err_by_b.iter().map(|e| e.1).fold(f64::INFINITY, f64::min);
        let min2 = r2.err_by_b.iter().map(|e| e.1).fold(f64::INFINITY, f64::min);
        prop_assert!(min2 <= min1);
        prop_assert_eq!(r1.clone(), select_bandwidth(&s, 0.5, &base, &EstimatorConfig::default()).unwrap());
    }
}
