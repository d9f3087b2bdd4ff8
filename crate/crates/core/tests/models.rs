use nistest::models::*;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn ols_residuals_are_orthogonal(
        xs in prop::collection::vec(-50.0f64..50.0, 5..120),
        a in -5.0f64..5.0,
        b in -5.0f64..5.0,
        seed in any::<u64>(),
    ) {
        let mut state = seed;
        let y: Vec<f64> = xs.iter().map(|x| {
            state = nistest::rng::splitmix64(state);
            a + b * x + (state as f64 / u64::MAX as f64 - 0.5)
        }).collect();
        prop_assume!(xs.iter().any(|v| (v - xs[0]).abs() > 1e-3));
        let fit = fit_linear(&xs, &y).unwrap();
        let su: f64 = fit.residuals.iter().sum();
        let sux: f64 = fit.residuals.iter().zip(&xs).map(|(u, x)| u * x).sum();
        let scale: f64 = fit.residuals.iter().map(|u| u.abs()).sum::<f64>() * xs.iter().fold(1.0f64, |m, x| m.max(x.abs()));
        prop_assert!(su.abs() < 1e-8 * scale.max(1e-300));
        prop_assert!(sux.abs() < 1e-8 * scale.max(1e-300));
    }

    #[test]
    fn gauss_newton_never_increases_the_objective(
        a in -2.0f64..2.0,
        b in 0.5f64..3.0,
        c in 1.1f64..2.5,
        seed in any::<u64>(),
    ) {
        let model = Power;
        let mut state = seed;
        let x: Vec<f64> = (0..80).map(|i| (i as f64) * 0.1 - 4.0).collect();
        let y: Vec<f64> = x.iter().map(|v| {
            state = nistest::rng::splitmix64(state);
            model.value(*v, &[a, b, c]) + 0.1 * (state as f64 / u64::MAX as f64 - 0.5)
        }).collect();
        let init = [a * 1.1 + 0.1, b * 1.1, c * 1.1];
        if let Ok(fit) = fit_nls(&model, &x, &y, &init, &GaussNewtonOptions::default()) {
            for w in fit.objective_path.windows(2) {
                prop_assert!(w[1] <= w[0]);
            }
        }
    }
}

#[test]
fn registry_covers_the_example_families() {
    for (name, dim) in [("linear", 2), ("poly:4", 4), ("power", 3), ("wexp", 2)] {
        let m = model_by_name(name).unwrap();
        assert_eq!(m.dim(), dim);
        let theta = m.default_theta();
        let mut g = vec![0.0; dim];
        m.gradient(0.7, &theta, &mut g);
        assert!(g.iter().all(|v| v.is_finite()));
    }
    assert_eq!(model_by_name("poly:4").unwrap().growth_exponent(&[0.0; 4]), 3.0);
    assert_eq!(model_by_name("wexp").unwrap().growth_exponent(&[0.0; 2]), 0.0);
    assert!(model_by_name("spline").is_err());
}
