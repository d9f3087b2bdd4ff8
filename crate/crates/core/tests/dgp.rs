use nistest::dgp::*;
use nistest::stats::{mean, variance};
use proptest::prelude::*;
use rayon::prelude::*;

fn spec(n: usize, r: f64, eta: EtaSpec) -> DgpSpec {
    DgpSpec {
        n,
        kappa: 0.0,
        innovations: InnovationSpec { r },
        eta,
    }
}

#[test]
fn paths_do_not_depend_on_threads() {
    let s = spec(200, 0.5, EtaSpec::Ar { lambda: -0.4 });
    let serial: Vec<SamplePath> = (0..64).map(|k| simulate_path(&s, |x| x, k).unwrap()).collect();
    let parallel: Vec<SamplePath> = (0..64u64)
        .into_par_iter()
        .map(|k| simulate_path(&s, |x| x, k).unwrap())
        .collect();
    assert_eq!(serial, parallel);
}

#[test]
fn unit_root_endpoint_variance() {
    let n = 400;
    let reps = 4000;
    let ends: Vec<f64> = (0..reps)
        .map(|k| {
            let p = simulate_path(&spec(n, 0.0, EtaSpec::Iid), |x| x, 50_000 + k).unwrap();
            p.x[n - 1] / (n as f64).sqrt()
        })
        .collect();
    let v = variance(&ends);
    // SE of a normal sample variance is σ²√(2/(R−1))
    let se = (2.0 / (reps as f64 - 1.0)).sqrt();
    assert!((v - 1.0).abs() < 3.0 * se, "{v}");
}

#[test]
fn flipping_r_negates_the_slope_of_u_on_eps() {
    let n = 20_000;
    let slope = |r: f64| {
        let (eps, u) = draw_innovations(n, &InnovationSpec { r }, 99).unwrap();
        let (me, mu) = (mean(&eps), mean(&u));
        let sxy: f64 = eps.iter().zip(&u).map(|(e, v)| (e - me) * (v - mu)).sum();
        let sxx: f64 = eps.iter().map(|e| (e - me).powi(2)).sum();
        sxy / sxx
    };
    let (a, b) = (slope(0.5), slope(-0.5));
    let se = (1.0 - 0.25f64).sqrt() / (n as f64).sqrt();
    assert!((a - 0.5).abs() < 3.0 * se);
    assert!((b + 0.5).abs() < 3.0 * se);
    // ε and ξ streams are shared, so the noise term cancels in the difference
    assert!((a - b - 1.0).abs() < 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ar_residuals_vanish(lambda in -0.95f64..0.95, seed in any::<u64>(), n in 2usize..300) {
        let (eps, _) = draw_innovations(n, &InnovationSpec { r: 0.0 }, seed).unwrap();
        let pre = vec![0.3; 7];
        let eta = build_eta(&eps, &EtaSpec::Ar { lambda }, &pre).unwrap();
        for t in 1..n {
            prop_assert_eq!(eta[t], lambda * eta[t - 1] + eps[t]);
        }
    }

    #[test]
    fn regressor_recursion(kappa in -10.0f64..10.0, seed in any::<u64>(), n in 2usize..200) {
        let (eps, _) = draw_innovations(n, &InnovationSpec { r: 0.0 }, seed).unwrap();
        let reg = RegressorSpec::new(kappa, n).unwrap();
        let x = build_regressor(&eps, &reg).unwrap();
        prop_assert_eq!(x[0], eps[0]);
        for t in 1..n {
            prop_assert_eq!(x[t], reg.rho() * x[t - 1] + eps[t]);
        }
    }

    #[test]
    fn same_seed_same_path(seed in any::<u64>(), r in -1.0f64..1.0, lambda in -0.9f64..0.9) {
        let s = spec(50, r, EtaSpec::Ma { lambda });
        let a = simulate_path(&s, |x| 2.0 * x, seed).unwrap();
        let b = simulate_path(&s, |x| 2.0 * x, seed).unwrap();
        prop_assert_eq!(&a, &b);
        for t in 0..50 {
            prop_assert_eq!(a.y[t], 2.0 * a.x[t] + a.u[t]);
        }
    }
}
