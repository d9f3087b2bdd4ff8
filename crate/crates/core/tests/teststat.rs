use nistest::dgp::{simulate_path, DgpSpec, EtaSpec, InnovationSpec};
use nistest::kernels::Kernel;
use nistest::models::{fit_linear, Polynomial};
use nistest::stats::kurtosis;
use nistest::teststat::*;
use proptest::prelude::*;

fn naive(u: &[f64], x: &[f64], k: Kernel, h: f64) -> (f64, f64) {
    let (mut s, mut v) = (0.0, 0.0);
    for t in 0..u.len() {
        for q in 0..u.len() {
            if t != q {
                let w = k.eval((x[t] - x[q]) / h);
                s += u[t] * u[q] * w;
                v += u[t] * u[t] * u[q] * u[q] * w * w;
            }
        }
    }
    (s, v)
}

fn kernel_strategy() -> impl Strategy<Value = Kernel> {
    prop_oneof![Just(Kernel::Gaussian), Just(Kernel::Epanechnikov), Just(Kernel::Uniform)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn pair_sums_match_the_full_double_loop(
        data in prop::collection::vec((-3.0f64..3.0, -10.0f64..10.0), 2..50),
        k in kernel_strategy(),
        h in 0.05f64..5.0,
    ) {
        let (u, x): (Vec<f64>, Vec<f64>) = data.into_iter().unzip();
        let (s0, v0) = naive(&u, &x, k, h);
        let ps = pair_sums(&u, &x, k, h).unwrap();
        let mag: f64 = {
            let mut m = 0.0;
            for t in 0..u.len() { for q in 0..u.len() { if t != q { m += (u[t] * u[q] * k.eval((x[t] - x[q]) / h)).abs(); } } }
            m
        };
        prop_assert!((ps.s - s0).abs() <= 1e-12 * mag.max(1e-300));
        prop_assert!((ps.v2 - v0).abs() <= 1e-12 * v0.max(1e-300));
    }

    #[test]
    fn z_is_scale_invariant(
        data in prop::collection::vec((-3.0f64..3.0, -2.0f64..2.0), 3..40),
        c in prop_oneof![-100.0f64..-0.01, 0.01f64..100.0],
    ) {
        let (u, x): (Vec<f64>, Vec<f64>) = data.into_iter().unzip();
        let a = pair_sums(&u, &x, Kernel::Gaussian, 0.7).unwrap();
        prop_assume!(a.v2 > 0.0);
        let uc: Vec<f64> = u.iter().map(|v| c * v).collect();
        let b = pair_sums(&uc, &x, Kernel::Gaussian, 0.7).unwrap();
        let (za, zb) = (z_statistic(a.s, a.v2).unwrap(), z_statistic(b.s, b.v2).unwrap());
        prop_assert!((za - zb).abs() < 1e-12 * za.abs().max(1.0));
    }

    #[test]
    fn one_signed_residuals_give_positive_s(
        data in prop::collection::vec((0.01f64..3.0, -5.0f64..5.0), 2..40),
        sign in prop_oneof![Just(1.0f64), Just(-1.0)],
    ) {
        let (u, x): (Vec<f64>, Vec<f64>) = data.into_iter().unzip();
        let u: Vec<f64> = u.iter().map(|v| sign * v).collect();
        prop_assert!(statistic_s(&u, &x, Kernel::Gaussian, 1.0).unwrap() > 0.0);
    }
}

#[test]
fn self_normalizer_tracks_its_limit() {
    // V² / (σ⁴ Σ_{s≠t} K²) → 1 under H₀ with σ = 1
    let n = 500;
    let h = (n as f64).powf(-1.0 / 3.0);
    let spec = DgpSpec {
        n,
        kappa: 0.0,
        innovations: InnovationSpec { r: 0.0 },
        eta: EtaSpec::Iid,
    };
    let ratios: Vec<f64> = (0..200)
        .map(|k| {
            let p = simulate_path(&spec, |x| x, 7_000 + k).unwrap();
            let fit = fit_linear(&p.x, &p.y).unwrap();
            let v2 = statistic_v2(&fit.residuals, &p.x, Kernel::Gaussian, h).unwrap();
            v2 / kernel_square_sum(&p.x, Kernel::Gaussian, h).unwrap()
        })
        .collect();
    let m = nistest::stats::mean(&ratios);
    assert!((0.9..=1.1).contains(&m), "{m}");
}

#[test]
fn unnormalized_statistic_has_heavier_tails() {
    let n = 300;
    let h = (n as f64).powf(-1.0 / 3.0);
    let spec = DgpSpec {
        n,
        kappa: 0.0,
        innovations: InnovationSpec { r: 0.0 },
        eta: EtaSpec::Iid,
    };
    let norm = normalizers(n, h, 1.0, 1.0, Kernel::Gaussian.l2()).unwrap();
    let (mut s_tau, mut z) = (Vec::new(), Vec::new());
    for k in 0..2000 {
        let p = simulate_path(&spec, |x| x, 90_000 + k).unwrap();
        let fit = fit_linear(&p.x, &p.y).unwrap();
        let ps = pair_sums(&fit.residuals, &p.x, Kernel::Gaussian, h).unwrap();
        s_tau.push(ps.s / norm.tau2.sqrt());
        z.push(z_statistic(ps.s, ps.v2).unwrap());
    }
    let (ks, kz) = (kurtosis(&s_tau), kurtosis(&z));
    assert!(ks > kz, "kurtosis S/tau {ks} vs Z {kz}");
}

#[test]
fn decomposition_recombines_to_s() {
    let mut state = 11u64;
    let mut unif = || {
        state = nistest::rng::splitmix64(state);
        state as f64 / u64::MAX as f64 - 0.5
    };
    let model = Polynomial { k: 3 };
    for _ in 0..1000 {
        let n = 2 + (unif().abs() * 96.0) as usize % 49;
        let x: Vec<f64> = (0..n).map(|_| 6.0 * unif()).collect();
        let u: Vec<f64> = (0..n).map(|_| 2.0 * unif()).collect();
        let theta = [unif(), unif(), unif()];
        let theta_hat = [theta[0] + 0.1 * unif(), theta[1] + 0.1 * unif(), theta[2] + 0.1 * unif()];
        let h = 0.2 + unif().abs();
        let d = decompose(&u, &theta, &theta_hat, &model, &x, Kernel::Gaussian, h).unwrap();
        let s = statistic_s(&d.u_hat, &x, Kernel::Gaussian, h).unwrap();
        let scale = d.s1.abs() + d.s2.abs() + d.s3.abs() + s.abs();
        assert!((d.recombined() - s).abs() <= 1e-8 * scale.max(1e-300));
    }
}
