use nistest::kernels::*;
use proptest::prelude::*;

#[test]
fn nonnegative_and_symmetric_on_a_dense_grid() {
    for k in Kernel::ALL {
        for i in 0..=4000 {
            let x = -8.0 + i as f64 * 0.004;
            let v = k.eval(x);
            assert!(v >= 0.0);
            assert_eq!(v, k.eval(-x));
        }
    }
}

#[test]
fn quadrature_matches_closed_forms() {
    for k in Kernel::ALL {
        let q = k.l2_quadrature();
        assert!((q - k.l2()).abs() <= 1e-10 * k.l2(), "{k}: {q}");
        for m in 0..=6 {
            let exact = k.moment(m).unwrap();
            let q = k.moment_quadrature(m);
            assert!((q - exact).abs() <= 1e-10 * exact.max(1e-300), "{k} m={m}: {q} vs {exact}");
        }
    }
}

proptest! {
    #[test]
    fn bandwidth_decreases_in_p_and_n(n in 10usize..100_000, p1 in 0.05f64..1.0, dp in 0.01f64..0.5, dn in 1usize..1000) {
        let a = bandwidth_from_exponent(n, p1).unwrap().h;
        let b = bandwidth_from_exponent(n, p1 + dp).unwrap().h;
        let c = bandwidth_from_exponent(n + dn, p1).unwrap().h;
        prop_assert!(b < a);
        prop_assert!(c < a);
    }

    #[test]
    fn exponent_strings(num in 1u32..9, den in 1u32..20) {
        let e: Exponent = format!("{num}/{den}").parse().unwrap();
        prop_assert_eq!(e.value, num as f64 / den as f64);
        prop_assert_eq!(e.label, format!("{num}/{den}"));
    }
}
