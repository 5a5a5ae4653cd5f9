use lyapexp::numerics::{find_all_roots, integrate_inverse_sqrt_singularity, polylog, QuadratureSpec};
use proptest::prelude::*;

fn poly(c: &[f64], y: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &ck| acc * y + ck)
}

fn sign_changes(f: impl Fn(f64) -> f64, lo: f64, hi: f64, nodes: usize) -> usize {
    let mut prev = f(lo);
    let mut count = 0;
    for k in 1..nodes {
        let v = f(lo + (hi - lo) * k as f64 / (nodes - 1) as f64);
        if prev != 0.0 && v != 0.0 && prev.signum() != v.signum() {
            count += 1;
        }
        if v != 0.0 {
            prev = v;
        }
    }
    count
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn inverse_sqrt_polynomials(
        c in prop::collection::vec(0.1f64..2.0, 1..7),
        upper in 0.05f64..6.0,
    ) {
        let spec = QuadratureSpec::default();
        let got = integrate_inverse_sqrt_singularity(|y: f64| poly(&c, y) / y.sqrt(), upper, &spec).unwrap();
        let exact: f64 = c
            .iter()
            .enumerate()
            .map(|(k, ck)| ck * upper.powf(k as f64 + 0.5) / (k as f64 + 0.5))
            .sum();
        prop_assert!(((got - exact) / exact).abs() <= 1e-10, "{got} vs {exact}");
    }

    #[test]
    fn root_count_matches_fine_grid(k in 1.0f64..20.0, phase in 0.0f64..6.28) {
        let f = |x: f64| (k * x + phase).sin();
        let roots = find_all_roots(|x: f64| Ok(f(x)), 0.0, 10.0, 512, 1e-13).unwrap();
        prop_assert_eq!(roots.len(), sign_changes(f, 0.0, 10.0, 51_200));
        for (r, (lo, hi)) in roots.roots.iter().zip(&roots.brackets) {
            prop_assert!(*lo <= *r && *r <= *hi);
            prop_assert!(f(*r).abs() <= 1e-12);
        }
        prop_assert!(roots.roots.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn root_count_for_separated_cubics(r1 in -0.9f64..-0.4, r2 in -0.2f64..0.2, r3 in 0.4f64..0.9) {
        let f = |x: f64| (x - r1) * (x - r2) * (x - r3);
        let roots = find_all_roots(|x: f64| Ok(f(x)), -1.0, 1.0, 64, 1e-14).unwrap();
        prop_assert_eq!(roots.len(), sign_changes(f, -1.0, 1.0, 6400));
        prop_assert_eq!(roots.len(), 3);
    }

    #[test]
    fn trilog_derivative_identity(z in 0.1f64..0.9) {
        let h = 1e-5;
        let fd = (polylog(3, z + h).unwrap() - polylog(3, z - h).unwrap()) / (2.0 * h);
        prop_assert!((fd - polylog(2, z).unwrap() / z).abs() <= 1e-8);
    }
}
