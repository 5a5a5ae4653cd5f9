use lyapexp::simulate::*;
use proptest::prelude::*;

fn in_pool<R: Send>(threads: usize, f: impl FnOnce() -> R + Send) -> R {
    rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap().install(f)
}

#[test]
fn estimates_do_not_depend_on_worker_count() {
    let spec = SimSpec::fixed_beta(0.2, 1.0, 24, 50_000, 99)
        .unwrap()
        .with_noise(Noise::Exponential { mean: 0.5 })
        .with_q(2);
    let one = in_pool(1, || estimate_moment(&spec).unwrap());
    let four = in_pool(4, || estimate_moment(&spec).unwrap());
    let seven = in_pool(7, || estimate_moment(&spec).unwrap());
    assert_eq!(one.log_moment.to_bits(), four.log_moment.to_bits());
    assert_eq!(one.stderr_log.to_bits(), seven.stderr_log.to_bits());
    assert_eq!(one, seven);
    let a = in_pool(3, || simulate_paths(&spec).unwrap());
    let b = simulate_paths(&spec).unwrap();
    assert_eq!(a, b);
}

#[test]
fn noise_does_not_change_multipliers() {
    let base = SimSpec::fixed_beta(0.3, 2.0, 50, 16, 5).unwrap();
    let noisy = base.with_noise(Noise::Uniform { upper: 2.0 });
    for k in 0..16 {
        assert_eq!(simulate_path(&base, k).log_prod_a, simulate_path(&noisy, k).log_prod_a);
    }
}

#[test]
fn additive_noise_gap_shrinks_with_n() {
    let mut gaps = Vec::new();
    for n in [8usize, 16, 32, 64, 128] {
        let base = SimSpec::fixed_beta(0.2, 1.0, n, 100_000, 2024).unwrap();
        let noisy = base.with_noise(Noise::Exponential { mean: 1.0 });
        let g = (estimate_moment(&noisy).unwrap().log_moment - estimate_moment(&base).unwrap().log_moment).abs();
        gaps.push(g / n as f64);
    }
    assert!(gaps.windows(2).all(|w| w[1] < w[0]), "{gaps:?}");
}

#[test]
fn monte_carlo_covers_exact_across_seeds() {
    for &(n, q) in &[(8usize, 1u32), (14, 1), (8, 2)] {
        let mut covered = 0;
        let seeds = 20;
        for seed in 0..seeds {
            let spec = SimSpec::fixed_beta(0.2, 1.0, n, 200_000, seed).unwrap().with_q(q);
            let exact = exact_moment(&spec).unwrap().log_moment;
            let mc = estimate_moment(&spec).unwrap();
            if (mc.log_moment - exact).abs() <= 4.0 * mc.stderr_log {
                covered += 1;
            }
        }
        assert!(covered * 100 >= 95 * seeds, "(n={n}, q={q}) covered {covered}/{seeds}");
    }
}

#[test]
fn growth_rate_trend_on_doubling_ladder() {
    // (1/n) log E[x_n] increases with n at fixed β.
    let rates: Vec<f64> = [8usize, 16]
        .iter()
        .map(|&n| {
            let s = SimSpec::fixed_beta(0.2, 1.0, n, 2, 0).unwrap();
            exact_moment(&s).unwrap().log_moment / n as f64
        })
        .collect();
    assert!(rates[1] > rates[0]);
    let mc: Vec<f64> = [16usize, 32, 64]
        .iter()
        .map(|&n| {
            let s = SimSpec::fixed_beta(0.2, 1.0, n, 400_000, 3).unwrap();
            estimate_moment(&s).unwrap().log_moment / n as f64
        })
        .collect();
    assert!(mc.windows(2).all(|w| w[1] > w[0]), "{mc:?}");
    assert!(rates[1] < mc[0]);
}

#[test]
fn lln_with_and_without_noise() {
    let spec = SimSpec::fixed_beta(0.2, 1.0, 4000, 10_000, 11).unwrap();
    for s in [spec, spec.with_noise(Noise::Exponential { mean: 1.0 })] {
        let rep = lln_check(&s).unwrap();
        assert_eq!(rep.rungs.len(), 4);
        assert!(rep.rungs.iter().all(|r| r.within), "{rep:?}");
        assert!(rep.shrinking, "{rep:?}");
    }
}

#[test]
fn lln_without_multiplicative_growth() {
    let mut spec = SimSpec::fixed_beta(0.2, 1.0, 4000, 200, 3)
        .unwrap()
        .with_noise(Noise::Constant { value: 1.0 });
    spec.rho = 0.0;
    let rep = lln_check(&spec).unwrap();
    assert_eq!(rep.target, 0.0);
    let last = rep.rungs.last().unwrap();
    assert!((last.mean - (4001.0f64).ln() / 4000.0).abs() < 1e-12);
}

#[test]
fn clt_variance_vanishes_with_rho() {
    assert_eq!(clt_variance(0.0, 3.0), 0.0);
    assert!((clt_variance(0.2, 3.0) - 1.0 / 18.0).abs() < 1e-15);
    assert!(clt_variance(1e-3, 3.0) < 1e-5);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn sandwich_holds_on_every_path(
        rho in 0.0f64..1.0,
        beta in 0.1f64..5.0,
        n in 1usize..200,
        x0 in 0.1f64..10.0,
        mean in 0.01f64..5.0,
        seed in any::<u64>(),
    ) {
        let spec = SimSpec::fixed_beta(rho, beta, n, 64, seed)
            .unwrap()
            .with_x0(x0)
            .with_noise(Noise::Exponential { mean });
        let batch = simulate_paths(&spec).unwrap();
        prop_assert!(batch.flagged.is_empty());
        for o in &batch.outcomes {
            let lower = x0.ln() + o.log_prod_a;
            let upper = (x0 + o.sum_b).ln() + o.log_prod_a;
            let slack = 1e-12 * (1.0 + upper.abs());
            prop_assert!(lower <= o.log_x + slack && o.log_x <= upper + slack);
        }
    }

    #[test]
    fn exact_enumeration_has_zero_error(n in 1usize..12, q in 1u32..3, rho in 0.01f64..1.0, beta in 0.1f64..4.0) {
        let spec = SimSpec::fixed_beta(rho, beta, n, 2, 0).unwrap().with_q(q);
        let e = exact_moment(&spec).unwrap();
        prop_assert_eq!(e.stderr_log, 0.0);
        prop_assert_eq!(e.method, Method::ExactEnumeration);
        // Jensen: E[x^q] ≥ E[x]^q.
        let first = exact_moment(&spec.with_q(1)).unwrap().log_moment;
        prop_assert!(e.log_moment >= q as f64 * first - 1e-12);
    }
}
