//! Acceptance suite: one PASS/FAIL line per criterion.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use lyapexp::meanfield::MF_CRITICAL_BETA;
use lyapexp::phase::*;
use lyapexp::simulate::*;
use lyapexp::variational::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn p(rho: f64, beta: f64) -> ModelParams<f64> {
    ModelParams::new(rho, beta).unwrap()
}

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn beta_zero() -> Outcome {
    let mut worst = 0.0f64;
    for rho in [0.01, 0.1, 0.5, 1.0, 5.0] {
        let lam = lyapunov(&p(rho, 0.0)).map_err(|e| e.to_string())?.lambda;
        worst = worst.max((lam - f64::ln_1p(rho)).abs());
    }
    check(worst <= 1e-10, format!("max |λ − log(1+ρ)| = {worst:.3e}"))
}

fn bounds() -> Outcome {
    let mut worst = f64::NEG_INFINITY;
    for i in 0..20 {
        let rho = 0.01 + 0.99 * i as f64 / 19.0;
        for j in 0..20 {
            let beta = 0.1 + 19.9 * j as f64 / 19.0;
            let lam = lyapunov(&p(rho, beta)).map_err(|e| e.to_string())?.lambda;
            let below = (beta / 3.0 + rho.ln()) - lam;
            let above = lam - (beta / 3.0 + rho.ln_1p());
            worst = worst.max(below).max(above);
        }
    }
    check(worst <= 1e-9, format!("max (bound − λ) signed violation {worst:.3e} over 400 points"))
}

fn critical_point() -> Outcome {
    let cp = locate_critical_point::<f64>().map_err(|e| e.to_string())?;
    let ok = (cp.rho_c - 0.1233).abs() <= 1e-3 && (cp.beta_c - 5.120).abs() <= 1e-2 && (cp.d_c - 0.372).abs() <= 5e-3;
    check(ok, format!("ρ_c = {:.6}, β_c = {:.5}, d_c = {:.5}", cp.rho_c, cp.beta_c, cp.d_c))
}

fn mean_field_critical_point() -> Outcome {
    let cp = locate_critical_point_for::<f64, _>(&MeanFieldModel).map_err(|e| e.to_string())?;
    let dr = (cp.rho_c - (-2.0f64).exp()).abs();
    let db = (cp.beta_c - MF_CRITICAL_BETA).abs();
    check(dr <= 1e-6 && db <= 1e-6, format!("|Δρ_c| = {dr:.2e}, |Δβ_c| = {db:.2e}"))
}

fn clausius_clapeyron() -> Outcome {
    let grid: Vec<f64> = (0..30).map(|k| 0.02 + 0.09 * k as f64 / 29.0).collect();
    let pts = trace_phase_curve(&grid).map_err(|e| e.to_string())?;
    let rows = clausius_clapeyron_check(&pts).map_err(|e| e.to_string())?;
    let worst = rows.iter().map(|(num, formula)| ((num - formula) / formula).abs()).fold(0.0, f64::max);
    check(worst <= 0.01, format!("worst relative slope error {:.3}% over {} interior points", 100.0 * worst, rows.len()))
}

fn critical_exponent() -> Outcome {
    let ts: Vec<f64> = (0..25).map(|k| 10f64.powf(-4.0 + 2.0 * k as f64 / 24.0)).collect();
    let cp = locate_critical_point::<f64>().map_err(|e| e.to_string())?;
    let near = near_critical_points(&ExactModel, &cp, &ts).map_err(|e| e.to_string())?;
    let exact = critical_exponent_fit(&near, &cp, FIT_WINDOW).map_err(|e| e.to_string())?;
    let mf_cp = locate_critical_point_for::<f64, _>(&MeanFieldModel).map_err(|e| e.to_string())?;
    let mf_near = near_critical_points(&MeanFieldModel, &mf_cp, &ts).map_err(|e| e.to_string())?;
    let mf = critical_exponent_fit(&mf_near, &mf_cp, FIT_WINDOW).map_err(|e| e.to_string())?;
    let ok = (exact.alpha - 0.5).abs() <= 0.05 && (mf.alpha - 0.5).abs() <= 0.05;
    check(ok, format!("α = {:.4} (exact), {:.4} (mean field)", exact.alpha, mf.alpha))
}

fn large_beta() -> Outcome {
    let lam = lyapunov(&p(0.2, 200.0)).map_err(|e| e.to_string())?.lambda / 200.0;
    let in_band = lam >= 1.0 / 3.0 + 0.2f64.ln() / 200.0 && lam <= 1.0 / 3.0 + 1.2f64.ln() / 200.0;
    let pts = trace_phase_curve(&[0.005f64, 1e-4, 1e-6]).map_err(|e| e.to_string())?;
    let asym = beta_cr_asymptote(0.005f64);
    let rel = ((pts[0].beta_cr - asym) / asym).abs();
    let last = pts.iter().max_by(|a, b| a.beta_cr.total_cmp(&b.beta_cr)).expect("non-empty");
    let limits = last.d1.abs() <= 0.05 && (last.d2 - 0.75).abs() <= 0.05;
    check(
        in_band && rel <= 0.05 && limits,
        format!(
            "λ/β = {lam:.6}; β_cr(0.005) off asymptote by {:.2}%; at β_cr = {:.2}: d1 = {:.2e}, d2 = {:.4}",
            100.0 * rel,
            last.beta_cr,
            last.d1,
            last.d2
        ),
    )
}

/// `λ(ρ, β; q)` straight from the `q`-moment functional: stationary profiles
/// solve `h″ = −2βq·σ(h)`, `h(0) = log ρ`, `h′(1) = 0`, found by shooting on
/// `g(1) ∈ (0, q)`, and the functional is integrated along each trajectory.
fn q_functional_oracle(rho: f64, beta: f64, q: u32) -> f64 {
    let qf = q as f64;
    let steps = 4000;
    let dt = 1.0 / steps as f64;
    let sigma = |h: f64| 1.0 / (1.0 + (-h).exp());
    let entropy = |x: f64| {
        let t = |v: f64| if v > 0.0 { v * v.ln() } else { 0.0 };
        t(x) + t(1.0 - x)
    };
    let rhs = |s: [f64; 4]| {
        let f = sigma(s[0]);
        [2.0 * beta * s[1], -qf * f, s[1] * s[1], entropy(f)]
    };
    let shoot = |g1: f64| {
        let mut s = [rho.ln(), g1, 0.0, 0.0];
        for _ in 0..steps {
            let k1 = rhs(s);
            let k2 = rhs(std::array::from_fn(|i| s[i] + 0.5 * dt * k1[i]));
            let k3 = rhs(std::array::from_fn(|i| s[i] + 0.5 * dt * k2[i]));
            let k4 = rhs(std::array::from_fn(|i| s[i] + dt * k3[i]));
            s = std::array::from_fn(|i| s[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]));
        }
        (s[1], g1 * rho.ln() + beta * s[2] - qf * s[3])
    };
    let nodes = 400;
    let grid: Vec<f64> = (0..=nodes).map(|k| qf * k as f64 / nodes as f64).collect();
    let mut best = f64::NEG_INFINITY;
    let mut prev = (grid[0], shoot(grid[0]).0);
    for &g in &grid[1..] {
        let r = shoot(g).0;
        if prev.1.signum() != r.signum() {
            let (mut lo, mut hi, mut r_lo) = (prev.0, g, prev.1);
            for _ in 0..80 {
                let mid = 0.5 * (lo + hi);
                let rm = shoot(mid).0;
                if rm.signum() == r_lo.signum() {
                    lo = mid;
                    r_lo = rm;
                } else {
                    hi = mid;
                }
            }
            best = best.max(shoot(0.5 * (lo + hi)).1);
        }
        prev = (g, r);
    }
    best
}

fn q_identity() -> Outcome {
    let mut worst = 0.0f64;
    let mut worst_oracle = 0.0f64;
    for rho in [0.05, 0.2, 0.5] {
        for beta in [0.5, 2.0, 8.0] {
            for q in [2u32, 3, 5] {
                let params = ModelParams::with_q(rho, beta, q).map_err(|e| e.to_string())?;
                let lq = lyapunov_q(&params).map_err(|e| e.to_string())?;
                let scaled = lyapunov(&p(rho, q as f64 * beta)).map_err(|e| e.to_string())?.lambda;
                worst = worst.max((lq - q as f64 * scaled).abs());
                worst_oracle = worst_oracle.max((lq - q_functional_oracle(rho, beta, q)).abs());
            }
        }
    }
    check(
        worst <= 1e-6 && worst_oracle <= 1e-6,
        format!("max |λ_q − qλ(qβ)| = {worst:.2e}; against direct q-functional shooting {worst_oracle:.2e}"),
    )
}

fn euler_lagrange() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(20240607);
    let mut worst_bvp = 0.0f64;
    let mut worst_energy = 0.0f64;
    for _ in 0..5 {
        let rho = rng.random_range(0.01..1.0);
        let beta = rng.random_range(0.5..20.0);
        let params = p(rho, beta);
        let r = lyapunov(&params).map_err(|e| e.to_string())?;
        let prof = reconstruct_profile(&r.selected, &params, 2000).map_err(|e| e.to_string())?;
        worst_bvp = worst_bvp.max(prof.bvp_residual(beta));
        worst_energy = worst_energy.max(prof.energy_residual(beta));
    }
    check(
        worst_bvp <= 1e-4 && worst_energy <= 1e-6,
        format!("BVP residual {worst_bvp:.2e}, energy residual {worst_energy:.2e}"),
    )
}

fn simulator_vs_exact() -> Outcome {
    let mut lines = Vec::new();
    let mut ok = true;
    for (n, q) in [(8usize, 1u32), (12, 1), (14, 1), (8, 2)] {
        let spec = SimSpec::fixed_beta(0.2, 1.0, n, 1_000_000, 42).map_err(|e| e.to_string())?.with_q(q);
        let exact = exact_moment(&spec).map_err(|e| e.to_string())?.log_moment;
        let mc = estimate_moment(&spec).map_err(|e| e.to_string())?;
        let z = (mc.log_moment - exact) / mc.stderr_log;
        ok &= z.abs() <= 4.0;
        lines.push(format!("(n={n},q={q}) z = {z:+.2}"));
    }
    check(ok, lines.join(", "))
}

fn clt() -> Outcome {
    let spec = SimSpec::fixed_beta(0.2, 3.0, 2000, 10_000, 7).map_err(|e| e.to_string())?;
    let plain = clt_check(&spec).map_err(|e| e.to_string())?;
    let noisy = clt_check(&spec.with_noise(Noise::Exponential { mean: 1.0 })).map_err(|e| e.to_string())?;
    check(
        plain.relative_error <= 0.05 && noisy.relative_error <= 0.05,
        format!(
            "variance {:.5} / {:.5} against {:.5} ({:.2}%, {:.2}%)",
            plain.variance,
            noisy.variance,
            plain.target_variance,
            100.0 * plain.relative_error,
            100.0 * noisy.relative_error
        ),
    )
}

fn appendix_b() -> Outcome {
    let mut hold = true;
    let mut worst = 0.0f64;
    for rho in [0.01, 0.05, 0.2] {
        let rep = appendix_b_checks(&[5.0, 10.0, 50.0, 200.0], rho).map_err(|e| e.to_string())?;
        hold &= rep.bounds_hold;
        worst = worst.max(rep.max_scaled_remainder);
    }
    check(hold && worst <= 1.0, format!("sandwich holds: {hold}; max a²|J − expansion| = {worst:.3}"))
}

fn main() {
    let criteria: [(&str, Duration, fn() -> Outcome); 12] = [
        ("1 beta=0 exactness", Duration::from_secs(1), beta_zero),
        ("2 bounds", Duration::from_secs(60), bounds),
        ("3 critical point", Duration::from_secs(120), critical_point),
        ("4 mean-field critical point", Duration::from_secs(10), mean_field_critical_point),
        ("5 Clausius-Clapeyron", Duration::from_secs(300), clausius_clapeyron),
        ("6 critical exponent", Duration::from_secs(300), critical_exponent),
        ("7 large-beta asymptotics", Duration::from_secs(120), large_beta),
        ("8 q-identity", Duration::from_secs(60), q_identity),
        ("9 Euler-Lagrange residual", Duration::from_secs(60), euler_lagrange),
        ("10 simulator vs exact", Duration::from_secs(300), simulator_vs_exact),
        ("11 CLT", Duration::from_secs(120), clt),
        ("12 J(a; rho) sandwich", Duration::from_secs(30), appendix_b),
    ];
    let mut failures = 0;
    for (name, limit, run) in criteria {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|_| Err("panicked".into()));
        let elapsed = start.elapsed();
        let (pass, detail) = match outcome {
            Ok(d) if elapsed <= limit => (true, d),
            Ok(d) => (false, format!("{d}; exceeded {limit:?}")),
            Err(d) => (false, d),
        };
        if !pass {
            failures += 1;
        }
        println!(
            "{} criterion {name}: {detail} [{:.2}s]",
            if pass { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64()
        );
    }
    println!("{} of 12 criteria passed", 12 - failures);
    if failures > 0 {
        std::process::exit(1);
    }
}
