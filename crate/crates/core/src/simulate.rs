//! Direct simulation of `x_{i+1} = a_i x_i + b_i` and exact small-`n`
//! moments.
//!
//! Paths draw from independent ChaCha8 streams keyed by `(seed, path)`: the
//! Brownian increments use stream `2·path` and the additive noise stream
//! `2·path + 1`, so switching the noise on or off leaves the multipliers of
//! every path unchanged. Reductions run over fixed chunks combined in chunk
//! order, which makes every estimate independent of the worker count.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::scalar::softplus;

/// Additive noise `b_i`, i.i.d. and non-negative.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Noise {
    None,
    Constant { value: f64 },
    Exponential { mean: f64 },
    Uniform { upper: f64 },
}

impl Noise {
    pub fn mean(&self) -> f64 {
        match *self {
            Noise::None => 0.0,
            Noise::Constant { value } => value,
            Noise::Exponential { mean } => mean,
            Noise::Uniform { upper } => upper / 2.0,
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match *self {
            Noise::None => true,
            Noise::Constant { value } => value >= 0.0 && value.is_finite(),
            Noise::Exponential { mean } => mean > 0.0 && mean.is_finite(),
            Noise::Uniform { upper } => upper > 0.0 && upper.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::domain("Noise", format!("invalid parameters {self:?}")))
        }
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> f64 {
        match *self {
            Noise::None => 0.0,
            Noise::Constant { value } => value,
            Noise::Exponential { mean } => Exp::new(1.0 / mean).expect("validated").sample(rng) ,
            Noise::Uniform { upper } => upper * rng.random::<f64>(),
        }
    }
}

/// Simulation parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SimSpec {
    pub n: usize,
    pub rho: f64,
    pub sigma: f64,
    pub tau: f64,
    pub x0: f64,
    pub paths: usize,
    pub seed: u64,
    pub noise: Noise,
    pub q: u32,
}

impl SimSpec {
    /// The scaling regime `σ²τ = 2β/n²` with `τ = 1/n`.
    pub fn fixed_beta(rho: f64, beta: f64, n: usize, paths: usize, seed: u64) -> Result<Self> {
        if n == 0 {
            return Err(Error::domain("SimSpec", "n must be positive"));
        }
        if !(beta > 0.0) || !beta.is_finite() {
            return Err(Error::domain("SimSpec", format!("beta must be positive, got {beta}")));
        }
        let spec = Self {
            n,
            rho,
            sigma: (2.0 * beta / n as f64).sqrt(),
            tau: 1.0 / n as f64,
            x0: 1.0,
            paths,
            seed,
            noise: Noise::None,
            q: 1,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_noise(mut self, noise: Noise) -> Self {
        self.noise = noise;
        self
    }

    pub fn with_q(mut self, q: u32) -> Self {
        self.q = q;
        self
    }

    pub fn with_x0(mut self, x0: f64) -> Self {
        self.x0 = x0;
        self
    }

    /// `β = σ²τn²/2`.
    pub fn implied_beta(&self) -> f64 {
        0.5 * self.sigma * self.sigma * self.tau * (self.n as f64).powi(2)
    }

    /// Same `ρ`, `β`, noise and seed at a different horizon.
    pub fn rescaled(&self, n: usize) -> Result<Self> {
        let beta = self.implied_beta();
        let mut s = Self::fixed_beta(self.rho, beta, n, self.paths, self.seed)?;
        s.noise = self.noise;
        s.q = self.q;
        s.x0 = self.x0;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| -> Result<()> {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::domain("SimSpec", format!("{name} must be positive, got {v}")))
            }
        };
        if self.n == 0 {
            return Err(Error::domain("SimSpec", "n must be positive"));
        }
        if !(self.rho >= 0.0) || !self.rho.is_finite() {
            return Err(Error::domain("SimSpec", format!("rho must be non-negative, got {}", self.rho)));
        }
        positive("sigma", self.sigma)?;
        positive("tau", self.tau)?;
        positive("x0", self.x0)?;
        if self.paths == 0 {
            return Err(Error::domain("SimSpec", "paths must be positive"));
        }
        if self.q == 0 {
            return Err(Error::domain("SimSpec", "q must be at least 1"));
        }
        self.noise.validate()
    }
}

/// Terminal state of one path.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PathOutcome {
    pub log_x: f64,
    /// `Σ log a_i`.
    pub log_prod_a: f64,
    /// `Σ b_i`.
    pub sum_b: f64,
    /// Set when the log-state stopped being finite.
    pub overflowed: bool,
}

/// Terminal values of every path, in path order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PathBatch {
    pub outcomes: Vec<PathOutcome>,
    pub flagged: Vec<usize>,
}

impl PathBatch {
    pub fn log_x(&self) -> Vec<f64> {
        self.outcomes.iter().map(|o| o.log_x).collect()
    }
}

fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

/// Runs path `index` of `spec`.
pub fn simulate_path(spec: &SimSpec, index: usize) -> PathOutcome {
    let mut w_rng = stream(spec.seed, 2 * index as u64);
    let mut b_rng = stream(spec.seed, 2 * index as u64 + 1);
    let log_rho = spec.rho.ln();
    let dt_sqrt = spec.tau.sqrt();
    let half_var_rate = 0.5 * spec.sigma * spec.sigma * spec.tau;
    let mut w = 0.0f64;
    let mut log_x = spec.x0.ln();
    let mut log_prod_a = 0.0f64;
    let mut sum_b = 0.0f64;
    for i in 0..spec.n {
        let log_a = softplus(log_rho + spec.sigma * w - half_var_rate * i as f64);
        log_prod_a += log_a;
        log_x += log_a;
        if !matches!(spec.noise, Noise::None) {
            let b = spec.noise.sample(&mut b_rng);
            sum_b += b;
            log_x += (b * (-log_x).exp()).ln_1p();
        }
        let z: f64 = StandardNormal.sample(&mut w_rng);
        w += dt_sqrt * z;
    }
    PathOutcome {
        log_x,
        log_prod_a,
        sum_b,
        overflowed: !log_x.is_finite(),
    }
}

/// Paths per parallel work unit.
pub const CHUNK: usize = 4096;

pub fn simulate_paths(spec: &SimSpec) -> Result<PathBatch> {
    spec.validate()?;
    let outcomes: Vec<PathOutcome> = (0..spec.paths)
        .into_par_iter()
        .with_min_len(CHUNK)
        .map(|k| simulate_path(spec, k))
        .collect();
    let flagged = outcomes
        .iter()
        .enumerate()
        .filter(|(_, o)| o.overflowed)
        .map(|(k, _)| k)
        .collect();
    Ok(PathBatch { outcomes, flagged })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    MonteCarlo,
    ExactEnumeration,
}

/// Estimate of `log E[x_n^q]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MomentEstimate {
    pub log_moment: f64,
    pub stderr_log: f64,
    pub method: Method,
    pub paths_used: usize,
}

#[derive(Debug, Clone, Copy)]
struct ScaledSums {
    max: f64,
    s1: f64,
    s2: f64,
}

impl ScaledSums {
    fn of(values: &[f64]) -> Self {
        let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let (mut s1, mut s2) = (0.0, 0.0);
        for &v in values {
            let e = (v - max).exp();
            s1 += e;
            s2 += e * e;
        }
        Self { max, s1, s2 }
    }

    fn merge(self, other: Self) -> Self {
        if other.max > self.max {
            return other.merge(self);
        }
        let r = (other.max - self.max).exp();
        Self {
            max: self.max,
            s1: self.s1 + other.s1 * r,
            s2: self.s2 + other.s2 * r * r,
        }
    }
}

/// `log((1/N) Σ e^{v_k})` and the delta-method standard error of that
/// logarithm, reduced over fixed chunks in order.
pub fn log_mean_exp(values: &[f64]) -> Result<(f64, f64)> {
    let n = values.len();
    if n < 2 {
        return Err(Error::domain("log_mean_exp", "need at least 2 values"));
    }
    let sums: Vec<ScaledSums> = values.par_chunks(CHUNK).map(ScaledSums::of).collect();
    let total = sums.into_iter().reduce(ScaledSums::merge).expect("non-empty");
    let nf = n as f64;
    let mean = total.s1 / nf;
    let var = ((total.s2 - nf * mean * mean) / (nf - 1.0)).max(0.0);
    Ok((total.max + mean.ln(), (var / nf).sqrt() / mean))
}

/// Monte Carlo estimate of `log E[x_n^q]`.
pub fn estimate_moment(spec: &SimSpec) -> Result<MomentEstimate> {
    spec.validate()?;
    if spec.paths < 2 {
        return Err(Error::domain("estimate_moment", "need at least 2 paths"));
    }
    let batch = simulate_paths(spec)?;
    if let Some(&k) = batch.flagged.first() {
        return Err(Error::NonFinite { at: k as f64 });
    }
    let q = spec.q as f64;
    let values: Vec<f64> = batch.outcomes.iter().map(|o| q * o.log_x).collect();
    let (log_moment, stderr_log) = log_mean_exp(&values)?;
    Ok(MomentEstimate {
        log_moment,
        stderr_log,
        method: Method::MonteCarlo,
        paths_used: spec.paths,
    })
}

/// Largest number of occupation configurations enumerated.
pub const EXACT_BUDGET: u64 = 1 << 20;

fn log_binomial(q: u32, k: u32) -> f64 {
    (1..=k).map(|j| ((q - k + j) as f64).ln() - (j as f64).ln()).sum()
}

/// `log E[x_n^q]` by expanding `∏(1 + ρe^{Z_i})^q` over occupations
/// `c ∈ {0..q}^n`.
///
/// With `Z_i = σW_i − σ²t_i/2`, `E[e^{Σ c_i Z_i}] = exp(½σ²τ(Σ_{ij} c_i c_j min(i, j) − Σ c_i i))`.
/// The quadratic form is accumulated along the enumeration: adding `c_i` at
/// index `i` contributes `c_i²·i + 2c_i·Σ_{j<i} c_j j`.
pub fn exact_moment(spec: &SimSpec) -> Result<MomentEstimate> {
    spec.validate()?;
    if !matches!(spec.noise, Noise::None) {
        return Err(Error::domain("exact_moment", "requires b ≡ 0"));
    }
    let configs = (spec.q as u64 + 1).checked_pow(spec.n as u32).unwrap_or(u64::MAX);
    if configs > EXACT_BUDGET {
        return Err(Error::Budget(format!(
            "exact enumeration needs {configs} configurations (limit {EXACT_BUDGET}); use Monte Carlo"
        )));
    }
    let half_var = 0.5 * spec.sigma * spec.sigma * spec.tau;
    let log_rho = spec.rho.ln();
    let weights: Vec<f64> = (0..=spec.q)
        .map(|c| log_binomial(spec.q, c) + if c == 0 { 0.0 } else { c as f64 * log_rho })
        .collect();

    struct Acc {
        max: f64,
        sum: f64,
    }
    impl Acc {
        fn push(&mut self, v: f64) {
            if v == f64::NEG_INFINITY {
                return;
            }
            if v > self.max {
                self.sum = self.sum * (self.max - v).exp() + 1.0;
                self.max = v;
            } else {
                self.sum += (v - self.max).exp();
            }
        }
    }

    fn walk(i: usize, n: usize, q: u32, weights: &[f64], half_var: f64, log_w: f64, quad: f64, s: f64, acc: &mut Acc) {
        if i == n {
            acc.push(log_w + half_var * quad);
            return;
        }
        let fi = i as f64;
        for c in 0..=q {
            let cf = c as f64;
            let dq = cf * cf * fi + 2.0 * cf * s - cf * fi;
            walk(i + 1, n, q, weights, half_var, log_w + weights[c as usize], quad + dq, s + cf * fi, acc);
        }
    }

    let mut acc = Acc {
        max: f64::NEG_INFINITY,
        sum: 0.0,
    };
    walk(0, spec.n, spec.q, &weights, half_var, 0.0, 0.0, 0.0, &mut acc);
    Ok(MomentEstimate {
        log_moment: spec.q as f64 * spec.x0.ln() + acc.max + acc.sum.ln(),
        stderr_log: 0.0,
        method: Method::ExactEnumeration,
        paths_used: 0,
    })
}

/// One horizon of the law-of-large-numbers ladder.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LlnRung {
    pub n: usize,
    pub mean: f64,
    pub stderr: f64,
    pub deviation: f64,
    pub tolerance: f64,
    pub within: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LlnReport {
    pub target: f64,
    pub rungs: Vec<LlnRung>,
    /// Deviation at the longest horizon is no larger than the worst earlier one.
    pub shrinking: bool,
}

/// Sample mean of `(1/n) log x_n` against `log(1 + ρ)` at `n/8, n/4, n/2, n`
/// with `β` held fixed.
///
/// The tolerance adds to three standard errors the bias bounds
/// `ρβ/(2n(1 + ρ))` from the multiplier drift, `|log x_0|/n` from the start
/// value and, with noise, `log(x_0 + n·E[b])/n` from the sandwich bound.
pub fn lln_check(spec: &SimSpec) -> Result<LlnReport> {
    spec.validate()?;
    let target = spec.rho.ln_1p();
    let beta = spec.implied_beta();
    let mut horizons: Vec<usize> = [8, 4, 2, 1].iter().map(|d| (spec.n / d).max(1)).collect();
    horizons.dedup();
    let mut rungs = Vec::with_capacity(horizons.len());
    for n in horizons {
        let s = spec.rescaled(n)?;
        let batch = simulate_paths(&s)?;
        if let Some(&k) = batch.flagged.first() {
            return Err(Error::NonFinite { at: k as f64 });
        }
        let nf = n as f64;
        let per_step: Vec<f64> = batch.outcomes.iter().map(|o| o.log_x / nf).collect();
        let (mean, sd) = mean_sd(&per_step);
        let stderr = sd / (per_step.len() as f64).sqrt();
        let mut tolerance = 3.0 * stderr + spec.rho * beta / (2.0 * nf * (1.0 + spec.rho)) + spec.x0.ln().abs() / nf;
        if !matches!(spec.noise, Noise::None) {
            tolerance += (spec.x0 + nf * spec.noise.mean()).ln().abs() / nf;
        }
        let deviation = (mean - target).abs();
        rungs.push(LlnRung {
            n,
            mean,
            stderr,
            deviation,
            tolerance,
            within: deviation <= tolerance,
        });
    }
    let (last, earlier) = rungs.split_last().expect("at least one rung");
    let shrinking = earlier.is_empty() || last.deviation <= earlier.iter().map(|r| r.deviation).fold(0.0, f64::max);
    Ok(LlnReport { target, rungs, shrinking })
}

fn mean_sd(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
    (mean, var.sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CltReport {
    pub n: usize,
    pub paths: usize,
    pub mean: f64,
    pub variance: f64,
    pub target_variance: f64,
    pub relative_error: f64,
    /// Largest gap between sorted standardized values and normal quantiles
    /// over the central 98% of the sample.
    pub qq_max_deviation: f64,
}

/// `(2β/3)·ρ²/(1 + ρ)²`.
pub fn clt_variance(rho: f64, beta: f64) -> f64 {
    2.0 * beta / 3.0 * rho * rho / ((1.0 + rho) * (1.0 + rho))
}

/// Empirical law of `(log x_n − n log(1 + ρ))/√n`.
pub fn clt_check(spec: &SimSpec) -> Result<CltReport> {
    spec.validate()?;
    if spec.paths < 2 {
        return Err(Error::domain("clt_check", "need at least 2 paths"));
    }
    let batch = simulate_paths(spec)?;
    if let Some(&k) = batch.flagged.first() {
        return Err(Error::NonFinite { at: k as f64 });
    }
    let nf = spec.n as f64;
    let drift = nf * spec.rho.ln_1p();
    let stats: Vec<f64> = batch.outcomes.iter().map(|o| (o.log_x - drift) / nf.sqrt()).collect();
    let (mean, sd) = mean_sd(&stats);
    let variance = sd * sd;
    let target_variance = clt_variance(spec.rho, spec.implied_beta());
    let mut z: Vec<f64> = stats.iter().map(|v| (v - mean) / sd).collect();
    z.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    let normal = Normal::standard();
    let m = z.len();
    let lo = m / 100;
    let hi = m - lo;
    let qq_max_deviation = (lo..hi)
        .map(|k| (z[k] - normal.inverse_cdf((k as f64 + 0.5) / m as f64)).abs())
        .fold(0.0, f64::max);
    Ok(CltReport {
        n: spec.n,
        paths: spec.paths,
        mean,
        variance,
        target_variance,
        relative_error: if target_variance > 0.0 {
            (variance - target_variance).abs() / target_variance
        } else {
            variance
        },
        qq_max_deviation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(n: usize, paths: usize) -> SimSpec {
        SimSpec::fixed_beta(0.2, 1.0, n, paths, 7).unwrap()
    }

    #[test]
    fn one_step_is_deterministic() {
        let s = spec(1, 4).with_noise(Noise::Constant { value: 0.5 }).with_x0(2.0);
        for k in 0..4 {
            let o = simulate_path(&s, k);
            assert!((o.log_x - (1.2f64 * 2.0 + 0.5).ln()).abs() < 1e-15);
        }
        let e = estimate_moment(&spec(1, 8)).unwrap();
        assert!((e.log_moment - 1.2f64.ln()).abs() < 1e-15);
        assert!(e.stderr_log < 1e-14);
    }

    #[test]
    fn implied_beta_round_trips() {
        let s = SimSpec::fixed_beta(0.3, 2.5, 40, 10, 1).unwrap();
        assert!((s.implied_beta() - 2.5).abs() < 1e-12);
    }

    #[test]
    fn exact_small_cases() {
        let s = spec(2, 2);
        let e = exact_moment(&s).unwrap();
        assert!((e.log_moment - 2.0 * 1.2f64.ln()).abs() < 1e-14);
        assert_eq!(e.stderr_log, 0.0);
        assert_eq!(e.method, Method::ExactEnumeration);

        // Eight-subset enumeration for n = 3.
        let s = spec(3, 2);
        let v = s.sigma * s.sigma * s.tau;
        let rho = 0.2f64;
        let want = 1.0 + 3.0 * rho + rho * rho * (2.0 + v.exp()) + rho.powi(3) * v.exp();
        assert!((exact_moment(&s).unwrap().log_moment - want.ln()).abs() < 1e-14);

        for q in 1..5 {
            let s = spec(1, 2).with_q(q);
            assert!((exact_moment(&s).unwrap().log_moment - q as f64 * 1.2f64.ln()).abs() < 1e-14);
        }
    }

    #[test]
    fn exact_second_moment_two_steps() {
        // E[(1+ρ)²(1+ρe^{Z_1})²] with Z_1 ~ N(−v/2, v): E[e^{Z_1}] = 1, E[e^{2Z_1}] = e^{v}.
        let s = spec(2, 2).with_q(2);
        let v = s.sigma * s.sigma * s.tau;
        let rho = 0.2f64;
        let want = (1.0 + rho).powi(2) * (1.0 + 2.0 * rho + rho * rho * v.exp());
        assert!((exact_moment(&s).unwrap().log_moment - want.ln()).abs() < 1e-14);
    }

    #[test]
    fn exact_budget() {
        let err = exact_moment(&spec(21, 2)).unwrap_err();
        assert!(matches!(err, Error::Budget(_)));
        assert!(exact_moment(&spec(20, 2)).is_ok());
        assert!(exact_moment(&spec(4, 2).with_noise(Noise::Exponential { mean: 1.0 })).is_err());
    }

    #[test]
    fn monotone_without_noise() {
        let s = spec(30, 1);
        let o = simulate_path(&s, 0);
        let prefix: Vec<f64> = (1..=30)
            .map(|n| {
                let mut t = s;
                t.n = n;
                simulate_path(&t, 0).log_x
            })
            .collect();
        assert!(prefix.windows(2).all(|w| w[1] >= w[0]));
        assert_eq!(o.log_x, prefix[29]);
    }

    #[test]
    fn log_mean_exp_matches_direct() {
        let v = [0.1, -0.3, 1.2, 0.0, 2.5];
        let direct = (v.iter().map(|x: &f64| x.exp()).sum::<f64>() / 5.0).ln();
        let (lm, se) = log_mean_exp(&v).unwrap();
        assert!((lm - direct).abs() < 1e-14);
        assert!(se > 0.0);
        assert!(log_mean_exp(&[1.0]).is_err());
    }

    #[test]
    fn rejects_invalid_specs() {
        assert!(SimSpec::fixed_beta(0.2, 0.0, 10, 10, 1).is_err());
        assert!(SimSpec::fixed_beta(0.2, 1.0, 0, 10, 1).is_err());
        assert!(SimSpec::fixed_beta(0.2, 1.0, 10, 0, 1).is_err());
        let s = spec(4, 1);
        assert!(estimate_moment(&s).is_err());
        assert!(spec(4, 4).with_noise(Noise::Exponential { mean: -1.0 }).validate().is_err());
    }

    #[test]
    fn zero_rho_has_no_growth() {
        let mut s = spec(200, 64).with_noise(Noise::Uniform { upper: 1.0 });
        s.rho = 0.0;
        let b = simulate_paths(&s).unwrap();
        for o in &b.outcomes {
            assert!((o.log_x - (1.0 + o.sum_b).ln()).abs() < 1e-10);
            assert_eq!(o.log_prod_a, 0.0);
        }
    }
}
