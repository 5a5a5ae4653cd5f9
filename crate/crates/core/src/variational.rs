//! Exact solution of the variational problem for `λ(ρ, β; q)`.
//!
//! The sup over profiles reduces to a one-dimensional search over the
//! boundary value `h1 = h(1)`: stationary values solve `F(h1; ρ) = 2√β`, and
//! the functional evaluated on each stationary profile depends on `h1` only.
//! The order parameter `d = ∫₀¹ f` is an equivalent coordinate through
//! `e^{h1} = (1 + ρ)e^{βd²} − 1`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::{
    find_all_roots, golden_minimize, integrate, integrate_sqrt_weighted, refine_bracket,
    QuadratureSpec, RootSet, DEFAULT_GRID_POINTS,
};
use crate::scalar::{count, lit, sigmoid, softplus, to_f64, Real};

/// Phase-plane coordinates and moment order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModelParams<T> {
    pub rho: T,
    pub beta: T,
    pub q: u32,
}

impl<T: Real> ModelParams<T> {
    pub fn new(rho: T, beta: T) -> Result<Self> {
        Self::with_q(rho, beta, 1)
    }

    pub fn with_q(rho: T, beta: T, q: u32) -> Result<Self> {
        let p = Self { rho, beta, q };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rho > T::zero()) || !self.rho.is_finite() {
            return Err(Error::domain("ModelParams", format!("rho must be positive, got {}", self.rho)));
        }
        if !(self.beta >= T::zero()) || !self.beta.is_finite() {
            return Err(Error::domain(
                "ModelParams",
                format!("beta must be non-negative, got {}", self.beta),
            ));
        }
        if self.q == 0 {
            return Err(Error::domain("ModelParams", "q must be at least 1"));
        }
        Ok(())
    }
}

/// One stationary point of the variational problem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Branch<T> {
    pub h1: T,
    pub d: T,
    pub lambda_value: T,
}

/// Partial derivatives of `λ` evaluated on a single branch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Slopes<T> {
    pub dlambda_drho: T,
    pub dlambda_dbeta: T,
}

/// A second optimal branch tying with the selected one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Coexisting<T> {
    pub branch: Branch<T>,
    pub slopes: Slopes<T>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LyapunovResult<T> {
    pub lambda: T,
    pub selected: Branch<T>,
    pub all_branches: Vec<Branch<T>>,
    pub dlambda_drho: T,
    pub dlambda_dbeta: T,
    /// Set when another branch attains the same value within [`TIE_TOLERANCE`].
    /// The selected branch is then the one with larger `d`, and the
    /// derivatives above are its one-sided values.
    pub coexisting: Option<Coexisting<T>>,
}

/// Optimal profile on a uniform grid of `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OptimizerProfile<T> {
    pub grid: Vec<T>,
    pub h_values: Vec<T>,
    pub f_values: Vec<T>,
    /// `h′(y_k)` from the first integral of the Euler-Lagrange equation.
    pub h_prime_values: Vec<T>,
    pub energy: T,
}

/// Absolute gap in `Λ` below which two branches count as tied.
pub const TIE_TOLERANCE: f64 = 1e-10;

/// Nodes of the direct scan in `d`.
pub const D_SCAN_NODES: usize = 2048;

/// Nodes of a reconstructed profile unless asked otherwise.
pub const DEFAULT_PROFILE_NODES: usize = 512;

fn quad<T: Real>() -> QuadratureSpec {
    QuadratureSpec::precise()
}

/// Large-deviation entropy `x log x + (1 − x) log(1 − x)`.
pub fn entropy_i<T: Real>(x: T) -> Result<T> {
    if !(x >= T::zero() && x <= T::one()) {
        return Err(Error::domain("entropy_i", format!("x must lie in [0, 1], got {x}")));
    }
    let xlogx = |v: T| if v == T::zero() { T::zero() } else { v * v.ln() };
    Ok(xlogx(x) + xlogx(T::one() - x))
}

fn check_h1<T: Real>(op: &'static str, a: T, rho: T) -> Result<()> {
    if !(a >= rho.ln()) {
        return Err(Error::domain(op, format!("need a ≥ log ρ = {}, got {a}", rho.ln())));
    }
    Ok(())
}

/// `U(a) = log((1 + e^a)/(1 + ρ))`, accurate as `a → log ρ`.
pub fn log_ratio<T: Real>(a: T, rho: T) -> T {
    let x = a - rho.ln();
    if x > lit(30.0) {
        return softplus(a) - rho.ln_1p();
    }
    (rho * x.exp_m1() / (T::one() + rho)).ln_1p()
}

/// Inverse of [`log_ratio`]: the `a` with `U(a) = u`.
pub fn a_of_log_ratio<T: Real>(u: T, rho: T) -> T {
    if u > T::one() {
        // ρ + (1 + ρ)(e^u − 1) = (1 + ρ)e^u − 1.
        let c = T::one() + rho;
        return u + rho.ln_1p() + (-(-u).exp() / c).ln_1p();
    }
    (rho + (T::one() + rho) * u.exp_m1()).ln()
}

/// `F(a; ρ) = ∫₀^U (1 + e^a)/((1 + e^a − e^y)√y) dy` with `U = log((1+e^a)/(1+ρ))`.
pub fn big_f<T: Real>(a: T, rho: T) -> Result<T> {
    big_f_with(a, rho, &quad::<T>())
}

pub fn big_f_with<T: Real>(a: T, rho: T, spec: &QuadratureSpec) -> Result<T> {
    if !(rho > T::zero()) {
        return Err(Error::domain("big_F", format!("rho must be positive, got {rho}")));
    }
    check_h1("big_F", a, rho)?;
    let upper = log_ratio(a, rho);
    if upper == T::zero() {
        return Ok(T::zero());
    }
    let l = softplus(a);
    let half = upper * lit(0.5);
    // Lower half: u = √y removes the endpoint singularity.
    let head = integrate_sqrt_weighted(|y: T| -T::one() / (y - l).exp_m1(), half, spec)?;
    // Upper half in z = U − y, where y − L = −log(1 + ρ) − z holds exactly;
    // forming y − L directly would cancel when ρ is small.
    let offset = rho.ln_1p();
    let tail = integrate(
        |z: T| -T::one() / ((-offset - z).exp_m1() * (upper - z).sqrt()),
        T::zero(),
        upper - half,
        spec,
    )?;
    Ok(head + tail)
}

/// Roots of `F(a; ρ) = 2√β` in increasing order of `a`.
///
/// Since `F(a) > 2√U(a)` for `a > log ρ`, every root has `U < β`. The scan
/// runs uniformly in `s = √U` over `[0, √β]`, where the residual changes sign
/// at least once, and maps the roots back to `a`.
pub fn solve_h1<T: Real>(params: &ModelParams<T>) -> Result<RootSet<T>> {
    params.validate()?;
    if !(params.beta > T::zero()) {
        return Err(Error::domain("solve_h1", "beta must be positive"));
    }
    let rho = params.rho;
    let target = lit::<T>(2.0) * params.beta.sqrt();
    let a_of_s = |s: T| a_of_log_ratio(s * s, rho);
    let residual = |s: T| -> Result<T> {
        if s == T::zero() {
            return Ok(-target);
        }
        Ok(big_f(a_of_s(s), rho)? - target)
    };
    let s_max = params.beta.sqrt() * lit(1.0 + 1e-9);
    let tol = T::epsilon() * lit(64.0) * target;
    let in_s = find_all_roots(residual, T::zero(), s_max, DEFAULT_GRID_POINTS, tol)?;
    Ok(RootSet {
        roots: in_s.roots.iter().map(|&s| a_of_s(s)).collect(),
        brackets: in_s.brackets.iter().map(|&(lo, hi)| (a_of_s(lo), a_of_s(hi))).collect(),
    })
}

/// `d = √(U(h1)/β)`.
pub fn d_of_h1<T: Real>(h1: T, params: &ModelParams<T>) -> Result<T> {
    check_h1("d_of_h1", h1, params.rho)?;
    if !(params.beta > T::zero()) {
        return Err(Error::domain("d_of_h1", "beta must be positive"));
    }
    Ok((log_ratio(h1, params.rho) / params.beta).sqrt())
}

/// Inverse of [`d_of_h1`].
pub fn h1_of_d<T: Real>(d: T, params: &ModelParams<T>) -> T {
    a_of_log_ratio(params.beta * d * d, params.rho)
}

/// `Λ(h1) = log(1 + e^{h1}) − β^{−1/2} ∫_{log ρ}^{h1} √(log((1+e^{h1})/(1+e^x))) dx`.
pub fn lambda_of_h1<T: Real>(h1: T, params: &ModelParams<T>) -> Result<T> {
    let rho = params.rho;
    check_h1("lambda_of_h1", h1, rho)?;
    let width = h1 - rho.ln();
    if width == T::zero() {
        return Ok(rho.ln_1p());
    }
    if !(params.beta > T::zero()) {
        return Err(Error::domain("lambda_of_h1", "beta must be positive"));
    }
    // x = h1 − v² keeps the square-root zero at x = h1 smooth.
    let two: T = lit(2.0);
    let l = softplus(h1);
    let integrand = |v: T| {
        let gap = v * v;
        let x = h1 - gap;
        let s = if gap > lit(30.0) {
            l - softplus(x)
        } else {
            (sigmoid(x) * gap.exp_m1()).ln_1p()
        };
        two * v * s.sqrt()
    };
    let integral = integrate(integrand, T::zero(), width.sqrt(), &quad::<T>())?;
    Ok(l - integral / params.beta.sqrt())
}

/// `J(a; ρ) = ∫₀¹ y²/(1 + ρ − e^{a(y² − 1)}) dy`.
pub fn j_integral<T: Real>(a: T, rho: T) -> Result<T> {
    if !(a >= T::zero()) || !(rho > T::zero()) {
        return Err(Error::domain("j_integral", format!("need a ≥ 0 and ρ > 0, got a={a}, ρ={rho}")));
    }
    let c = T::one() + rho;
    integrate(|y: T| y * y / (c - (a * (y * y - T::one())).exp()), T::zero(), T::one(), &quad::<T>())
}

/// `Λ(d) = βd² + log(1 + ρ) − 2β(1 + ρ)d³·J(βd²; ρ)`.
pub fn lambda_of_d<T: Real>(d: T, params: &ModelParams<T>) -> Result<T> {
    if !(d > T::zero() && d < T::one()) {
        return Err(Error::domain("lambda_of_d", format!("d must lie in (0, 1), got {d}")));
    }
    let (rho, beta) = (params.rho, params.beta);
    let a = beta * d * d;
    let j = j_integral(a, rho)?;
    Ok(a + rho.ln_1p() - lit::<T>(2.0) * beta * (T::one() + rho) * d * d * d * j)
}

fn slopes<T: Real>(branch: &Branch<T>, lambda: T, params: &ModelParams<T>) -> Slopes<T> {
    let (rho, beta, d) = (params.rho, params.beta, branch.d);
    Slopes {
        dlambda_drho: d / rho,
        dlambda_dbeta: (beta * d * d + rho.ln_1p() - lambda) / (lit::<T>(2.0) * beta),
    }
}

/// `λ(ρ, β)` for `q = 1`: the largest `Λ` over all stationary branches and
/// the `d → 0` boundary value `log(1 + ρ)`.
pub fn lyapunov<T: Real>(params: &ModelParams<T>) -> Result<LyapunovResult<T>> {
    params.validate()?;
    let (rho, beta) = (params.rho, params.beta);
    if beta == T::zero() {
        let d = rho / (T::one() + rho);
        let branch = Branch {
            h1: rho.ln(),
            d,
            lambda_value: rho.ln_1p(),
        };
        return Ok(LyapunovResult {
            lambda: branch.lambda_value,
            selected: branch,
            all_branches: vec![branch],
            dlambda_drho: T::one() / (T::one() + rho),
            dlambda_dbeta: d * d / lit(3.0),
            coexisting: None,
        });
    }

    let roots = solve_h1(params)?;
    let mut branches = Vec::with_capacity(roots.len());
    for &h1 in &roots.roots {
        branches.push(Branch {
            h1,
            d: d_of_h1(h1, params)?,
            lambda_value: lambda_of_h1(h1, params)?,
        });
    }
    let boundary = Branch {
        h1: rho.ln(),
        d: T::zero(),
        lambda_value: rho.ln_1p(),
    };
    let mut ranked: Vec<Branch<T>> = branches.clone();
    ranked.push(boundary);
    ranked.sort_by(|x, y| {
        y.lambda_value
            .partial_cmp(&x.lambda_value)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(y.d.partial_cmp(&x.d).unwrap_or(std::cmp::Ordering::Equal))
    });
    let best = ranked[0];
    let tie = ranked
        .iter()
        .skip(1)
        .find(|b| (best.lambda_value - b.lambda_value).abs() <= lit(TIE_TOLERANCE));
    let (selected, other) = match tie {
        Some(&b) if b.d > best.d => (b, Some(best)),
        Some(&b) => (best, Some(b)),
        None => (best, None),
    };
    let lambda = selected.lambda_value.max(best.lambda_value);
    let s = slopes(&selected, lambda, params);
    Ok(LyapunovResult {
        lambda,
        selected,
        all_branches: branches,
        dlambda_drho: s.dlambda_drho,
        dlambda_dbeta: s.dlambda_dbeta,
        coexisting: other.map(|b| Coexisting {
            branch: b,
            slopes: slopes(&b, lambda, params),
        }),
    })
}

/// `sup_{d ∈ (0,1)} Λ(d)` by a direct scan plus golden-section refinement.
/// Returns `(d*, λ)`.
pub fn lyapunov_d_scan<T: Real>(params: &ModelParams<T>) -> Result<(T, T)> {
    params.validate()?;
    let n = D_SCAN_NODES;
    let node = |k: usize| count::<T>(k) / count::<T>(n + 1);
    let mut best = (T::zero(), params.rho.ln_1p());
    let mut best_k = 0usize;
    for k in 1..=n {
        let d = node(k);
        let v = lambda_of_d(d, params)?;
        if v > best.1 {
            best = (d, v);
            best_k = k;
        }
    }
    if best_k == 0 {
        return Ok(best);
    }
    let lo = node(best_k - 1).max(lit(1e-12));
    let hi = node(best_k + 1).min(T::one() - lit(1e-12));
    let (d, neg) = golden_minimize(|d| lambda_of_d(d, params).map(|v| -v), lo, hi, lit(1e-12))?;
    if -neg > best.1 {
        best = (d, -neg);
    }
    Ok(best)
}

/// `λ(ρ, β; q) = q·λ(ρ, qβ; 1)`.
pub fn lyapunov_q<T: Real>(params: &ModelParams<T>) -> Result<T> {
    params.validate()?;
    let q = count::<T>(params.q as usize);
    let scaled = ModelParams {
        rho: params.rho,
        beta: params.beta * q,
        q: 1,
    };
    Ok(q * lyapunov(&scaled)?.lambda)
}

/// Optimal profile `h(y)` on `nodes` uniform points of `[0, 1]`.
///
/// With `A = 1 + e^{h1}` and `s(y) = log(A/(1 + e^{h(y)}))` the first integral
/// of the Euler-Lagrange equation integrates to
/// `∫₀^{s} A/((A − e^t)√t) dt = 2√β(1 − y)`,
/// which is solved for `s` at each node; then `h = log(A e^{−s} − 1)`.
pub fn reconstruct_profile<T: Real>(
    branch: &Branch<T>,
    params: &ModelParams<T>,
    nodes: usize,
) -> Result<OptimizerProfile<T>> {
    params.validate()?;
    if nodes < 2 {
        return Err(Error::domain("reconstruct_profile", "need at least 2 nodes"));
    }
    if !(params.beta > T::zero()) {
        return Err(Error::domain("reconstruct_profile", "beta must be positive"));
    }
    let (rho, beta, h1) = (params.rho, params.beta, branch.h1);
    check_h1("reconstruct_profile", h1, rho)?;
    let l = softplus(h1);
    let u_max = log_ratio(h1, rho);
    let two: T = lit(2.0);
    let root_beta = beta.sqrt();
    let spec = quad::<T>();
    let q_of = |s: T| -> Result<T> { integrate_sqrt_weighted(|t: T| -T::one() / (t - l).exp_m1(), s, &spec) };
    let total = q_of(u_max)?;
    let h_of_s = |s: T| (l - s).exp_m1().ln();

    let mut grid = Vec::with_capacity(nodes);
    let mut h_values = Vec::with_capacity(nodes);
    let mut f_values = Vec::with_capacity(nodes);
    let mut h_prime_values = Vec::with_capacity(nodes);
    for k in 0..nodes {
        let y = count::<T>(k) / count::<T>(nodes - 1);
        let s = if k == 0 {
            u_max
        } else if k + 1 == nodes {
            T::zero()
        } else {
            // Scale the target by the attained total so the endpoints match exactly.
            let target = total * (T::one() - y);
            let tol = T::epsilon() * total;
            refine_bracket(
                |s| q_of(s).map(|v| v - target),
                T::zero(),
                u_max,
                -target,
                total - target,
                tol,
            )
            .map_err(|e| match e {
                Error::Bracket { detail, .. } => Error::bracket(
                    "reconstruct_profile",
                    format!("at y = {}: {detail}", to_f64(y)),
                ),
                other => other,
            })?
        };
        let h = if k == 0 {
            rho.ln()
        } else if k + 1 == nodes {
            h1
        } else {
            h_of_s(s)
        };
        grid.push(y);
        h_values.push(h);
        f_values.push(sigmoid(h));
        h_prime_values.push(two * root_beta * s.sqrt());
    }
    Ok(OptimizerProfile {
        grid,
        h_values,
        f_values,
        h_prime_values,
        energy: two * beta * l,
    })
}

impl<T: Real> OptimizerProfile<T> {
    /// `max_k |½h′² + V(h) − E| / |E|` with `V(h) = 2β log(1 + e^h)`.
    pub fn energy_residual(&self, beta: T) -> T {
        let two: T = lit(2.0);
        self.h_values
            .iter()
            .zip(&self.h_prime_values)
            .map(|(&h, &hp)| (hp * hp / two + two * beta * softplus(h) - self.energy).abs())
            .fold(T::zero(), T::max)
            / self.energy.abs()
    }

    /// Largest relative residual of `h″ = −2β·e^h/(1 + e^h)` over interior
    /// nodes, with `h″` from centred second differences.
    pub fn bvp_residual(&self, beta: T) -> T {
        let n = self.grid.len();
        let mut worst = T::zero();
        for k in 1..n.saturating_sub(1) {
            let dy = self.grid[k + 1] - self.grid[k];
            let dy_prev = self.grid[k] - self.grid[k - 1];
            let second = lit::<T>(2.0)
                * ((self.h_values[k + 1] - self.h_values[k]) / dy
                    - (self.h_values[k] - self.h_values[k - 1]) / dy_prev)
                / (dy + dy_prev);
            let rhs = -lit::<T>(2.0) * beta * self.f_values[k];
            worst = worst.max(((second - rhs) / rhs).abs());
        }
        worst
    }
}
