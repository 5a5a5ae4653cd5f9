//! Phase structure: the transition curve `β_cr(ρ)`, its critical endpoint,
//! the slope relation along the curve, the critical exponent and the
//! large-`a` asymptotics of `J(a; ρ)`.
//!
//! The exact model and the mean-field model share one description: a
//! stationarity equation `lhs(a; ρ) = level(β)` whose left side is monotone
//! for `ρ > ρ_c` and has a max/min pair below it. [`OrderParameterEquation`]
//! captures that shape and every routine here is generic over it.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::meanfield::mf_value;
use crate::numerics::{
    central_first, central_third, golden_minimize, linear_fit, polylog, refine_bracket,
    LinearFit,
};
use crate::scalar::{count, lit, to_f64, Real};
use crate::variational::{
    big_f, d_of_h1, j_integral, lambda_of_d, lambda_of_h1, log_ratio, ModelParams,
};

/// Stationarity equation `lhs(a; ρ) = level(β)` of a model with a
/// first-order transition line ending at a critical point.
pub trait OrderParameterEquation<T: Real>: Sync {
    fn lhs(&self, a: T, rho: T) -> Result<T>;
    /// Interval of `a` holding the max/min pair of `lhs` for every `ρ` of interest.
    fn a_range(&self, rho: T) -> (T, T);
    fn level_of_beta(&self, beta: T) -> T;
    fn beta_of_level(&self, level: T) -> T;
    /// Order parameter (`d` for the exact model, `a` itself for mean field).
    fn order_parameter(&self, a: T, rho: T, beta: T) -> Result<T>;
    /// Value of the functional on the stationary branch through `a`.
    fn branch_value(&self, a: T, rho: T, beta: T) -> Result<T>;
    /// `(∂/∂ρ, ∂/∂β)` of the branch value up to terms shared by all branches.
    fn jump_terms(&self, a: T, rho: T, beta: T) -> Result<(T, T)>;
    /// `(lo, hi)` with a negative-slope interval at `lo` and none at `hi`.
    fn rho_bracket(&self) -> (T, T);
    /// An `a` above the local minimum with `lhs(a; ρ) > level`.
    fn upper_end(&self, rho: T, level: T) -> Result<T>;
    /// Finite-difference step in `a`.
    fn slope_step(&self) -> T;
    /// `dβ_cr/dρ` at the critical point.
    fn critical_slope(&self, cp: &CriticalPoint<T>) -> T;
}

/// `F(a; ρ) = 2√β`, branch value `Λ(h1)`.
#[derive(Debug, Clone, Copy, Default)]
pub struct ExactModel;

/// `(3/(2a))·(logit a − log ρ) = β`, branch value `λ̄`.
#[derive(Debug, Clone, Copy, Default)]
pub struct MeanFieldModel;

impl<T: Real> OrderParameterEquation<T> for ExactModel {
    fn lhs(&self, a: T, rho: T) -> Result<T> {
        big_f(a, rho)
    }

    fn a_range(&self, rho: T) -> (T, T) {
        let lo = rho.ln();
        (lo + lit(1e-3), lit::<T>(12.0) + lit::<T>(2.0) * lo.abs())
    }

    fn level_of_beta(&self, beta: T) -> T {
        lit::<T>(2.0) * beta.sqrt()
    }

    fn beta_of_level(&self, level: T) -> T {
        level * level / lit(4.0)
    }

    fn order_parameter(&self, a: T, rho: T, beta: T) -> Result<T> {
        d_of_h1(a, &ModelParams { rho, beta, q: 1 })
    }

    fn branch_value(&self, a: T, rho: T, beta: T) -> Result<T> {
        lambda_of_h1(a, &ModelParams { rho, beta, q: 1 })
    }

    fn jump_terms(&self, a: T, rho: T, beta: T) -> Result<(T, T)> {
        let d = self.order_parameter(a, rho, beta)?;
        Ok((d / rho, d * d / lit(2.0)))
    }

    fn rho_bracket(&self) -> (T, T) {
        (lit(0.05), lit(0.3))
    }

    fn upper_end(&self, rho: T, level: T) -> Result<T> {
        let (lo, mut hi) = self.a_range(rho);
        for _ in 0..60 {
            if self.lhs(hi, rho)? > level {
                return Ok(hi);
            }
            hi = lo + (hi - lo) * lit(2.0);
        }
        Err(Error::bracket("upper_end", format!("F stays below {}", to_f64(level))))
    }

    fn slope_step(&self) -> T {
        lit(1e-4)
    }

    fn critical_slope(&self, cp: &CriticalPoint<T>) -> T {
        -T::one() / (cp.rho_c * cp.d_c)
    }
}

impl<T: Real> OrderParameterEquation<T> for MeanFieldModel {
    fn lhs(&self, a: T, rho: T) -> Result<T> {
        if !(a > T::zero() && a < T::one()) {
            return Err(Error::domain("mean-field lhs", format!("a must lie in (0, 1), got {a}")));
        }
        let logit = (a / (T::one() - a)).ln();
        Ok(lit::<T>(1.5) / a * (logit - rho.ln()))
    }

    fn a_range(&self, rho: T) -> (T, T) {
        (rho / (T::one() + rho), T::one() - lit(1e-6))
    }

    fn level_of_beta(&self, beta: T) -> T {
        beta
    }

    fn beta_of_level(&self, level: T) -> T {
        level
    }

    fn order_parameter(&self, a: T, _rho: T, _beta: T) -> Result<T> {
        Ok(a)
    }

    fn branch_value(&self, a: T, _rho: T, beta: T) -> Result<T> {
        Ok(mf_value(a, beta))
    }

    fn jump_terms(&self, a: T, rho: T, _beta: T) -> Result<(T, T)> {
        Ok((a / rho, a * a / lit(3.0)))
    }

    fn rho_bracket(&self) -> (T, T) {
        (lit(0.05), lit(0.3))
    }

    fn upper_end(&self, rho: T, level: T) -> Result<T> {
        let mut gap: T = lit(1e-3);
        for _ in 0..40 {
            let a = T::one() - gap;
            if self.lhs(a, rho)? > level {
                return Ok(a);
            }
            gap = gap * lit(0.1);
            if gap < T::epsilon() {
                break;
            }
        }
        Err(Error::bracket("upper_end", format!("lhs stays below {}", to_f64(level))))
    }

    fn slope_step(&self) -> T {
        lit(1e-4)
    }

    fn critical_slope(&self, cp: &CriticalPoint<T>) -> T {
        -lit::<T>(3.0) / cp.rho_c
    }
}

/// Endpoint of the transition line.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriticalPoint<T> {
    pub rho_c: T,
    pub beta_c: T,
    pub a_c: T,
    pub d_c: T,
    /// Every local minimum of `∂lhs/∂a` at `ρ_c` whose value is zero to
    /// tolerance; `a_c` is the deepest.
    pub inflections: Vec<T>,
}

/// One point of the transition line with its coexisting branches.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhaseCurvePoint<T> {
    pub rho: T,
    pub beta_cr: T,
    pub a1: T,
    pub a2: T,
    pub d1: T,
    pub d2: T,
    pub jump_drho: T,
    pub jump_dbeta: T,
}

/// Local extrema of `lhs(·; ρ)` bounding the three-root region.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CoexistenceWindow<T> {
    pub a_local_max: T,
    pub a_local_min: T,
    pub beta_lo: T,
    pub beta_hi: T,
}

/// Bisection tolerance on `ρ` for the critical point.
pub const RHO_TOLERANCE: f64 = 1e-10;

/// Nodes of the slope scan.
pub const SLOPE_SCAN_NODES: usize = 256;

/// Finite-difference step for `∂³F/∂a³`.
pub const THIRD_DERIVATIVE_STEP: f64 = 1e-2;

fn slope<T: Real, M: OrderParameterEquation<T>>(model: &M, a: T, rho: T) -> Result<T> {
    central_first(|x| model.lhs(x, rho), a, model.slope_step())
}

/// Nodes of the slope scan over `a_range(ρ)`, trimmed by the stencil width.
fn scan_nodes<T: Real, M: OrderParameterEquation<T>>(model: &M, rho: T) -> Vec<T> {
    let (lo, hi) = model.a_range(rho);
    let pad = model.slope_step() * lit(2.0);
    let (lo, hi) = (lo + pad, hi - pad);
    (0..SLOPE_SCAN_NODES)
        .map(|k| lo + (hi - lo) * count::<T>(k) / count::<T>(SLOPE_SCAN_NODES - 1))
        .collect()
}

/// Position and value of the most negative slope of `lhs(·; ρ)`.
pub fn min_slope<T: Real, M: OrderParameterEquation<T>>(model: &M, rho: T) -> Result<(T, T)> {
    let nodes = scan_nodes(model, rho);
    let values: Vec<T> = nodes.iter().map(|&a| slope(model, a, rho)).collect::<Result<_>>()?;
    let k = (0..values.len())
        .min_by(|&i, &j| values[i].partial_cmp(&values[j]).unwrap_or(std::cmp::Ordering::Equal))
        .expect("non-empty scan");
    let lo = nodes[k.saturating_sub(1)];
    let hi = nodes[(k + 1).min(nodes.len() - 1)];
    let x_tol = (hi - lo) * lit(1e-9);
    let (a, v) = golden_minimize(|a| slope(model, a, rho), lo, hi, x_tol)?;
    Ok(if v < values[k] { (a, v) } else { (nodes[k], values[k]) })
}

/// Locates `ρ_c = sup{ρ : ∂lhs/∂a < 0 somewhere}` by bisection, then the
/// inflection `a_c` where the slope minimum touches zero.
pub fn locate_critical_point_for<T, M>(model: &M) -> Result<CriticalPoint<T>>
where
    T: Real,
    M: OrderParameterEquation<T>,
{
    let (mut lo, mut hi) = model.rho_bracket();
    if !(min_slope(model, lo)?.1 < T::zero()) {
        return Err(Error::bracket("locate_critical_point", "no negative slope at the lower bracket end"));
    }
    if min_slope(model, hi)?.1 < T::zero() {
        return Err(Error::bracket("locate_critical_point", "negative slope at the upper bracket end"));
    }
    let tol: T = lit(RHO_TOLERANCE);
    for _ in 0..200 {
        if hi - lo <= tol {
            break;
        }
        let mid = (lo + hi) * lit(0.5);
        if min_slope(model, mid)?.1 < T::zero() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let rho_c = (lo + hi) * lit(0.5);
    let (a_c, _) = min_slope(model, rho_c)?;
    let level = model.lhs(a_c, rho_c)?;
    let beta_c = model.beta_of_level(level);
    let d_c = model.order_parameter(a_c, rho_c, beta_c)?;

    // Every local minimum of the slope that touches zero at ρ_c.
    let nodes = scan_nodes(model, rho_c);
    let values: Vec<T> = nodes.iter().map(|&a| slope(model, a, rho_c)).collect::<Result<_>>()?;
    let scale = values.iter().fold(T::zero(), |m, v| m.max(v.abs()));
    let touch = scale * lit(1e-3);
    let mut inflections = Vec::new();
    for k in 1..values.len() - 1 {
        if values[k] <= values[k - 1] && values[k] <= values[k + 1] && values[k].abs() <= touch {
            let (a, _) = golden_minimize(|a| slope(model, a, rho_c), nodes[k - 1], nodes[k + 1], lit(1e-12))?;
            inflections.push(a);
        }
    }
    if inflections.is_empty() {
        inflections.push(a_c);
    }
    Ok(CriticalPoint {
        rho_c,
        beta_c,
        a_c,
        d_c,
        inflections,
    })
}

/// Critical point of the exact model.
pub fn locate_critical_point<T: Real>() -> Result<CriticalPoint<T>> {
    locate_critical_point_for(&ExactModel)
}

/// Local max/min of `lhs(·; ρ)` and the `β`-interval with three roots.
pub fn coexistence_window<T, M>(model: &M, rho: T) -> Result<CoexistenceWindow<T>>
where
    T: Real,
    M: OrderParameterEquation<T>,
{
    let (a_i, s_min) = min_slope(model, rho)?;
    if !(s_min < T::zero()) {
        return Err(Error::domain(
            "coexistence_window",
            format!("no three-root region at rho = {}: rho is not below rho_c", to_f64(rho)),
        ));
    }
    let nodes = scan_nodes(model, rho);
    let (lo, hi) = (nodes[0], nodes[nodes.len() - 1]);
    let s_lo = slope(model, lo, rho)?;
    let s_hi = slope(model, hi, rho)?;
    if !(s_lo > T::zero() && s_hi > T::zero()) {
        return Err(Error::bracket("coexistence_window", "slope does not change sign on both sides"));
    }
    let tol = T::epsilon() * lit(64.0);
    let a_max = refine_bracket(|a| slope(model, a, rho), lo, a_i, s_lo, s_min, tol)?;
    let a_min = refine_bracket(|a| slope(model, a, rho), a_i, hi, s_min, s_hi, tol)?;
    Ok(CoexistenceWindow {
        a_local_max: a_max,
        a_local_min: a_min,
        beta_lo: model.beta_of_level(model.lhs(a_min, rho)?),
        beta_hi: model.beta_of_level(model.lhs(a_max, rho)?),
    })
}

fn solve_monotone<T, M>(model: &M, rho: T, level: T, lo: T, hi: T) -> Result<T>
where
    T: Real,
    M: OrderParameterEquation<T>,
{
    let f_lo = model.lhs(lo, rho)? - level;
    let f_hi = model.lhs(hi, rho)? - level;
    if f_lo >= T::zero() {
        return Ok(lo);
    }
    if f_hi <= T::zero() {
        return Ok(hi);
    }
    refine_bracket(|a| model.lhs(a, rho).map(|v| v - level), lo, hi, f_lo, f_hi, T::epsilon() * lit(16.0) * level)
}

/// The point of the transition line at `ρ`: the `β` in the three-root
/// window where the outer branches give equal values.
pub fn trace_point<T, M>(model: &M, rho: T) -> Result<PhaseCurvePoint<T>>
where
    T: Real,
    M: OrderParameterEquation<T>,
{
    let w = coexistence_window(model, rho)?;
    let lower_end = model.a_range(rho).0;
    let branches = |beta: T| -> Result<(T, T)> {
        let level = model.level_of_beta(beta);
        let a_low = solve_monotone(model, rho, level, lower_end, w.a_local_max)?;
        let top = model.upper_end(rho, level)?;
        let a_high = solve_monotone(model, rho, level, w.a_local_min, top)?;
        Ok((a_low, a_high))
    };
    let gap = |beta: T| -> Result<T> {
        let (a_low, a_high) = branches(beta)?;
        Ok(model.branch_value(a_high, rho, beta)? - model.branch_value(a_low, rho, beta)?)
    };
    let g_lo = gap(w.beta_lo)?;
    let g_hi = gap(w.beta_hi)?;
    if !(g_lo < T::zero() && g_hi > T::zero()) {
        return Err(Error::bracket(
            "trace_point",
            format!("branch values do not cross inside the window at rho = {}", to_f64(rho)),
        ));
    }
    let beta_cr = refine_bracket(gap, w.beta_lo, w.beta_hi, g_lo, g_hi, T::epsilon() * lit(4.0))?;
    let (a1, a2) = branches(beta_cr)?;
    let d1 = model.order_parameter(a1, rho, beta_cr)?;
    let d2 = model.order_parameter(a2, rho, beta_cr)?;
    let (r1, b1) = model.jump_terms(a1, rho, beta_cr)?;
    let (r2, b2) = model.jump_terms(a2, rho, beta_cr)?;
    Ok(PhaseCurvePoint {
        rho,
        beta_cr,
        a1,
        a2,
        d1,
        d2,
        jump_drho: r2 - r1,
        jump_dbeta: b2 - b1,
    })
}

/// Traces the transition line over `rho_grid`; points are evaluated in
/// parallel and returned in grid order.
pub fn trace_phase_curve_for<T, M>(model: &M, rho_grid: &[T]) -> Result<Vec<PhaseCurvePoint<T>>>
where
    T: Real,
    M: OrderParameterEquation<T>,
{
    rho_grid.par_iter().map(|&rho| trace_point(model, rho)).collect()
}

pub fn trace_phase_curve<T: Real>(rho_grid: &[T]) -> Result<Vec<PhaseCurvePoint<T>>> {
    trace_phase_curve_for(&ExactModel, rho_grid)
}

/// `(numeric, formula)` slope of `β_cr(ρ)` at each interior point. The
/// numeric slope is the three-point derivative on the (possibly uneven)
/// grid; the formula slope is `−Δ(∂λ/∂ρ)/Δ(∂λ/∂β)`, which is
/// `−2/(ρ(d1 + d2))` for the exact model.
pub fn clausius_clapeyron_check<T: Real>(points: &[PhaseCurvePoint<T>]) -> Result<Vec<(T, T)>> {
    if points.len() < 3 {
        return Err(Error::domain("clausius_clapeyron_check", "need at least 3 points"));
    }
    let mut out = Vec::with_capacity(points.len() - 2);
    for w in points.windows(3) {
        let (p0, p1, p2) = (w[0], w[1], w[2]);
        let hm = p1.rho - p0.rho;
        let hp = p2.rho - p1.rho;
        let numeric = -hp / (hm * (hm + hp)) * p0.beta_cr
            + (hp - hm) / (hm * hp) * p1.beta_cr
            + hm / (hp * (hm + hp)) * p2.beta_cr;
        out.push((numeric, -p1.jump_drho / p1.jump_dbeta));
    }
    Ok(out)
}

/// Transition-line points at relative distances `t_k = (β − β_c)/β_c`
/// from the critical point, placed along the critical tangent.
pub fn near_critical_points<T, M>(model: &M, cp: &CriticalPoint<T>, ts: &[T]) -> Result<Vec<PhaseCurvePoint<T>>>
where
    T: Real,
    M: OrderParameterEquation<T>,
{
    let slope_c = model.critical_slope(cp);
    let grid: Vec<T> = ts.iter().map(|&t| cp.rho_c + t * cp.beta_c / slope_c).collect();
    trace_phase_curve_for(model, &grid)
}

/// Power-law fit `y ≈ γ·|β − β_c|^α`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PowerFit {
    pub alpha: f64,
    pub gamma: f64,
    pub r_squared: f64,
    pub points_used: usize,
    pub window: (f64, f64),
}

/// Default relative window `|β − β_c|/β_c` for exponent fits.
pub const FIT_WINDOW: (f64, f64) = (1e-4, 1e-2);

fn power_fit<T: Real>(
    points: &[PhaseCurvePoint<T>],
    beta_c: T,
    window: (f64, f64),
    y: impl Fn(&PhaseCurvePoint<T>) -> T,
) -> Result<PowerFit> {
    if !(window.0 > 0.0 && window.0 < window.1) {
        return Err(Error::domain(
            "critical_exponent_fit",
            format!("window must satisfy 0 < lo < hi, got [{}, {}]", window.0, window.1),
        ));
    }
    let bc = to_f64(beta_c);
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for p in points {
        let dist = (to_f64(p.beta_cr) - bc).abs();
        let rel = dist / bc;
        let v = to_f64(y(p));
        if rel >= window.0 * (1.0 - 1e-9) && rel <= window.1 * (1.0 + 1e-9) && v > 0.0 {
            xs.push(dist.ln());
            ys.push(v.ln());
        }
    }
    if xs.len() < 3 {
        return Err(Error::domain(
            "critical_exponent_fit",
            format!("only {} points inside the fit window", xs.len()),
        ));
    }
    let LinearFit {
        slope,
        intercept,
        r_squared,
        points,
    } = linear_fit(&xs, &ys)?;
    Ok(PowerFit {
        alpha: slope,
        gamma: intercept.exp(),
        r_squared,
        points_used: points,
        window,
    })
}

/// Fits `a2 − a1 ≈ γ|β − β_c|^α` over the relative window.
pub fn critical_exponent_fit<T: Real>(
    points: &[PhaseCurvePoint<T>],
    cp: &CriticalPoint<T>,
    window: (f64, f64),
) -> Result<PowerFit> {
    power_fit(points, cp.beta_c, window, |p| p.a2 - p.a1)
}

/// Closed-form constants of the exact model at its critical point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CriticalConstants {
    /// `∂³F/∂a³(a_c; ρ_c)`.
    pub third_derivative: f64,
    pub d_const: f64,
    /// `ρ_c·√(U(a_c)/β_c)`, equal to `ρ_c d_c`.
    pub ratio: f64,
    /// Predicted `γ = 2D_c·ratio^{1/2}` for `a2 − a1`.
    pub gamma: f64,
    /// Predicted prefactor of `Δ(∂λ/∂β)`.
    pub c1: f64,
    /// Predicted prefactor of `Δ(∂λ/∂ρ)`.
    pub c2: f64,
}

/// `D_c = (3e^{a_c}/(ρ_c(1 + e^{a_c})U^{3/2}F‴))^{1/2}` and the jump
/// prefactors derived from it, with `F‴` by finite differences.
pub fn critical_constants<T: Real>(cp: &CriticalPoint<T>) -> Result<CriticalConstants> {
    let f3 = central_third(|a| big_f(a, cp.rho_c), cp.a_c, lit(THIRD_DERIVATIVE_STEP))?;
    let third = to_f64(f3);
    if !(third > 0.0) {
        return Err(Error::NonFinite { at: to_f64(cp.a_c) });
    }
    let a_c = to_f64(cp.a_c);
    let rho_c = to_f64(cp.rho_c);
    let beta_c = to_f64(cp.beta_c);
    let u = to_f64(log_ratio(cp.a_c, cp.rho_c));
    let f_c = 1.0 / (1.0 + (-a_c).exp());
    let d_const = (3.0 * f_c / (rho_c * u.powf(1.5) * third)).sqrt();
    let ratio = rho_c * u.sqrt() / beta_c.sqrt();
    Ok(CriticalConstants {
        third_derivative: third,
        d_const,
        ratio,
        gamma: 2.0 * d_const * ratio.sqrt(),
        c1: f_c * d_const * ratio.sqrt() / beta_c,
        c2: f_c * d_const / (ratio.sqrt() * beta_c),
    })
}

/// Power-law fits of both derivative jumps against `β − β_c`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct JumpFit {
    pub dbeta: PowerFit,
    pub drho: PowerFit,
}

impl JumpFit {
    pub fn c1(&self) -> f64 {
        self.dbeta.gamma
    }

    pub fn c2(&self) -> f64 {
        self.drho.gamma
    }
}

pub fn jump_coefficients_near_critical<T: Real>(
    points: &[PhaseCurvePoint<T>],
    cp: &CriticalPoint<T>,
    window: (f64, f64),
) -> Result<JumpFit> {
    Ok(JumpFit {
        dbeta: power_fit(points, cp.beta_c, window, |p| p.jump_dbeta)?,
        drho: power_fit(points, cp.beta_c, window, |p| p.jump_drho)?,
    })
}

/// One row of the `J(a; ρ)` comparison.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AppendixBRow {
    pub a: f64,
    pub rho: f64,
    pub j: f64,
    pub lower: f64,
    pub upper: f64,
    pub expansion: f64,
    /// `a²·|J − expansion|`.
    pub scaled_remainder: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AppendixBReport {
    pub rows: Vec<AppendixBRow>,
    pub bounds_hold: bool,
    pub max_scaled_remainder: f64,
}

/// Polylog lower bound on `J(a; ρ)`.
pub fn j_lower_bound<T: Real>(a: T, rho: T) -> Result<T> {
    let c = T::one() + rho;
    let z = T::one() / c;
    let li2 = polylog(2, z)?;
    let li3 = polylog(3, z)?;
    let li3_tail = polylog(3, (-lit::<T>(2.0) * a).exp() / c)?;
    let a2 = a * a;
    let a3 = a2 * a;
    let inner = a3 - lit::<T>(1.5) * a2 * (rho / c).ln() - lit::<T>(1.5) * a * li2 + lit::<T>(0.75) * li3
        - lit::<T>(0.75) * li3_tail;
    Ok(inner / (lit::<T>(3.0) * a3 * c))
}

/// Elementary upper bound on `J(a; ρ)`.
pub fn j_upper_bound<T: Real>(a: T, rho: T) -> T {
    let c = T::one() + rho;
    (T::one() / lit(3.0) - (rho / (c - (-a).exp())).ln() / (lit::<T>(2.0) * a)) / c
}

/// Leading terms `(1/(1+ρ))·(1/3 − log(ρ/(1+ρ))/(2a))` of `J` for `a ≫ 1`.
pub fn j_expansion<T: Real>(a: T, rho: T) -> T {
    let c = T::one() + rho;
    (T::one() / lit(3.0) - (rho / c).ln() / (lit::<T>(2.0) * a)) / c
}

pub fn appendix_b_checks<T: Real>(a_values: &[T], rho: T) -> Result<AppendixBReport> {
    let mut rows = Vec::with_capacity(a_values.len());
    for &a in a_values {
        if !(a > T::zero()) {
            return Err(Error::domain("appendix_b_checks", format!("a must be positive, got {a}")));
        }
        let j = to_f64(j_integral(a, rho)?);
        let expansion = to_f64(j_expansion(a, rho));
        let af = to_f64(a);
        rows.push(AppendixBRow {
            a: af,
            rho: to_f64(rho),
            j,
            lower: to_f64(j_lower_bound(a, rho)?),
            upper: to_f64(j_upper_bound(a, rho)),
            expansion,
            scaled_remainder: af * af * (j - expansion).abs(),
        });
    }
    let slack = |v: f64| 1e-12 * v.abs().max(1.0);
    Ok(AppendixBReport {
        bounds_hold: rows.iter().all(|r| r.lower <= r.j + slack(r.j) && r.j <= r.upper + slack(r.j)),
        max_scaled_remainder: rows.iter().map(|r| r.scaled_remainder).fold(0.0, f64::max),
        rows,
    })
}

/// `βd² − (2/3)βd³ + d·log(ρ/(1+ρ)) + log(1+ρ)`.
pub fn lambda_cubic<T: Real>(d: T, params: &ModelParams<T>) -> T {
    let (rho, beta) = (params.rho, params.beta);
    beta * d * d - lit::<T>(2.0) / lit(3.0) * beta * d * d * d + d * (rho / (T::one() + rho)).ln() + rho.ln_1p()
}

/// `(β, Λ(d), cubic, βd²·|Λ − cubic|)` over a `β` sweep at fixed `d`.
pub fn cubic_lambda_check<T: Real>(d: T, rho: T, betas: &[T]) -> Result<Vec<(f64, f64, f64, f64)>> {
    betas
        .iter()
        .map(|&beta| {
            let params = ModelParams::new(rho, beta)?;
            let exact = lambda_of_d(d, &params)?;
            let cubic = lambda_cubic(d, &params);
            let a = beta * d * d;
            Ok((to_f64(beta), to_f64(exact), to_f64(cubic), to_f64(a * (exact - cubic).abs())))
        })
        .collect()
}

/// `−(8/3)·log(ρ/(1+ρ))`, the small-`ρ` asymptote of `β_cr`.
pub fn beta_cr_asymptote<T: Real>(rho: T) -> T {
    -lit::<T>(8.0) / lit(3.0) * (rho / (T::one() + rho)).ln()
}
