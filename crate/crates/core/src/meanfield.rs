//! Constant-profile approximation `λ̄(ρ, β) = sup_a [βa²/3 + a log ρ − I(a)]`.
//!
//! Stationary points solve `log ρ = −(2/3)βa + log(a/(1 − a))`; on the line
//! `log ρ = −β/3` with `β > 6` the two outer solutions are `(1 ∓ Δ)/2` with
//! `Δ = tanh(βΔ/6)`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::{find_all_roots, DEFAULT_GRID_POINTS};
use crate::scalar::{lit, sigmoid, Real};
use crate::variational::ModelParams;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeanFieldResult<T> {
    pub a_star: T,
    pub branch_a1: Option<T>,
    pub branch_a2: Option<T>,
    pub lambda_bar: T,
    /// Gap `Δ(β)`, present when the point lies on the transition line.
    pub delta: Option<T>,
    pub on_curve: bool,
}

/// `β` at the end of the mean-field transition line.
pub const MF_CRITICAL_BETA: f64 = 6.0;

/// `−βa²/3 − log(1 − a)`: the functional at a stationary `a`.
pub fn mf_value<T: Real>(a: T, beta: T) -> T {
    -beta * a * a / lit(3.0) - (-a).ln_1p()
}

/// `βa²/3 + a log ρ − I(a)` for any `a ∈ [0, 1]`.
pub fn mf_functional<T: Real>(a: T, params: &ModelParams<T>) -> Result<T> {
    let i = crate::variational::entropy_i(a)?;
    Ok(params.beta * a * a / lit(3.0) + a * params.rho.ln() - i)
}

/// All stationary points in increasing order.
///
/// In `t = logit(a)` the equation reads `t − (2/3)β·sigmoid(t) = log ρ`, so
/// every root lies in `[log ρ, log ρ + 2β/3]`.
pub fn mf_stationary_points<T: Real>(params: &ModelParams<T>) -> Result<Vec<T>> {
    params.validate()?;
    let log_rho = params.rho.ln();
    let slope = lit::<T>(2.0) * params.beta / lit(3.0);
    if slope == T::zero() {
        return Ok(vec![sigmoid(log_rho)]);
    }
    let residual = |t: T| Ok(t - slope * sigmoid(t) - log_rho);
    let tol = T::epsilon() * lit(8.0) * (log_rho.abs() + slope);
    let lo = log_rho - tol;
    let hi = log_rho + slope + tol;
    let roots = find_all_roots(residual, lo, hi, DEFAULT_GRID_POINTS, tol)?;
    let mut out: Vec<T> = roots.roots.into_iter().map(sigmoid).collect();
    out.dedup();
    if out.is_empty() {
        return Err(Error::bracket("mf_stationary_points", "no stationary point found"));
    }
    Ok(out)
}

/// `λ̄(ρ, β)` with branch selection by the side of the line `log ρ = −β/3`.
pub fn mf_lambda<T: Real>(params: &ModelParams<T>) -> Result<MeanFieldResult<T>> {
    let roots = mf_stationary_points(params)?;
    let beta = params.beta;
    let a1 = roots[0];
    let a2 = *roots.last().expect("non-empty");
    let side = params.rho.ln() + beta / lit(3.0);
    let on_line = side.abs() <= T::epsilon() * lit(16.0) * (T::one() + beta);
    let multiple = roots.len() > 1;
    let on_curve = on_line && beta > lit(MF_CRITICAL_BETA);
    let a_star = if !multiple || side > T::zero() || on_curve {
        a2
    } else if side < T::zero() {
        a1
    } else {
        a2
    };
    let delta = if on_curve { Some(mf_gap(beta)?) } else { None };
    Ok(MeanFieldResult {
        a_star,
        branch_a1: multiple.then_some(a1),
        branch_a2: multiple.then_some(a2),
        lambda_bar: mf_value(a_star, beta),
        delta,
        on_curve,
    })
}

/// Positive solution of `Δ = tanh(βΔ/6)` for `β > 6`.
pub fn mf_gap<T: Real>(beta: T) -> Result<T> {
    if !(beta > lit(MF_CRITICAL_BETA)) || !beta.is_finite() {
        return Err(Error::domain("mf_gap", format!("beta must exceed 6, got {beta}")));
    }
    let k = beta / lit(6.0);
    let g = |x: T| x - (k * x).tanh();
    let mut lo: T = lit(1e-14);
    let mut hi = T::one();
    if g(hi) <= T::zero() {
        return Ok(T::one());
    }
    if g(lo) >= T::zero() {
        // β so close to 6 that the root sits below the bracket floor.
        return Ok(lo);
    }
    for _ in 0..200 {
        let mid = (lo + hi) * lit(0.5);
        if !(mid > lo && mid < hi) {
            break;
        }
        if g(mid) < T::zero() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((lo + hi) * lit(0.5))
}

/// `β = −3 log ρ`, the mean-field transition line, for `ρ ≤ e⁻²`.
pub fn mf_phase_curve<T: Real>(rho: T) -> Result<T> {
    let rho_c: T = lit((-2.0f64).exp());
    if !(rho > T::zero() && rho <= rho_c) {
        return Err(Error::domain(
            "mf_phase_curve",
            format!("rho must lie in (0, e^-2], got {rho}"),
        ));
    }
    if rho == rho_c {
        return Ok(lit(MF_CRITICAL_BETA));
    }
    Ok(-lit::<T>(3.0) * rho.ln())
}

/// Jumps of `(∂λ̄/∂ρ, ∂λ̄/∂β)` across the line at `β > 6`.
pub fn mf_derivative_jumps<T: Real>(beta: T) -> Result<(T, T)> {
    let delta = mf_gap(beta)?;
    let rho = (-beta / lit(3.0)).exp();
    Ok((delta / rho, delta / lit(3.0)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(rho: f64, beta: f64) -> ModelParams<f64> {
        ModelParams::new(rho, beta).unwrap()
    }

    #[test]
    fn symmetric_point() {
        let r = mf_lambda(&p(1.0, 0.0)).unwrap();
        assert_eq!(r.a_star, 0.5);
        assert!((r.lambda_bar - std::f64::consts::LN_2).abs() < 1e-15);
    }

    #[test]
    fn critical_point_closed_form() {
        let r = mf_lambda(&p((-2.0f64).exp(), 6.0)).unwrap();
        // Triple root: a = 1/2 up to the cube root of rounding.
        assert!((r.a_star - 0.5).abs() < 1e-4, "{}", r.a_star);
        assert!((r.lambda_bar - (-0.5 + std::f64::consts::LN_2)).abs() < 1e-8);
    }

    #[test]
    fn stationarity_residual() {
        for &(rho, beta) in &[(0.3, 1.0), (0.01, 20.0), (0.05, 12.0), (2.0, 4.0)] {
            let params = p(rho, beta);
            let r = mf_lambda(&params).unwrap();
            let a = r.a_star;
            let res = rho.ln() + 2.0 / 3.0 * beta * a - (a / (1.0 - a)).ln();
            assert!(res.abs() <= 1e-9, "{rho} {beta}: {res}");
        }
    }

    #[test]
    fn selection_maximises_functional() {
        for &(rho, beta) in &[(0.01, 12.0), (0.01, 16.0), (0.001, 19.0), (0.001, 22.0)] {
            let params = p(rho, beta);
            let r = mf_lambda(&params).unwrap();
            for a in mf_stationary_points(&params).unwrap() {
                assert!(mf_value(a, beta) <= r.lambda_bar + 1e-12);
            }
            assert!((mf_functional(r.a_star, &params).unwrap() - r.lambda_bar).abs() < 1e-10);
        }
    }

    #[test]
    fn gap_values() {
        // Bisection on Δ − tanh(1.5Δ) carried out in 50-digit arithmetic.
        assert!((mf_gap(9.0f64).unwrap() - 0.858_559_636_640_110_4).abs() < 1e-8);
        assert!(mf_gap(6.0f64).is_err());
        assert!(mf_gap(5.0f64).is_err());
        assert!(mf_gap(1e4f64).unwrap() > 1.0 - 1e-12);
        let b = 6.0f64 * (1.0 + 1e-6);
        let ratio = mf_gap(b).unwrap() / (3.0f64.sqrt() * (b / 6.0 - 1.0).sqrt());
        assert!((ratio - 1.0).abs() < 1e-5);
    }

    #[test]
    fn phase_curve() {
        assert_eq!(mf_phase_curve((-2.0f64).exp()).unwrap(), 6.0);
        assert!((mf_phase_curve((-3.0f64).exp()).unwrap() - 9.0).abs() < 1e-14);
        assert!(mf_phase_curve(0.2f64).is_err());
        let rho = 0.02f64;
        let h = 1e-6;
        let slope = (mf_phase_curve(rho + h).unwrap() - mf_phase_curve(rho - h).unwrap()) / (2.0 * h);
        assert!((slope + 3.0 / rho).abs() < 1e-6 * 3.0 / rho);
    }

    #[test]
    fn jumps() {
        let (jr, jb) = mf_derivative_jumps(9.0f64).unwrap();
        let delta = mf_gap(9.0f64).unwrap();
        assert!((jb - delta / 3.0).abs() < 1e-15);
        let rho = (-3.0f64).exp();
        assert!((-jr / jb + 3.0 / rho).abs() < 1e-10);
        assert!(mf_derivative_jumps(6.0f64).is_err());
    }

    #[test]
    fn branches_on_line_are_symmetric() {
        let beta = 9.0f64;
        let params = p((-beta / 3.0).exp(), beta);
        let r = mf_lambda(&params).unwrap();
        let (a1, a2) = (r.branch_a1.unwrap(), r.branch_a2.unwrap());
        assert!((a1 + a2 - 1.0).abs() < 1e-12);
        assert!((a2 - a1 - r.delta.unwrap()).abs() < 1e-10);
    }
}
