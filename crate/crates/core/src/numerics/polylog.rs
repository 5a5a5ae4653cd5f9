//! Real polylogarithms `Li₂` and `Li₃` on `[0, 1]`.
//!
//! For `z ≤ 1/2` the defining series `Σ z^k / k^s` is summed directly. Above
//! that the expansion in `μ = log z`,
//!
//! `Li_s(e^μ) = μ^{s-1}/(s-1)!·(H_{s-1} − log(−μ)) + Σ_{k≠s-1} ζ(s−k) μ^k / k!`,
//!
//! converges geometrically with ratio `|μ|/2π < 0.12`.

use crate::error::{Error, Result};
use crate::scalar::{lit, Real};

const ZETA2: f64 = 1.644_934_066_848_226_4;
const ZETA3: f64 = 1.202_056_903_159_594_3;

/// `ζ(−n)` for `n = 0..=19`; zero at even `n ≥ 2`.
const ZETA_NEGATIVE: [f64; 20] = [
    -0.5,
    -1.0 / 12.0,
    0.0,
    1.0 / 120.0,
    0.0,
    -1.0 / 252.0,
    0.0,
    1.0 / 240.0,
    0.0,
    -1.0 / 132.0,
    0.0,
    691.0 / 32760.0,
    0.0,
    -1.0 / 12.0,
    0.0,
    3617.0 / 8160.0,
    0.0,
    -43867.0 / 14364.0,
    0.0,
    174611.0 / 6600.0,
];

fn direct_series<T: Real>(order: i32, z: T) -> T {
    let mut sum = T::zero();
    let mut power = z;
    let mut k = 1usize;
    while k < 10_000 {
        let kt: T = lit(k as f64);
        let term = power / kt.powi(order);
        sum = sum + term;
        if term <= T::epsilon() * sum * lit(0.25) {
            break;
        }
        power = power * z;
        k += 1;
    }
    sum
}

fn log_expansion<T: Real>(order: i32, z: T) -> T {
    let mu = z.ln();
    let log_neg_mu = (-mu).ln();
    let (mut sum, first_series_k) = match order {
        2 => (lit::<T>(ZETA2) + mu * (T::one() - log_neg_mu), 2usize),
        _ => (
            lit::<T>(ZETA3) + lit::<T>(ZETA2) * mu + mu * mu * lit(0.5) * (lit::<T>(1.5) - log_neg_mu),
            3usize,
        ),
    };
    // ζ(s − k) μ^k / k! for k ≥ s, i.e. ζ(−n) with n = k − s.
    let mut factor = T::one();
    for k in 1..first_series_k {
        factor = factor * mu / lit(k as f64);
    }
    for (n, zeta) in ZETA_NEGATIVE.iter().enumerate() {
        let k = first_series_k + n;
        factor = factor * mu / lit(k as f64);
        sum = sum + lit::<T>(*zeta) * factor;
    }
    sum
}

/// Polylogarithm `Li_order(z)` for `order ∈ {2, 3}` and `z ∈ [0, 1]`.
pub fn polylog<T: Real>(order: u32, z: T) -> Result<T> {
    if order != 2 && order != 3 {
        return Err(Error::domain("polylog", format!("order must be 2 or 3, got {order}")));
    }
    if !(z >= T::zero() && z <= T::one()) {
        return Err(Error::domain("polylog", format!("argument must lie in [0, 1], got {z}")));
    }
    let order = order as i32;
    if z == T::zero() {
        return Ok(T::zero());
    }
    if z == T::one() {
        return Ok(lit(if order == 2 { ZETA2 } else { ZETA3 }));
    }
    if z <= lit(0.5) {
        Ok(direct_series(order, z))
    } else {
        Ok(log_expansion(order, z))
    }
}
