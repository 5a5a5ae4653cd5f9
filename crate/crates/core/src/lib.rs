//! Lyapunov exponents of the linear recursion `x_{i+1} = a_i x_i + b_i` with
//! Brownian-driven multipliers `a_i = 1 + ρ·exp(σW_i − σ²t_i/2)`.
//!
//! The numerical core is generic over [`Real`] (`f32` or `f64`); the aliases
//! below fix it to `f64`. Simulation works in `f64` only.

pub mod error;
pub mod meanfield;
pub mod numerics;
pub mod phase;
pub mod scalar;
pub mod simulate;
pub mod variational;

pub use error::{Error, Result};
pub use scalar::Real;

pub type ModelParams = variational::ModelParams<f64>;
pub type Branch = variational::Branch<f64>;
pub type LyapunovResult = variational::LyapunovResult<f64>;
pub type OptimizerProfile = variational::OptimizerProfile<f64>;
pub type MeanFieldResult = meanfield::MeanFieldResult<f64>;
pub type CriticalPoint = phase::CriticalPoint<f64>;
pub type PhaseCurvePoint = phase::PhaseCurvePoint<f64>;
pub type CoexistenceWindow = phase::CoexistenceWindow<f64>;

pub use simulate::{MomentEstimate, Noise, SimSpec};
