//! Numerical kernels shared by the model layers.

pub mod diff;
pub mod fit;
pub mod polylog;
pub mod quadrature;
pub mod roots;

pub use diff::{central_first, central_second, central_third};
pub use fit::{linear_fit, LinearFit};
pub use polylog::polylog;
pub use quadrature::{
    integrate, integrate_inverse_sqrt_singularity, integrate_sqrt_weighted, QuadratureSpec,
};
pub use roots::{find_all_roots, golden_minimize, refine_bracket, RootSet, DEFAULT_GRID_POINTS};
