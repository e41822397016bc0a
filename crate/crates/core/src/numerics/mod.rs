//! Scalar numerical kernels: bracketed root finding, Gauss-Kronrod quadrature
//! and monotone cubic Hermite interpolation.

mod pchip;
mod quad;
mod roots;

pub use pchip::MonotoneCubic;
pub use quad::{gauss_kronrod_15, integrate_adaptive, Quadrature};
pub use roots::{solve_increasing, solve_increasing_from, Root};
