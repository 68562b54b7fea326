//! Special functions: cylinder functions of real order, Hermite
//! polynomials and Gauss–Hermite rules.

mod bessel;
mod hermite;

pub use bessel::{bessel, bessel_deriv, bessel_with_deriv, BesselKind};
pub use hermite::{gauss_hermite, hermite, QuadratureRule, MAX_HERMITE_DEGREE};
