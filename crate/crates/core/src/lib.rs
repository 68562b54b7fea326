//! Ermakov systems for time-dependent oscillators.
//!
//! The crate solves Pinney's nonlinear equation by several independent
//! constructions, evaluates the Ermakov–Lewis invariant and its relatives,
//! splits the classical angle into dynamical and geometric parts, and
//! provides the matching quantum quantities (Lewis eigenstates, Berry phase,
//! squeezing coefficients). Scenario packs bind all of this to concrete
//! models: minisuperspace cosmology, a generalized XYZ oscillator and
//! Helmholtz waveguide profiles.
//!
//! ```
//! use ermakov::ode::CoefficientSet;
//! use ermakov::pinney::solve_direct;
//!
//! // Constant frequency 2: rho = 2^{-1/2} is stationary.
//! let c = CoefficientSet::constant(4.0);
//! let rho = solve_direct(&c, 0.5f64.sqrt(), 0.0, 1.0, (0.0, 3.0), 1e-10).unwrap();
//! assert!((rho.rho(2.7) - 0.5f64.sqrt()).abs() < 1e-9);
//! ```

pub mod angles;
pub mod error;
pub mod invariants;
pub mod ode;
pub mod pinney;
pub mod quad;
pub mod quantum;
pub mod scenarios;
pub mod specfun;

pub use error::{Error, Result};
