//! Numerical laboratory for the Rosenau equation
//!
//! ```text
//! u_t + u_x + u_xxxxt + (u^{p+1}/(p+1))_x = 0
//! ```
//!
//! * [`spectral`]: periodic grids, the discrete Fourier pair, spectral
//!   derivatives and quadrature.
//! * [`solver`]: Fourier pseudo-spectral RK4 time stepping and the conserved
//!   energy `∫ u² + u_xx² dx`.
//! * [`petviashvili`]: solitary-wave profiles by Petviashvili iteration.
//! * [`elliptic`]: Jacobi elliptic functions and the closed-form periodic
//!   traveling waves of the quadratic equation.
//! * [`validation`]: integral identities, convergence studies and the
//!   two-wave overtaking collision.
//! * [`io`]: CSV/JSON artifact formats.

pub mod elliptic;
pub mod error;
pub mod io;
pub mod petviashvili;
pub mod solver;
pub mod spectral;
pub mod validation;

pub use error::{Error, Result};
