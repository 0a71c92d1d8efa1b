//! Numerical checks of the constant flow property on isoparametric tubes.
//!
//! Heat flow, mean exit time and Dirichlet spectra on tubes reduce to
//! weighted problems in the distance to the boundary. [`radial`] solves those
//! problems, [`surface`] repeats the computations on two-dimensional
//! revolution charts without assuming symmetry, and [`minimal_surface`]
//! checks that free-boundary minimal surfaces in the unit ball carry the
//! harmonic function (1 − |x|²)/4.

// NaN must fail positivity checks, so `!(x > 0.0)` is intentional.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod convergence;
pub mod error;
pub mod geometry;
pub mod linalg;
pub mod minimal_surface;
pub mod quadrature;
pub mod radial;
pub mod surface;

pub use error::{Error, Result};
