//! Two-dimensional solvers on revolution charts dr² + θ(r, φ)² dφ².
//!
//! Nothing here assumes φ-independence, so the same code certifies the
//! radial reductions on symmetric charts and exposes their failure on
//! perturbed ones.

mod grid;
mod operators;
mod solver;

pub use grid::{SurfaceField, SurfaceGrid, MIN_RESOLUTION};
pub use operators::{
    commutation_residual, laplace_beltrami_apply, level_derivative_check, level_derivative_sup, radialize, LevelCheck,
};
pub use solver::{
    exit_time_2d, solve_heat_2d, solve_heat_2d_with, ExitTime2d, Ring, SurfaceFluxTrace, CG_MAX_ITERATIONS,
    CG_TOLERANCE,
};
