//! Weighted one-dimensional solvers: heat flow with boundary flux, mean exit
//! time and the radial Dirichlet spectrum.

mod exit_time;
mod heat;
mod problem;
mod spectrum;

pub use exit_time::{
    exit_time_curvature_limit, solve_exit_time, solve_exit_time_fv, ExitTime, ExitTimeSolution,
    CURVATURE_OFFSET_DIVISOR, EXIT_TIME_PANELS,
};
pub use heat::{solve_radial_heat, solve_radial_heat_with, FluxTrace, HeatOptions, DEFAULT_STEPS};
pub use problem::{
    dirichlet_face_flux, discretize, quadratic_face_derivative, BoundaryCondition, RadialField, RadialOperator,
    WeightedIntervalProblem, MIN_CELLS,
};
pub use spectrum::{
    radial_dirichlet_spectrum, radial_dirichlet_spectrum_extrapolated, SpectrumResult, CLUSTER_GAP, EIGEN_REL_TOL,
    WITNESS_FLOOR,
};
