//! Exact tube profiles and two-dimensional revolution charts.

mod metric;
mod profile;

pub use metric::{make_revolution_metric, BoundarySpec, MetricKind, RevolutionMetric, Warp};
pub use profile::{
    estimate_focal_order, make_annulus_side_profile, make_clifford_tube_profile, make_euclidean_ball_profile,
    make_spherical_cap_profile, soul_minimality_check, AnnulusSide, FocalFit, FocalType, ScalarFn, TubeProfile,
};
