use std::f64::consts::{FRAC_PI_4, TAU};

use isoflow_core::geometry::*;
use proptest::prelude::*;

fn close(a: f64, b: f64, tol: f64) {
    assert!((a - b).abs() <= tol, "{a} vs {b} (tol {tol})");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ball_boundary_drift(n in 1usize..7, radius in 0.2f64..5.0) {
        let p = make_euclidean_ball_profile(n, radius).unwrap();
        prop_assert_eq!(p.theta(0.0), 1.0);
        let eta = p.eta(0.0).unwrap();
        prop_assert!((eta - (n - 1) as f64 / radius).abs() <= 1e-12 * (1.0 + eta.abs()));
    }

    #[test]
    fn cap_boundary_drift(n in 2usize..6, r0 in 0.1f64..3.0) {
        let p = make_spherical_cap_profile(n, r0).unwrap();
        prop_assert_eq!(p.theta(0.0), 1.0);
        let expected = (n - 1) as f64 / r0.tan();
        prop_assert!((p.eta(0.0).unwrap() - expected).abs() <= 1e-12 * (1.0 + expected.abs()));
    }

    #[test]
    fn clifford_boundary_drift(radius in 0.05f64..0.75) {
        let p = make_clifford_tube_profile(radius).unwrap();
        prop_assert_eq!(p.theta(0.0), 1.0);
        let expected = -2.0 * (2.0 * radius).tan();
        prop_assert!((p.eta(0.0).unwrap() - expected).abs() <= 1e-12 * (1.0 + expected.abs()));
    }

    #[test]
    fn focal_order_is_exact(n in 2usize..7, radius in 0.3f64..3.0, r0 in 0.2f64..2.8) {
        let ball = estimate_focal_order(&make_euclidean_ball_profile(n, radius).unwrap()).unwrap();
        prop_assert_eq!(ball.order, (n - 1) as u32);
        let cap = estimate_focal_order(&make_spherical_cap_profile(n, r0).unwrap()).unwrap();
        prop_assert_eq!(cap.order, (n - 1) as u32);
    }

    #[test]
    fn souls_of_catalog_tubes_are_minimal(n in 2usize..6, radius in 0.3f64..3.0, cliff in 0.1f64..0.7) {
        prop_assert!(soul_minimality_check(&make_euclidean_ball_profile(n, radius).unwrap()).unwrap().abs() < 1e-6);
        prop_assert!(soul_minimality_check(&make_spherical_cap_profile(n, 1.0).unwrap()).unwrap().abs() < 1e-6);
        prop_assert!(soul_minimality_check(&make_clifford_tube_profile(cliff).unwrap()).unwrap().abs() < 1e-6);
    }

    #[test]
    fn annulus_soul_expansion(inner in 0.2f64..3.0, width in 0.1f64..3.0) {
        // the middle circle has radius m, so θ_soul(s) = 1 + s/m
        let outer = inner + width;
        let m = 0.5 * (inner + outer);
        let out = soul_minimality_check(&make_annulus_side_profile(inner, outer, AnnulusSide::Outward).unwrap()).unwrap();
        prop_assert!((out - 1.0 / m).abs() < 1e-6 * (1.0 + 1.0 / m));
    }

    #[test]
    fn metric_is_periodic(eps in -0.5f64..0.5, mode in 0u32..5, r in 0.01f64..1.5, phi in 0.0f64..TAU) {
        let m = make_revolution_metric(
            MetricKind::Perturbed { warp: Warp::Sphere, epsilon: eps, mode },
            (1e-3, 1.5),
            BoundarySpec::OUTER,
        )
        .unwrap();
        let (a, b) = (m.theta(r, phi), m.theta(r, phi + TAU));
        if (phi + TAU).rem_euclid(TAU) == phi {
            prop_assert_eq!(a.to_bits(), b.to_bits());
        } else {
            // φ + 2π itself rounds by up to an ulp of 2π, which the mode amplifies
            prop_assert!((a - b).abs() <= 8.0 * f64::EPSILON * (1.0 + mode as f64) * a.abs());
        }
    }
}

#[test]
fn annulus_outward_coefficient() {
    let p = make_annulus_side_profile(1.0, 2.0, AnnulusSide::Outward).unwrap();
    close(soul_minimality_check(&p).unwrap(), 2.0 / 3.0, 1e-6);
    assert!(!p.invariant_violations().is_empty());
}

#[test]
fn clifford_rejects_focal_radius() {
    assert!(make_clifford_tube_profile(FRAC_PI_4).is_err());
}
