use std::f64::consts::PI;

use isoflow_core::convergence::{observed_orders, Convergence, ROUNDOFF_FLOOR};
use isoflow_core::geometry::*;
use isoflow_core::quadrature::integrate;
use isoflow_core::radial::*;
use proptest::prelude::*;

fn catalog(kind: u8, n: usize, size: f64) -> TubeProfile {
    match kind {
        0 => make_euclidean_ball_profile(n, size).unwrap(),
        1 => make_spherical_cap_profile(n.max(2), size.min(3.0)).unwrap(),
        _ => make_clifford_tube_profile(0.1 + 0.6 * size / 5.0).unwrap(),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn heat_stays_between_zero_and_one(kind in 0u8..3, n in 1usize..5, size in 0.3f64..5.0, cells in 16usize..128) {
        let p = catalog(kind, n, size).interval_problem();
        let u0 = RadialField::constant(p.x0(), p.x1(), cells, 1.0).unwrap();
        let horizon = 0.2 * (p.x1() - p.x0()).powi(2);
        let (_, tr) = solve_radial_heat(&p, &u0, horizon / 400.0, horizon).unwrap();
        for (lo, hi) in &tr.extremes {
            prop_assert!(*lo >= -1e-12 && *hi <= 1.0 + 1e-12, "({lo}, {hi})");
        }
    }

    #[test]
    fn heat_content_never_grows(kind in 0u8..3, n in 1usize..5, size in 0.3f64..5.0, cells in 16usize..128) {
        let p = catalog(kind, n, size).interval_problem();
        let u0 = RadialField::constant(p.x0(), p.x1(), cells, 1.0).unwrap();
        let horizon = 0.2 * (p.x1() - p.x0()).powi(2);
        let (_, tr) = solve_radial_heat(&p, &u0, horizon / 400.0, horizon).unwrap();
        for w in tr.heat_content.windows(2) {
            prop_assert!(w[1] <= w[0] * (1.0 + 1e-14), "{} -> {}", w[0], w[1]);
        }
    }

    #[test]
    fn exit_time_flux_identity(kind in 0u8..3, n in 1usize..5, size in 0.3f64..5.0, frac in 0.0f64..0.999) {
        let p = catalog(kind, n, size);
        let e = solve_exit_time(&p).unwrap();
        let r = p.inner_radius();
        let rho = frac * r;
        let enclosed = integrate(&|x| p.theta(x), rho, r, 256);
        let lhs = e.psi_prime(rho) * p.theta(rho);
        prop_assert!((lhs - enclosed).abs() <= 1e-10 * (1.0 + enclosed.abs()), "{lhs} vs {enclosed}");
    }

    #[test]
    fn ball_exit_time_matches_closed_form(n in 1usize..7, radius in 0.2f64..4.0, frac in 0.0f64..1.0) {
        let e = solve_exit_time(&make_euclidean_ball_profile(n, radius).unwrap()).unwrap();
        let rho = frac * radius;
        let exact = (radius * radius - (radius - rho).powi(2)) / (2.0 * n as f64);
        prop_assert!((e.psi(rho) - exact).abs() <= 1e-10 * (1.0 + exact));
    }

    #[test]
    fn operator_is_self_adjoint(
        kind in 0u8..3, n in 1usize..5, size in 0.3f64..5.0,
        u in prop::collection::vec(-1.0f64..1.0, 32),
        v in prop::collection::vec(-1.0f64..1.0, 32),
    ) {
        let op = discretize(&catalog(kind, n, size).interval_problem(), 32).unwrap();
        let m = op.masses();
        let (lu, lv) = (op.apply(&u), op.apply(&v));
        let a: f64 = (0..32).map(|i| m[i] * lu[i] * v[i]).sum();
        let b: f64 = (0..32).map(|i| m[i] * u[i] * lv[i]).sum();
        let scale: f64 = (0..32).map(|i| m[i] * (lu[i] * v[i]).abs()).sum::<f64>().max(1.0);
        prop_assert!((a - b).abs() <= 1e-12 * scale, "{a} vs {b}");
    }

    #[test]
    fn schiffer_witnesses_are_nonzero(kind in 0u8..3, n in 1usize..5, size in 0.3f64..5.0) {
        let s = radial_dirichlet_spectrum(&catalog(kind, n, size).interval_problem(), 256, 6).unwrap();
        prop_assert!(s.witnesses_nonzero());
        prop_assert!(s.eigenvalues.windows(2).all(|w| w[0] < w[1]));
    }
}

#[test]
fn ball_exit_time_scheme_is_second_order() {
    let p = make_euclidean_ball_profile(3, 1.0).unwrap().interval_problem();
    // the max-norm field error sits at the focal cell, where the order
    // approaches 2 from below; start where it has passed 1.8
    let errors: Vec<f64> = [128, 256, 512, 1024]
        .iter()
        .map(|&n| {
            let s = solve_exit_time_fv(&p, n).unwrap();
            let flux = (s.flux_at_x0.unwrap() - 1.0 / 3.0).abs();
            let field = s
                .field
                .centers()
                .iter()
                .zip(&s.field.values)
                .map(|(x, v)| (v - (1.0 - (1.0 - x).powi(2)) / 6.0).abs())
                .fold(0.0, f64::max);
            flux.max(field)
        })
        .collect();
    assert!(Convergence::classify(&errors, ROUNDOFF_FLOOR).within(1.8, 2.2), "{:?}", observed_orders(&errors));
}

#[test]
fn ball_heat_flux_is_second_order_under_joint_refinement() {
    // the flux at t = 0.1 against the finest run of the sequence
    let p = make_euclidean_ball_profile(3, 1.0).unwrap().interval_problem();
    let t = 0.1;
    let flux = |n: usize| {
        let u0 = RadialField::constant(0.0, 1.0, n, 1.0).unwrap();
        let (_, tr) = solve_radial_heat(&p, &u0, t / (n as f64 * 1.5625), t).unwrap();
        tr.flux_x0_near(t).unwrap()
    };
    let values: Vec<f64> = [32, 64, 128, 256, 1024].iter().map(|&n| flux(n)).collect();
    let reference = values[4];
    let errors: Vec<f64> = values[..4].iter().map(|v| (v - reference).abs()).collect();
    assert!(Convergence::classify(&errors, ROUNDOFF_FLOOR).within(1.8, 2.2), "{:?}", observed_orders(&errors));
}

#[test]
fn interval_flux_matches_eigenfunction_expansion() {
    let p =
        WeightedIntervalProblem::uniform(0.0, 2.0, BoundaryCondition::Dirichlet, BoundaryCondition::Dirichlet).unwrap();
    let n = 256;
    let t = 0.1;
    let u0 = RadialField::constant(0.0, 2.0, n, 1.0).unwrap();
    let (_, tr) = solve_radial_heat(&p, &u0, t / 4000.0, t).unwrap();
    let c = tr.flux_x0_near(t).unwrap();
    let s = radial_dirichlet_spectrum(&p, n, 50).unwrap();
    let h = 2.0 / n as f64;
    let series: f64 = s
        .eigenvalues
        .iter()
        .zip(&s.eigenfunctions)
        .zip(&s.boundary_fluxes)
        .map(|((l, phi), flux)| (-l * t).exp() * phi.values.iter().sum::<f64>() * h * flux)
        .sum();
    assert!((c - series).abs() < 1e-6, "{c} vs {series}");
    // and the continuum series 2 Σ e^{-k²π²t/4}, odd k
    let exact: f64 = (0..50).map(|j| 2.0 * (-((2 * j + 1) as f64 * PI / 2.0).powi(2) * t).exp()).sum();
    assert!((c - exact).abs() < 1e-3 * exact);
}
