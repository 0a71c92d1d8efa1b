use crate::error::{invalid, Error, Result};
use crate::geometry::{estimate_focal_order, FocalType, TubeProfile};
use crate::linalg::solve_tridiagonal;
use crate::quadrature::integrate_panel;
use crate::radial::problem::{discretize, RadialField, WeightedIntervalProblem};

/// Panels of the composite 16-point Gauss–Legendre rule on [0, R].
pub const EXIT_TIME_PANELS: usize = 64;

/// Mean exit time ψ of a tube, evaluated by nested quadrature of
/// ψ'(ρ) = ∫_ρ^R θ / θ(ρ).
#[derive(Debug, Clone)]
pub struct ExitTime {
    profile: TubeProfile,
    edges: Vec<f64>,
    /// ∫_{edge_k}^R θ.
    tail: Vec<f64>,
    /// ψ(edge_k).
    psi_edges: Vec<f64>,
    /// Leading-order slope 1/(d+1) used where θ underflows near a focal end.
    focal_slope: f64,
}

pub fn solve_exit_time(profile: &TubeProfile) -> Result<ExitTime> {
    let r = profile.inner_radius();
    let focal_slope = match profile.focal_type() {
        FocalType::VanishingOrder(_) => {
            let fit = estimate_focal_order(profile)?;
            if !(fit.d_estimate.is_finite() && fit.d_estimate > -1.0) {
                return Err(Error::DegenerateFit { usable: 0, needed: 1 });
            }
            1.0 / (fit.d_estimate + 1.0)
        }
        FocalType::TwoSidedSoul => 0.0,
    };
    let m = EXIT_TIME_PANELS;
    let edges: Vec<f64> = (0..=m).map(|k| r * k as f64 / m as f64).collect();
    let theta = |x: f64| profile.theta(x);
    let mut tail = vec![0.0; m + 1];
    for k in (0..m).rev() {
        tail[k] = tail[k + 1] + integrate_panel(&theta, edges[k], edges[k + 1]);
    }
    let mut et = ExitTime { profile: profile.clone(), edges, tail, psi_edges: vec![0.0; m + 1], focal_slope };
    for k in 0..m {
        let (a, b) = (et.edges[k], et.edges[k + 1]);
        let piece = integrate_panel(&|s| et.psi_prime(s), a, b);
        et.psi_edges[k + 1] = et.psi_edges[k] + piece;
    }
    if et.psi_edges.iter().any(|v| !v.is_finite()) {
        return Err(invalid("profile", "exit-time quadrature produced non-finite values"));
    }
    Ok(et)
}

impl ExitTime {
    pub fn inner_radius(&self) -> f64 {
        self.profile.inner_radius()
    }

    fn panel(&self, rho: f64) -> usize {
        let m = self.edges.len() - 1;
        ((rho / self.inner_radius() * m as f64).floor() as usize).min(m - 1)
    }

    /// ∫_ρ^R θ.
    pub fn enclosed(&self, rho: f64) -> f64 {
        let k = self.panel(rho);
        let theta = |x: f64| self.profile.theta(x);
        self.tail[k + 1] + integrate_panel(&theta, rho, self.edges[k + 1])
    }

    pub fn psi_prime(&self, rho: f64) -> f64 {
        let r = self.inner_radius();
        let th = self.profile.theta(rho);
        let q = self.enclosed(rho) / th;
        if th > 0.0 && q.is_finite() {
            q
        } else {
            self.focal_slope * (r - rho)
        }
    }

    /// ψ'' = −1 + η ψ'.
    pub fn psi_second(&self, rho: f64) -> f64 {
        let th = self.profile.theta(rho);
        if !(th > 0.0) {
            return -self.focal_slope;
        }
        -1.0 - self.profile.theta_prime(rho) / th * self.psi_prime(rho)
    }

    pub fn psi(&self, rho: f64) -> f64 {
        let rho = rho.clamp(0.0, self.inner_radius());
        let k = self.panel(rho);
        self.psi_edges[k] + integrate_panel(&|s| self.psi_prime(s), self.edges[k], rho)
    }

    /// ψ at the soul, its maximum.
    pub fn max_value(&self) -> f64 {
        *self.psi_edges.last().expect("at least one panel")
    }

    /// ψ sampled at the cell centres of an `n`-cell grid on [0, R].
    pub fn to_field(&self, n: usize) -> Result<RadialField> {
        RadialField::from_fn(0.0, self.inner_radius(), n, |x| self.psi(x))
    }
}

/// Offsets R − {4ε, 2ε, ε} with ε = R/64.
pub const CURVATURE_OFFSET_DIVISOR: f64 = 64.0;

/// Largest admissible gap between the two first-level Richardson estimates.
const DIVERGENCE_GAP: f64 = 0.05;

/// Limit of ψ''(ρ) as ρ → R from three nested offsets and two Richardson
/// levels (first-order error removed, then second-order).
pub fn exit_time_curvature_limit(profile: &TubeProfile) -> Result<f64> {
    let et = solve_exit_time(profile)?;
    let r = et.inner_radius();
    let eps = r / CURVATURE_OFFSET_DIVISOR;
    let g4 = et.psi_second(r - 4.0 * eps);
    let g2 = et.psi_second(r - 2.0 * eps);
    let g1 = et.psi_second(r - eps);
    let a = 2.0 * g1 - g2;
    let b = 2.0 * g2 - g4;
    let mu = (4.0 * a - b) / 3.0;
    let estimates = vec![g4, g2, g1, b, a, mu];
    if estimates.iter().any(|v| !v.is_finite()) || (a - b).abs() > DIVERGENCE_GAP {
        return Err(Error::ExtrapolationDiverged { estimates });
    }
    Ok(mu)
}

/// Finite-volume exit time with its inward normal derivatives at the
/// Dirichlet ends.
#[derive(Debug, Clone)]
pub struct ExitTimeSolution {
    pub field: RadialField,
    pub flux_at_x0: Option<f64>,
    pub flux_at_x1: Option<f64>,
}

/// Solves the discrete −(1/θ)(θv')' = 1 with the problem's end conditions.
pub fn solve_exit_time_fv(p: &WeightedIntervalProblem, n: usize) -> Result<ExitTimeSolution> {
    if !p.has_dirichlet() {
        return Err(invalid("boundary", "exit time needs at least one Dirichlet end"));
    }
    let op = discretize(p, n)?;
    let mut v = vec![1.0; n];
    solve_tridiagonal(&op.lower, &op.diag, &op.upper, &mut v);
    let (flux_at_x0, flux_at_x1) = op.boundary_fluxes(&v);
    Ok(ExitTimeSolution { field: RadialField::new(p.x0(), p.x1(), v)?, flux_at_x0, flux_at_x1 })
}
