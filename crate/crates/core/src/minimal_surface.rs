//! Surfaces in the unit ball of R³ and the harmonic identity for
//! f = (1 − |x|²)/4: Δf = 1 inside and ∂f/∂ν = 1/2 on the boundary, which
//! holds on free-boundary minimal surfaces.

use std::f64::consts::{FRAC_PI_3, TAU};

use nalgebra::Vector3;

use crate::error::{invalid, Error, Result};

type V3 = Vector3<f64>;

/// Catalog surfaces, all with orthogonal charts (F = 0).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SurfaceKind {
    /// Equatorial unit disk in polar coordinates (u = radius).
    FlatDisk,
    /// a(cosh u cos v, cosh u sin v, u) on |u| ≤ t₀, t₀ tanh t₀ = 1,
    /// a = 1/(t₀ cosh t₀).
    CriticalCatenoid { t0: f64, a: f64 },
    /// Cap of the unit sphere centred at (0, 0, −1), cut by the unit ball
    /// (polar angle u ≤ π/3). Minimal neither in curvature nor in contact
    /// angle.
    SphericalCapControl,
}

/// A catalog surface sampled on a cell-centred grid in u and a uniform
/// periodic grid in v.
#[derive(Debug, Clone)]
pub struct ParametricSurface {
    kind: SurfaceKind,
    u_range: (f64, f64),
    nu: usize,
    nv: usize,
}

/// Root of t tanh t = 1 by bisection on [0.5, 2].
pub fn critical_catenoid_parameter() -> Result<f64> {
    let g = |t: f64| t * t.tanh() - 1.0;
    let (mut lo, mut hi) = (0.5_f64, 2.0_f64);
    if g(lo) * g(hi) > 0.0 {
        return Err(Error::RootFind("t tanh t - 1 does not change sign on [0.5, 2]".into()));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if g(lo) * g(mid) <= 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let t0 = 0.5 * (lo + hi);
    if g(t0).abs() > 1e-14 {
        return Err(Error::RootFind(format!("bisection stalled at t = {t0} (residual {})", g(t0))));
    }
    Ok(t0)
}

fn check_grid(nu: usize, nv: usize) -> Result<()> {
    if nu < 8 || nv < 8 {
        return Err(invalid("grid", format!("need at least 8 x 8 cells, got {nu} x {nv}")));
    }
    Ok(())
}

pub fn make_flat_disk(nu: usize, nv: usize) -> Result<ParametricSurface> {
    check_grid(nu, nv)?;
    Ok(ParametricSurface { kind: SurfaceKind::FlatDisk, u_range: (0.0, 1.0), nu, nv })
}

/// Critical catenoid, with its scaling computed and the free-boundary
/// conditions verified after construction.
pub fn make_critical_catenoid(nu: usize, nv: usize) -> Result<ParametricSurface> {
    check_grid(nu, nv)?;
    let t0 = critical_catenoid_parameter()?;
    let a = 1.0 / (t0 * t0.cosh());
    let s = ParametricSurface { kind: SurfaceKind::CriticalCatenoid { t0, a }, u_range: (-t0, t0), nu, nv };
    let radius_error = s.boundary_radius_error();
    if radius_error > 1e-10 {
        return Err(Error::RootFind(format!("boundary circles miss the unit sphere by {radius_error}")));
    }
    let angle = s.boundary_angle_max();
    if angle > 1e-6 {
        return Err(Error::RootFind(format!("boundary meets the sphere at angle {angle}")));
    }
    Ok(s)
}

pub fn make_spherical_cap_control(nu: usize, nv: usize) -> Result<ParametricSurface> {
    check_grid(nu, nv)?;
    Ok(ParametricSurface { kind: SurfaceKind::SphericalCapControl, u_range: (0.0, FRAC_PI_3), nu, nv })
}

impl ParametricSurface {
    pub fn kind(&self) -> SurfaceKind {
        self.kind
    }

    pub fn name(&self) -> &'static str {
        match self.kind {
            SurfaceKind::FlatDisk => "flat-disk",
            SurfaceKind::CriticalCatenoid { .. } => "critical-catenoid",
            SurfaceKind::SphericalCapControl => "spherical-cap-control",
        }
    }

    pub fn u_range(&self) -> (f64, f64) {
        self.u_range
    }

    pub fn nu(&self) -> usize {
        self.nu
    }

    pub fn nv(&self) -> usize {
        self.nv
    }

    pub fn hu(&self) -> f64 {
        (self.u_range.1 - self.u_range.0) / self.nu as f64
    }

    pub fn hv(&self) -> f64 {
        TAU / self.nv as f64
    }

    /// Whether u = u_min is a coordinate pole rather than a boundary curve.
    pub fn pole_at_start(&self) -> bool {
        !matches!(self.kind, SurfaceKind::CriticalCatenoid { .. })
    }

    /// Whether the surface is expected to be minimal and meet the sphere
    /// orthogonally.
    pub fn is_free_boundary(&self) -> bool {
        !matches!(self.kind, SurfaceKind::SphericalCapControl)
    }

    pub fn point(&self, u: f64, v: f64) -> V3 {
        match self.kind {
            SurfaceKind::FlatDisk => V3::new(u * v.cos(), u * v.sin(), 0.0),
            SurfaceKind::CriticalCatenoid { a, .. } => V3::new(a * u.cosh() * v.cos(), a * u.cosh() * v.sin(), a * u),
            SurfaceKind::SphericalCapControl => V3::new(u.sin() * v.cos(), u.sin() * v.sin(), u.cos() - 1.0),
        }
    }

    /// Analytic ∂x/∂u and ∂x/∂v.
    pub fn tangents(&self, u: f64, v: f64) -> (V3, V3) {
        match self.kind {
            SurfaceKind::FlatDisk => (V3::new(v.cos(), v.sin(), 0.0), V3::new(-u * v.sin(), u * v.cos(), 0.0)),
            SurfaceKind::CriticalCatenoid { a, .. } => (
                V3::new(a * u.sinh() * v.cos(), a * u.sinh() * v.sin(), a),
                V3::new(-a * u.cosh() * v.sin(), a * u.cosh() * v.cos(), 0.0),
            ),
            SurfaceKind::SphericalCapControl => (
                V3::new(u.cos() * v.cos(), u.cos() * v.sin(), -u.sin()),
                V3::new(-u.sin() * v.sin(), u.sin() * v.cos(), 0.0),
            ),
        }
    }

    /// First fundamental form (E, F, G).
    pub fn first_fundamental_form(&self, u: f64, v: f64) -> (f64, f64, f64) {
        let (xu, xv) = self.tangents(u, v);
        (xu.dot(&xu), xu.dot(&xv), xv.dot(&xv))
    }

    fn area_density(&self, u: f64, v: f64) -> f64 {
        let (e, f, g) = self.first_fundamental_form(u, v);
        (e * g - f * f).max(0.0).sqrt()
    }

    pub fn u_center(&self, i: usize) -> f64 {
        self.u_range.0 + (i as f64 + 0.5) * self.hu()
    }

    pub fn v_node(&self, j: usize) -> f64 {
        j as f64 * self.hv()
    }

    /// Checks EG − F² > 0 at every grid node.
    pub fn check_immersion(&self) -> Result<()> {
        for i in 0..self.nu {
            for j in 0..self.nv {
                let (e, f, g) = self.first_fundamental_form(self.u_center(i), self.v_node(j));
                let det = e * g - f * f;
                if !(det > 0.0) {
                    return Err(Error::DegenerateMetric { i, j, det });
                }
            }
        }
        Ok(())
    }

    /// Parameter values of the boundary curves.
    pub fn boundary_u(&self) -> Vec<f64> {
        if self.pole_at_start() {
            vec![self.u_range.1]
        } else {
            vec![self.u_range.0, self.u_range.1]
        }
    }

    /// max | |x| − 1 | over boundary nodes.
    pub fn boundary_radius_error(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for u in self.boundary_u() {
            for j in 0..self.nv {
                worst = worst.max((self.point(u, self.v_node(j)).norm() - 1.0).abs());
            }
        }
        worst
    }

    /// Largest angle (radians) between the outward conormal and the
    /// position vector at boundary nodes; zero iff the surface meets the
    /// sphere orthogonally.
    pub fn boundary_angle_max(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (k, u) in self.boundary_u().into_iter().enumerate() {
            // outward conormal points along +x_u at u_max and −x_u at u_min
            let sign = if self.boundary_u().len() == 2 && k == 0 { -1.0 } else { 1.0 };
            for j in 0..self.nv {
                let v = self.v_node(j);
                let (xu, _) = self.tangents(u, v);
                let conormal = sign * xu;
                let x = self.point(u, v);
                let angle = conormal.cross(&x).norm().atan2(conormal.dot(&x));
                worst = worst.max(angle.abs());
            }
        }
        worst
    }

    /// Max |H| at the cell centres, with second derivatives of the chart
    /// taken by central differences at the grid spacing.
    pub fn mean_curvature_max(&self) -> f64 {
        let (hu, hv) = (self.hu(), self.hv());
        let mut worst: f64 = 0.0;
        for i in 0..self.nu {
            let u = self.u_center(i);
            for j in 0..self.nv {
                let v = self.v_node(j);
                let (xu, xv) = self.tangents(u, v);
                let x = self.point(u, v);
                let xuu = (self.point(u + hu, v) - 2.0 * x + self.point(u - hu, v)) / (hu * hu);
                let xvv = (self.point(u, v + hv) - 2.0 * x + self.point(u, v - hv)) / (hv * hv);
                let xuv = (self.point(u + hu, v + hv) - self.point(u + hu, v - hv) - self.point(u - hu, v + hv)
                    + self.point(u - hu, v - hv))
                    / (4.0 * hu * hv);
                let nrm = xu.cross(&xv);
                let len = nrm.norm();
                if len == 0.0 {
                    continue;
                }
                let n = nrm / len;
                let (e, f, g) = (xu.dot(&xu), xu.dot(&xv), xv.dot(&xv));
                let (l, m, nn) = (xuu.dot(&n), xuv.dot(&n), xvv.dot(&n));
                let h = (e * nn - 2.0 * f * m + g * l) / (2.0 * (e * g - f * f));
                worst = worst.max(h.abs());
            }
        }
        worst
    }

    /// f = (1 − |x|²)/4 at a parameter point.
    pub fn test_function(&self, u: f64, v: f64) -> f64 {
        (1.0 - self.point(u, v).norm_squared()) / 4.0
    }
}

/// Deviations from the harmonic identity on one grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HarmonicResidual {
    /// Parameter spacing in u.
    pub grid_h: f64,
    /// max |Δf − 1| over cells whose stencil stays inside the surface.
    pub interior: f64,
    /// max |∂f/∂ν − 1/2| over boundary nodes, ν the inward conormal.
    pub boundary: f64,
}

/// Discrete check of Δf = 1 and ∂f/∂ν = 1/2 for f = (1 − |x|²)/4, with the
/// conservative Laplace–Beltrami stencil built from E, G and √(EG − F²).
pub fn harmonic_identity_check(s: &ParametricSurface) -> Result<HarmonicResidual> {
    s.check_immersion()?;
    let (nu, nv) = (s.nu(), s.nv());
    let (hu, hv) = (s.hu(), s.hv());
    let f: Vec<f64> = (0..nu)
        .flat_map(|i| (0..nv).map(move |j| (i, j)))
        .map(|(i, j)| s.test_function(s.u_center(i), s.v_node(j)))
        .collect();
    let at = |i: usize, j: usize| f[i * nv + j];
    let u_face = |k: usize| s.u_range().0 + k as f64 * hu;
    // √g/E on u-faces and √g/G on v-faces
    let cu = |k: usize, v: f64| {
        let u = u_face(k);
        let (e, _, _) = s.first_fundamental_form(u, v);
        if e == 0.0 {
            0.0
        } else {
            s.area_density(u, v) / e
        }
    };
    let cv = |u: f64, v: f64| {
        let (_, _, g) = s.first_fundamental_form(u, v);
        s.area_density(u, v) / g
    };
    let first = if s.pole_at_start() { 0 } else { 1 };
    let mut interior: f64 = 0.0;
    for i in first..nu - 1 {
        let u = s.u_center(i);
        for j in 0..nv {
            let v = s.v_node(j);
            let jp = (j + 1) % nv;
            let jm = (j + nv - 1) % nv;
            let outer = cu(i + 1, v) * (at(i + 1, j) - at(i, j));
            let inner = if i == 0 { 0.0 } else { cu(i, v) * (at(i, j) - at(i - 1, j)) };
            let ang = cv(u, v + 0.5 * hv) * (at(i, jp) - at(i, j)) - cv(u, v - 0.5 * hv) * (at(i, j) - at(i, jm));
            let lap = -((outer - inner) / (hu * hu) + ang / (hv * hv)) / s.area_density(u, v);
            interior = interior.max((lap - 1.0).abs());
        }
    }
    let mut boundary: f64 = 0.0;
    let mut ends = vec![(s.u_range().1, nu - 1, nu - 2)];
    if !s.pole_at_start() {
        ends.push((s.u_range().0, 0, 1));
    }
    for (ub, i1, i2) in ends {
        for j in 0..nv {
            let v = s.v_node(j);
            let fb = s.test_function(ub, v);
            // one-sided quadratic through the boundary value and two cells
            let d = (-8.0 * fb + 9.0 * at(i1, j) - at(i2, j)) / (3.0 * hu);
            let (e, _, _) = s.first_fundamental_form(ub, v);
            boundary = boundary.max((d / e.sqrt() - 0.5).abs());
        }
    }
    Ok(HarmonicResidual { grid_h: hu, interior, boundary })
}

/// CSV with header `grid_h,max_interior_residual,max_boundary_residual`.
pub fn residuals_to_csv(rows: &[HarmonicResidual]) -> String {
    let mut out = String::from("grid_h,max_interior_residual,max_boundary_residual\n");
    for r in rows {
        out.push_str(&format!("{:.16e},{:.16e},{:.16e}\n", r.grid_h, r.interior, r.boundary));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catenoid_parameter() {
        let t0 = critical_catenoid_parameter().unwrap();
        assert!((t0 * t0.tanh() - 1.0).abs() < 1e-14);
        assert!((t0 - 1.19968).abs() < 1e-5);
    }

    #[test]
    fn flat_disk_geometry() {
        let d = make_flat_disk(16, 16).unwrap();
        assert!(d.boundary_radius_error() < 1e-15);
        let (e, f, g) = d.first_fundamental_form(0.7, 1.1);
        assert!((e - 1.0).abs() < 1e-15 && f.abs() < 1e-15 && (g - 0.49).abs() < 1e-15);
        assert!(d.mean_curvature_max() < 1e-12);
        assert!(d.boundary_angle_max() < 1e-12);
    }

    #[test]
    fn catenoid_meets_sphere_orthogonally() {
        let c = make_critical_catenoid(32, 32).unwrap();
        assert!(c.boundary_radius_error() < 1e-10);
        assert!(c.boundary_angle_max() < 1e-6);
        assert!(c.check_immersion().is_ok());
    }

    #[test]
    fn catenoid_mean_curvature_shrinks() {
        let a = make_critical_catenoid(32, 32).unwrap().mean_curvature_max();
        let b = make_critical_catenoid(64, 64).unwrap().mean_curvature_max();
        assert!(a < 1e-2, "{a}");
        assert!(a / b > 3.5, "{a} {b}");
    }

    #[test]
    fn control_cap_is_not_free_boundary() {
        let c = make_spherical_cap_control(32, 32).unwrap();
        assert!(c.boundary_radius_error() < 1e-14);
        // contact angle π/6 between conormal and radius, mean curvature 1
        assert!((c.boundary_angle_max() - FRAC_PI_3 / 2.0).abs() < 1e-12);
        assert!((c.mean_curvature_max() - 1.0).abs() < 1e-2);
    }

    #[test]
    fn disk_identity_is_exact() {
        let r = harmonic_identity_check(&make_flat_disk(32, 16).unwrap()).unwrap();
        assert!(r.interior < 1e-10, "{}", r.interior);
        assert!(r.boundary < 1e-10, "{}", r.boundary);
    }

    #[test]
    fn control_residual_approaches_its_supremum() {
        // Δf = cos u on the control cap, so |Δf − 1| tends to 1 − cos(π/3)
        let r = harmonic_identity_check(&make_spherical_cap_control(128, 16).unwrap()).unwrap();
        assert!((r.interior - 0.5).abs() < 0.02, "{}", r.interior);
        assert!((r.boundary - (0.5 - FRAC_PI_3.sin() / 2.0)).abs() < 1e-3, "{}", r.boundary);
    }

    #[test]
    fn rejects_tiny_grids() {
        assert!(make_flat_disk(4, 16).is_err());
        assert!(make_critical_catenoid(16, 2).is_err());
    }

    #[test]
    fn csv_layout() {
        let rows = [HarmonicResidual { grid_h: 0.5, interior: 0.25, boundary: 0.0 }];
        let csv = residuals_to_csv(&rows);
        assert_eq!(
            csv,
            "grid_h,max_interior_residual,max_boundary_residual\n5.0000000000000000e-1,2.5000000000000000e-1,0.0000000000000000e0\n"
        );
    }
}
