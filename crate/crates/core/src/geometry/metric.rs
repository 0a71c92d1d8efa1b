use std::f64::consts::{PI, TAU};
use std::fmt;

use crate::error::{invalid, Result};
use crate::geometry::ScalarFn;

/// Radial warp factor θ0(r) of a revolution chart.
#[derive(Clone)]
pub enum Warp {
    /// θ0(r) = r: flat plane in polar coordinates.
    Flat,
    /// θ0(r) = sin r: unit sphere in geodesic polar coordinates.
    Sphere,
    /// User-supplied warp and its derivative.
    Custom { theta: ScalarFn, theta_prime: ScalarFn },
}

impl Warp {
    pub fn value(&self, r: f64) -> f64 {
        match self {
            Warp::Flat => r,
            Warp::Sphere => r.sin(),
            Warp::Custom { theta, .. } => theta(r),
        }
    }

    pub fn derivative(&self, r: f64) -> f64 {
        match self {
            Warp::Flat => 1.0,
            Warp::Sphere => r.cos(),
            Warp::Custom { theta_prime, .. } => theta_prime(r),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Warp::Flat => "flat",
            Warp::Sphere => "sphere",
            Warp::Custom { .. } => "custom",
        }
    }
}

impl fmt::Debug for Warp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// How the warp is built.
#[derive(Debug, Clone)]
pub enum MetricKind {
    Radial(Warp),
    /// θ = θ0(r)(1 + ε cos(mode·φ) b(r)), with b a bump vanishing at both rings.
    Perturbed {
        warp: Warp,
        epsilon: f64,
        mode: u32,
    },
}

/// Which rings carry a homogeneous Dirichlet condition. A ring without one
/// gets a zero-flux face.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BoundarySpec {
    pub inner_dirichlet: bool,
    pub outer_dirichlet: bool,
}

impl BoundarySpec {
    pub const OUTER: Self = Self { inner_dirichlet: false, outer_dirichlet: true };
    pub const BOTH: Self = Self { inner_dirichlet: true, outer_dirichlet: true };
}

/// Two-dimensional metric dr² + θ(r, φ)² dφ² on [r_min, r_max] × [0, 2π).
#[derive(Debug, Clone)]
pub struct RevolutionMetric {
    r_min: f64,
    r_max: f64,
    warp: Warp,
    epsilon: f64,
    mode: u32,
    boundary: BoundarySpec,
}

/// Positivity is checked on a grid of this many points per direction.
const POSITIVITY_SAMPLES: usize = 257;

pub fn make_revolution_metric(
    kind: MetricKind,
    r_range: (f64, f64),
    boundary: BoundarySpec,
) -> Result<RevolutionMetric> {
    let (r_min, r_max) = r_range;
    if !(r_min >= 0.0 && r_max > r_min && r_max.is_finite()) {
        return Err(invalid("r_range", format!("need 0 <= r_min < r_max, got [{r_min}, {r_max}]")));
    }
    if !boundary.inner_dirichlet && !boundary.outer_dirichlet {
        return Err(invalid("boundary", "at least one ring must carry a Dirichlet condition"));
    }
    let (warp, epsilon, mode) = match kind {
        MetricKind::Radial(w) => (w, 0.0, 0),
        MetricKind::Perturbed { warp, epsilon, mode } => {
            if !epsilon.is_finite() || epsilon.abs() >= 1.0 {
                return Err(invalid(
                    "epsilon",
                    format!("perturbation amplitude must satisfy |eps| < 1, got {epsilon}"),
                ));
            }
            (warp, epsilon, mode)
        }
    };
    let metric = RevolutionMetric { r_min, r_max, warp, epsilon, mode, boundary };
    for i in 0..POSITIVITY_SAMPLES {
        let r = r_min + (r_max - r_min) * i as f64 / (POSITIVITY_SAMPLES - 1) as f64;
        if r == 0.0 {
            continue;
        }
        for j in 0..POSITIVITY_SAMPLES {
            let phi = TAU * j as f64 / POSITIVITY_SAMPLES as f64;
            let t = metric.theta(r, phi);
            if !(t > 0.0 && t.is_finite()) {
                return Err(invalid("theta", format!("warp not positive at (r, phi) = ({r}, {phi}): {t}")));
            }
        }
    }
    Ok(metric)
}

impl RevolutionMetric {
    pub fn r_min(&self) -> f64 {
        self.r_min
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    pub fn boundary(&self) -> BoundarySpec {
        self.boundary
    }

    pub fn warp(&self) -> &Warp {
        &self.warp
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn mode(&self) -> u32 {
        self.mode
    }

    /// True iff θ does not depend on φ.
    pub fn is_radial(&self) -> bool {
        self.epsilon == 0.0
    }

    /// Bump b(r) = sin²(π (r − r_min)/(r_max − r_min)).
    pub fn bump(&self, r: f64) -> f64 {
        (PI * (r - self.r_min) / (self.r_max - self.r_min)).sin().powi(2)
    }

    pub fn theta(&self, r: f64, phi: f64) -> f64 {
        let base = self.warp.value(r);
        if self.is_radial() {
            base
        } else {
            let phi = phi.rem_euclid(TAU);
            base * (1.0 + self.epsilon * (self.mode as f64 * phi).cos() * self.bump(r))
        }
    }

    /// ∂θ/∂r for radial metrics (the warp derivative).
    pub fn theta_r_radial(&self, r: f64) -> f64 {
        self.warp.derivative(r)
    }
}
