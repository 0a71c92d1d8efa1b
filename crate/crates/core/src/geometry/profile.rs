use std::f64::consts::{FRAC_PI_4, PI};
use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{invalid, Error, Result};
use crate::linalg::least_squares;
use crate::radial::{BoundaryCondition, WeightedIntervalProblem};

/// Real function of one variable, shareable across threads.
pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Behaviour of the density at the inner radius `R` (the soul side).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FocalType {
    /// θ vanishes at `R` to the given integer order.
    VanishingOrder(u32),
    /// θ(R) > 0; the profile is one side of a two-sided soul and is reflected evenly.
    TwoSidedSoul,
}

/// Which side of a planar annulus a profile describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AnnulusSide {
    /// From the outer circle in towards the middle circle.
    Outward,
    /// From the inner circle out towards the middle circle.
    Inward,
}

#[derive(Clone)]
enum Density {
    Ball { n: usize, radius: f64 },
    Cap { n: usize, cap_radius: f64 },
    Clifford { radius: f64 },
    Annulus { inner: f64, outer: f64, side: AnnulusSide },
    Custom { theta: ScalarFn, theta_prime: Option<ScalarFn> },
}

/// Boundary-normal density θ(ρ) of a tube, ρ ∈ [0, R] measured from the boundary.
#[derive(Clone)]
pub struct TubeProfile {
    dimension: usize,
    inner_radius: f64,
    density: Density,
    focal_type: FocalType,
    label: String,
}

impl fmt::Debug for TubeProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TubeProfile")
            .field("label", &self.label)
            .field("dimension", &self.dimension)
            .field("inner_radius", &self.inner_radius)
            .field("focal_type", &self.focal_type)
            .finish()
    }
}

/// Euclidean ball of radius `R` in dimension `n`: θ(ρ) = (1 − ρ/R)^{n−1}.
pub fn make_euclidean_ball_profile(n: usize, radius: f64) -> Result<TubeProfile> {
    if n < 1 {
        return Err(invalid("n", "dimension must be at least 1"));
    }
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(invalid("R", format!("radius must be positive, got {radius}")));
    }
    let focal_type = if n == 1 { FocalType::TwoSidedSoul } else { FocalType::VanishingOrder((n - 1) as u32) };
    Ok(TubeProfile {
        dimension: n,
        inner_radius: radius,
        density: Density::Ball { n, radius },
        focal_type,
        label: format!("ball(n={n}, R={radius})"),
    })
}

/// Geodesic ball of radius `R0` in the unit sphere Sⁿ.
pub fn make_spherical_cap_profile(n: usize, cap_radius: f64) -> Result<TubeProfile> {
    if n < 2 {
        return Err(invalid("n", "spherical caps need n >= 2"));
    }
    if !(cap_radius > 0.0 && cap_radius < PI) {
        return Err(invalid("R0", format!("cap radius must lie in (0, pi), got {cap_radius}")));
    }
    Ok(TubeProfile {
        dimension: n,
        inner_radius: cap_radius,
        density: Density::Cap { n, cap_radius },
        focal_type: FocalType::VanishingOrder((n - 1) as u32),
        label: format!("cap(n={n}, R0={cap_radius})"),
    })
}

/// One side of the tube of radius `R` around the Clifford torus in S³.
pub fn make_clifford_tube_profile(radius: f64) -> Result<TubeProfile> {
    if !(radius > 0.0 && radius < FRAC_PI_4) {
        return Err(invalid("R", format!("Clifford tube radius must lie in (0, pi/4), got {radius}")));
    }
    Ok(TubeProfile {
        dimension: 3,
        inner_radius: radius,
        density: Density::Clifford { radius },
        focal_type: FocalType::TwoSidedSoul,
        label: format!("clifford(R={radius})"),
    })
}

/// One side of the planar annulus `inner <= |x| <= outer`, seen as a tube over
/// the middle circle. The equidistants on the two sides have different
/// curvature, so this profile is a deliberate non-isoparametric example and
/// fails the θ'(R) = 0 invariant.
pub fn make_annulus_side_profile(inner: f64, outer: f64, side: AnnulusSide) -> Result<TubeProfile> {
    if !(inner > 0.0 && outer > inner && outer.is_finite()) {
        return Err(invalid("annulus", format!("need 0 < inner < outer, got [{inner}, {outer}]")));
    }
    let side_name = match side {
        AnnulusSide::Outward => "outward",
        AnnulusSide::Inward => "inward",
    };
    Ok(TubeProfile {
        dimension: 2,
        inner_radius: 0.5 * (outer - inner),
        density: Density::Annulus { inner, outer, side },
        focal_type: FocalType::TwoSidedSoul,
        label: format!("annulus([{inner}, {outer}], {side_name})"),
    })
}

impl TubeProfile {
    /// User-supplied density. Without `theta_prime`, derivatives use central
    /// differences with step `R·1e-5`.
    pub fn custom(
        dimension: usize,
        inner_radius: f64,
        theta: ScalarFn,
        theta_prime: Option<ScalarFn>,
        focal_type: FocalType,
        label: impl Into<String>,
    ) -> Result<Self> {
        if dimension < 1 {
            return Err(invalid("n", "dimension must be at least 1"));
        }
        if !(inner_radius > 0.0 && inner_radius.is_finite()) {
            return Err(invalid("R", format!("inner radius must be positive, got {inner_radius}")));
        }
        Ok(Self {
            dimension,
            inner_radius,
            density: Density::Custom { theta, theta_prime },
            focal_type,
            label: label.into(),
        })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn inner_radius(&self) -> f64 {
        self.inner_radius
    }

    pub fn focal_type(&self) -> FocalType {
        self.focal_type
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn theta(&self, rho: f64) -> f64 {
        match &self.density {
            Density::Ball { n, radius } => (1.0 - rho / radius).powi(*n as i32 - 1),
            Density::Cap { n, cap_radius } => ((cap_radius - rho).sin() / cap_radius.sin()).powi(*n as i32 - 1),
            Density::Clifford { radius } => (2.0 * (radius - rho)).cos() / (2.0 * radius).cos(),
            Density::Annulus { inner, outer, side } => match side {
                AnnulusSide::Outward => (outer - rho) / outer,
                AnnulusSide::Inward => (inner + rho) / inner,
            },
            Density::Custom { theta, .. } => theta(rho),
        }
    }

    pub fn theta_prime(&self, rho: f64) -> f64 {
        match &self.density {
            Density::Ball { n, radius } => {
                if *n == 1 {
                    0.0
                } else {
                    -((*n - 1) as f64) / radius * (1.0 - rho / radius).powi(*n as i32 - 2)
                }
            }
            Density::Cap { n, cap_radius } => {
                let s = cap_radius - rho;
                -((*n - 1) as f64) * s.cos() * s.sin().powi(*n as i32 - 2) / cap_radius.sin().powi(*n as i32 - 1)
            }
            Density::Clifford { radius } => 2.0 * (2.0 * (radius - rho)).sin() / (2.0 * radius).cos(),
            Density::Annulus { inner, outer, side } => match side {
                AnnulusSide::Outward => -1.0 / outer,
                AnnulusSide::Inward => 1.0 / inner,
            },
            Density::Custom { theta, theta_prime } => match theta_prime {
                Some(d) => d(rho),
                None => self.numeric_derivative(theta.as_ref(), rho),
            },
        }
    }

    fn numeric_derivative(&self, f: &(dyn Fn(f64) -> f64 + Send + Sync), rho: f64) -> f64 {
        let r = self.inner_radius;
        let h = r * 1e-5;
        if rho - h < 0.0 {
            (-3.0 * f(rho) + 4.0 * f(rho + h) - f(rho + 2.0 * h)) / (2.0 * h)
        } else if rho + h > r {
            (3.0 * f(rho) - 4.0 * f(rho - h) + f(rho - 2.0 * h)) / (2.0 * h)
        } else {
            (f(rho + h) - f(rho - h)) / (2.0 * h)
        }
    }

    /// Drift η(ρ) = −θ'(ρ)/θ(ρ), i.e. (n−1) times the mean curvature of the
    /// equidistant at distance ρ from the boundary.
    pub fn eta(&self, rho: f64) -> Result<f64> {
        let r = self.inner_radius;
        if !(0.0..=r).contains(&rho) {
            return Err(invalid("rho", format!("must lie in [0, {r}], got {rho}")));
        }
        if matches!(self.focal_type, FocalType::VanishingOrder(_)) && rho >= r {
            return Err(Error::FocalEndpoint { rho });
        }
        let th = self.theta(rho);
        if !(th > 0.0) {
            return Err(Error::FocalEndpoint { rho });
        }
        Ok(-self.theta_prime(rho) / th)
    }

    /// Checks the structural invariants and returns a description of each
    /// violation (empty when the profile is well formed).
    pub fn invariant_violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        let r = self.inner_radius;
        let t0 = self.theta(0.0);
        if t0 != 1.0 {
            out.push(format!("theta(0) = {t0}, expected exactly 1"));
        }
        for k in 0..256 {
            let rho = r * k as f64 / 256.0;
            let t = self.theta(rho);
            if !(t > 0.0) {
                out.push(format!("theta({rho}) = {t} is not positive"));
                break;
            }
        }
        match self.focal_type {
            FocalType::VanishingOrder(d) => {
                let tr = self.theta(r);
                if tr.abs() > 1e-12 {
                    out.push(format!("theta(R) = {tr}, expected 0 for a focal endpoint"));
                }
                match estimate_focal_order(self) {
                    Ok(fit) if (fit.d_estimate - d as f64).abs() <= 0.05 => {}
                    Ok(fit) => out.push(format!("log-log slope {} differs from declared order {d}", fit.d_estimate)),
                    Err(e) => out.push(format!("focal fit failed: {e}")),
                }
            }
            FocalType::TwoSidedSoul => {
                let tr = self.theta(r);
                if !(tr > 0.0) {
                    out.push(format!("theta(R) = {tr}, expected positive at a two-sided soul"));
                }
                let dr = self.theta_prime(r);
                if dr.abs() > 1e-9 {
                    out.push(format!("theta'(R) = {dr}, expected 0 (even reflection across the soul)"));
                }
            }
        }
        out
    }

    /// Weighted interval problem on [0, R] with weight θ, Dirichlet at the
    /// boundary and the focal/reflection condition at the soul.
    pub fn interval_problem(&self) -> WeightedIntervalProblem {
        let profile = self.clone();
        let far = match self.focal_type {
            FocalType::VanishingOrder(_) => BoundaryCondition::SingularRegular,
            FocalType::TwoSidedSoul => BoundaryCondition::WeightedNeumann,
        };
        WeightedIntervalProblem::from_fn(
            0.0,
            self.inner_radius,
            Arc::new(move |x| profile.theta(x)),
            BoundaryCondition::Dirichlet,
            far,
        )
        .expect("catalog profile yields a valid interval problem")
    }
}

/// Result of the log-log fit of θ near the inner radius.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FocalFit {
    pub d_estimate: f64,
    pub c_estimate: f64,
    /// `d_estimate` rounded to the nearest integer.
    pub order: u32,
    /// Root-mean-square residual of the log-log fit.
    pub residual: f64,
}

const FIT_SAMPLES: usize = 32;

/// Fits θ(ρ) ≈ c (R − ρ)^d on the window R − ρ ∈ [w/10, w], w = R/10, with
/// 32 logarithmically spaced samples.
pub fn estimate_focal_order(p: &TubeProfile) -> Result<FocalFit> {
    let r = p.inner_radius;
    if p.focal_type == FocalType::TwoSidedSoul {
        return Ok(FocalFit { d_estimate: 0.0, c_estimate: p.theta(r), order: 0, residual: 0.0 });
    }
    let w = r / 10.0;
    let (lo, hi) = ((w / 10.0).ln(), w.ln());
    let mut xs = Vec::with_capacity(FIT_SAMPLES);
    let mut ys = Vec::with_capacity(FIT_SAMPLES);
    for k in 0..FIT_SAMPLES {
        let s = (lo + (hi - lo) * k as f64 / (FIT_SAMPLES - 1) as f64).exp();
        let rho = r - s;
        let t = p.theta(rho);
        if !(t > 0.0) || !t.is_finite() {
            return Err(Error::NonPositiveSample { rho, value: t });
        }
        xs.push(s.ln());
        ys.push(t.ln());
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual = (xs.iter().zip(&ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum::<f64>() / n).sqrt();
    Ok(FocalFit { d_estimate: slope, c_estimate: intercept.exp(), order: slope.round().max(0.0) as u32, residual })
}

const SOUL_FIT_DEGREE: usize = 6;

/// Linear coefficient of the soul-side density expansion
/// θ_soul(s) = 1 + a·s + O(s²), s = R − ρ the distance to the soul.
///
/// A vanishing coefficient is the radial-model witness of a minimal soul.
pub fn soul_minimality_check(p: &TubeProfile) -> Result<f64> {
    let r = p.inner_radius;
    let w = r / 10.0;
    let (scale, order) = match p.focal_type {
        FocalType::TwoSidedSoul => (p.theta(r), 0),
        FocalType::VanishingOrder(_) => {
            let fit = estimate_focal_order(p)?;
            (fit.c_estimate, fit.order as i32)
        }
    };
    let mut xs = Vec::with_capacity(FIT_SAMPLES);
    let mut ys = Vec::with_capacity(FIT_SAMPLES);
    for k in 1..=FIT_SAMPLES {
        let s = w * k as f64 / FIT_SAMPLES as f64;
        let value = p.theta(r - s) / (scale * s.powi(order));
        if value.is_finite() && value > 0.0 {
            xs.push(s / w);
            ys.push(value);
        }
    }
    let needed = SOUL_FIT_DEGREE + 1;
    if xs.len() < needed.max(4) {
        return Err(Error::DegenerateFit { usable: xs.len(), needed: needed.max(4) });
    }
    let design = DMatrix::from_fn(xs.len(), SOUL_FIT_DEGREE + 1, |i, j| xs[i].powi(j as i32));
    let coeffs = least_squares(&design, &DVector::from_vec(ys))?;
    Ok(coeffs[1] / w)
}
