use std::fmt;

use crate::error::{invalid, Error, Result};
use crate::geometry::ScalarFn;

/// Condition imposed at one end of a weighted interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryCondition {
    /// u = 0.
    Dirichlet,
    /// θ u' → 0 (even reflection across a two-sided soul).
    WeightedNeumann,
    /// Focal endpoint where the weight vanishes; zero flux without a condition.
    SingularRegular,
}

/// The operator −(1/w)(w u')' on [x0, x1] with per-end conditions.
#[derive(Clone)]
pub struct WeightedIntervalProblem {
    x0: f64,
    x1: f64,
    weight: ScalarFn,
    bc0: BoundaryCondition,
    bc1: BoundaryCondition,
}

impl fmt::Debug for WeightedIntervalProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("WeightedIntervalProblem")
            .field("x0", &self.x0)
            .field("x1", &self.x1)
            .field("bc0", &self.bc0)
            .field("bc1", &self.bc1)
            .finish()
    }
}

/// Tolerance for "the weight vanishes at this endpoint".
const VANISHING_WEIGHT: f64 = 1e-12;

impl WeightedIntervalProblem {
    pub fn from_fn(x0: f64, x1: f64, weight: ScalarFn, bc0: BoundaryCondition, bc1: BoundaryCondition) -> Result<Self> {
        if !(x0 < x1 && x0.is_finite() && x1.is_finite()) {
            return Err(invalid("interval", format!("need x0 < x1, got [{x0}, {x1}]")));
        }
        for k in 1..64 {
            let x = x0 + (x1 - x0) * k as f64 / 64.0;
            let w = weight(x);
            if !(w > 0.0 && w.is_finite()) {
                return Err(Error::BadWeight { x, value: w });
            }
        }
        let scale = weight(0.5 * (x0 + x1)).abs();
        for (bc, x) in [(bc0, x0), (bc1, x1)] {
            if bc == BoundaryCondition::SingularRegular && weight(x).abs() > VANISHING_WEIGHT * scale.max(1.0) {
                return Err(invalid(
                    "boundary",
                    format!("singular endpoint at x = {x} needs a vanishing weight, got {}", weight(x)),
                ));
            }
        }
        Ok(Self { x0, x1, weight, bc0, bc1 })
    }

    /// Constant weight on [x0, x1].
    pub fn uniform(x0: f64, x1: f64, bc0: BoundaryCondition, bc1: BoundaryCondition) -> Result<Self> {
        Self::from_fn(x0, x1, std::sync::Arc::new(|_| 1.0), bc0, bc1)
    }

    pub fn x0(&self) -> f64 {
        self.x0
    }

    pub fn x1(&self) -> f64 {
        self.x1
    }

    pub fn bc0(&self) -> BoundaryCondition {
        self.bc0
    }

    pub fn bc1(&self) -> BoundaryCondition {
        self.bc1
    }

    pub fn weight(&self, x: f64) -> f64 {
        (self.weight)(x)
    }

    pub fn has_dirichlet(&self) -> bool {
        self.bc0 == BoundaryCondition::Dirichlet || self.bc1 == BoundaryCondition::Dirichlet
    }
}

/// Minimum number of cells in a radial grid.
pub const MIN_CELLS: usize = 8;

/// Values on the cell-centred partition of [x0, x1].
#[derive(Debug, Clone, PartialEq)]
pub struct RadialField {
    pub x0: f64,
    pub x1: f64,
    pub values: Vec<f64>,
    pub time: f64,
}

impl RadialField {
    pub fn new(x0: f64, x1: f64, values: Vec<f64>) -> Result<Self> {
        if values.len() < MIN_CELLS {
            return Err(invalid("N", format!("need at least {MIN_CELLS} cells, got {}", values.len())));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(invalid("values", "field contains non-finite values"));
        }
        Ok(Self { x0, x1, values, time: 0.0 })
    }

    /// Samples `f` at the cell centres of an `n`-cell grid.
    pub fn from_fn(x0: f64, x1: f64, n: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        let h = (x1 - x0) / n as f64;
        Self::new(x0, x1, (0..n).map(|i| f(x0 + (i as f64 + 0.5) * h)).collect())
    }

    pub fn constant(x0: f64, x1: f64, n: usize, value: f64) -> Result<Self> {
        Self::new(x0, x1, vec![value; n])
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn h(&self) -> f64 {
        (self.x1 - self.x0) / self.values.len() as f64
    }

    pub fn centers(&self) -> Vec<f64> {
        let h = self.h();
        (0..self.values.len()).map(|i| self.x0 + (i as f64 + 0.5) * h).collect()
    }
}

/// Inward normal derivative at a zero Dirichlet face from samples of a
/// smooth function at the two nearest cell centres, exact for quadratics:
/// (9 u₁ − u₂)/(3h).
pub fn quadratic_face_derivative(u_near: f64, u_next: f64, h: f64) -> f64 {
    (9.0 * u_near - u_next) / (3.0 * h)
}

/// Inward normal derivative at a Dirichlet face as carried by the scheme
/// itself: the ghost-cell face flux 2u₁/h.
///
/// Discrete solutions sit O(h²) off the continuum at the boundary cell, so
/// the wider quadratic formula degrades to O(h) on them, while this
/// conservative flux stays O(h²).
pub fn dirichlet_face_flux(u_near: f64, h: f64) -> f64 {
    2.0 * u_near / h
}

/// Conservative finite-volume form of −(1/θ)(θφ')' on a cell-centred grid.
///
/// Row `i` reads `lower[i] φ[i-1] + diag[i] φ[i] + upper[i] φ[i+1]`.
#[derive(Debug, Clone)]
pub struct RadialOperator {
    pub h: f64,
    pub centers: Vec<f64>,
    /// Cell-centre weights θ_i.
    pub weights: Vec<f64>,
    /// Face coefficients (N + 1 entries); Dirichlet faces carry the doubled
    /// ghost coefficient, zero-flux faces are 0.
    pub face: Vec<f64>,
    pub lower: Vec<f64>,
    pub diag: Vec<f64>,
    pub upper: Vec<f64>,
    pub bc0: BoundaryCondition,
    pub bc1: BoundaryCondition,
}

pub fn discretize(p: &WeightedIntervalProblem, n: usize) -> Result<RadialOperator> {
    if n < MIN_CELLS {
        return Err(invalid("N", format!("need at least {MIN_CELLS} cells, got {n}")));
    }
    let h = (p.x1 - p.x0) / n as f64;
    let centers: Vec<f64> = (0..n).map(|i| p.x0 + (i as f64 + 0.5) * h).collect();
    let mut weights = Vec::with_capacity(n);
    for &x in &centers {
        let w = p.weight(x);
        if !(w > 0.0 && w.is_finite()) {
            return Err(Error::BadWeight { x, value: w });
        }
        weights.push(w);
    }
    let mut face = vec![0.0; n + 1];
    for (k, f) in face.iter_mut().enumerate().take(n).skip(1) {
        let x = p.x0 + k as f64 * h;
        let w = p.weight(x);
        if !(w > 0.0 && w.is_finite()) {
            return Err(Error::BadWeight { x, value: w });
        }
        *f = w;
    }
    for (k, bc, x) in [(0, p.bc0, p.x0), (n, p.bc1, p.x1)] {
        face[k] = match bc {
            BoundaryCondition::Dirichlet => {
                let w = p.weight(x);
                if !(w > 0.0 && w.is_finite()) {
                    return Err(Error::BadWeight { x, value: w });
                }
                2.0 * w
            }
            BoundaryCondition::WeightedNeumann | BoundaryCondition::SingularRegular => 0.0,
        };
    }
    let h2 = h * h;
    let mut lower = vec![0.0; n];
    let mut diag = vec![0.0; n];
    let mut upper = vec![0.0; n];
    for i in 0..n {
        let s = 1.0 / (weights[i] * h2);
        diag[i] = s * (face[i] + face[i + 1]);
        if i > 0 {
            lower[i] = -s * face[i];
        }
        if i + 1 < n {
            upper[i] = -s * face[i + 1];
        }
    }
    Ok(RadialOperator { h, centers, weights, face, lower, diag, upper, bc0: p.bc0, bc1: p.bc1 })
}

impl RadialOperator {
    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    pub fn apply(&self, phi: &[f64]) -> Vec<f64> {
        let n = self.len();
        assert_eq!(phi.len(), n);
        (0..n)
            .map(|i| {
                let mut s = self.diag[i] * phi[i];
                if i > 0 {
                    s += self.lower[i] * phi[i - 1];
                }
                if i + 1 < n {
                    s += self.upper[i] * phi[i + 1];
                }
                s
            })
            .collect()
    }

    /// Cell masses θ_i h.
    pub fn masses(&self) -> Vec<f64> {
        self.weights.iter().map(|w| w * self.h).collect()
    }

    /// Symmetric tridiagonal form D L D⁻¹ with D = diag(√(θ_i h)):
    /// returns (diagonal, off-diagonal).
    pub fn symmetric_form(&self) -> (Vec<f64>, Vec<f64>) {
        let n = self.len();
        let h2 = self.h * self.h;
        let off =
            (0..n - 1).map(|i| -self.face[i + 1] / (h2 * (self.weights[i] * self.weights[i + 1]).sqrt())).collect();
        (self.diag.clone(), off)
    }

    /// Inward normal derivatives at the Dirichlet ends (None elsewhere).
    pub fn boundary_fluxes(&self, u: &[f64]) -> (Option<f64>, Option<f64>) {
        let n = self.len();
        let f0 = (self.bc0 == BoundaryCondition::Dirichlet).then(|| dirichlet_face_flux(u[0], self.h));
        let f1 = (self.bc1 == BoundaryCondition::Dirichlet).then(|| dirichlet_face_flux(u[n - 1], self.h));
        (f0, f1)
    }
}
