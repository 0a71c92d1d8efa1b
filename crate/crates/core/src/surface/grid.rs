use std::f64::consts::TAU;

use crate::error::{invalid, Error, Result};
use crate::geometry::RevolutionMetric;

/// Minimum resolution in each direction.
pub const MIN_RESOLUTION: usize = 16;

/// Cell-centred tensor grid on a revolution chart with precomputed
/// finite-volume coefficients.
///
/// Cell (i, j) is centred at r_i = r_min + (i + ½)h_r, φ_j = j h_φ.
#[derive(Debug, Clone)]
pub struct SurfaceGrid {
    metric: RevolutionMetric,
    nr: usize,
    nphi: usize,
    hr: f64,
    hphi: f64,
    r: Vec<f64>,
    /// θ at cell centres, ring-major.
    theta: Vec<f64>,
    /// θ on radial faces (nr + 1 rings of nphi); Dirichlet rings doubled,
    /// zero-flux rings 0.
    face_r: Vec<f64>,
    /// 1/θ on angular faces (i, j + ½).
    face_phi: Vec<f64>,
}

impl SurfaceGrid {
    pub fn new(metric: RevolutionMetric, nr: usize, nphi: usize) -> Result<Self> {
        if nr < MIN_RESOLUTION || nphi < MIN_RESOLUTION {
            return Err(invalid("grid", format!("need Nr, Nphi >= {MIN_RESOLUTION}, got {nr} x {nphi}")));
        }
        let (r0, r1) = (metric.r_min(), metric.r_max());
        let hr = (r1 - r0) / nr as f64;
        let hphi = TAU / nphi as f64;
        let r: Vec<f64> = (0..nr).map(|i| r0 + (i as f64 + 0.5) * hr).collect();
        let mut theta = Vec::with_capacity(nr * nphi);
        let mut face_phi = Vec::with_capacity(nr * nphi);
        for &ri in &r {
            for j in 0..nphi {
                let phi = j as f64 * hphi;
                theta.push(metric.theta(ri, phi));
                face_phi.push(1.0 / metric.theta(ri, phi + 0.5 * hphi));
            }
        }
        let bs = metric.boundary();
        let mut face_r = vec![0.0; (nr + 1) * nphi];
        for k in 0..=nr {
            let scale = match k {
                0 if bs.inner_dirichlet => 2.0,
                0 => 0.0,
                k if k == nr && bs.outer_dirichlet => 2.0,
                k if k == nr => 0.0,
                _ => 1.0,
            };
            if scale == 0.0 {
                continue;
            }
            let rf = r0 + k as f64 * hr;
            for j in 0..nphi {
                let t = metric.theta(rf, j as f64 * hphi);
                if !(t > 0.0 && t.is_finite()) {
                    return Err(Error::BadWeight { x: rf, value: t });
                }
                face_r[k * nphi + j] = scale * t;
            }
        }
        Ok(Self { metric, nr, nphi, hr, hphi, r, theta, face_r, face_phi })
    }

    pub fn metric(&self) -> &RevolutionMetric {
        &self.metric
    }

    pub fn nr(&self) -> usize {
        self.nr
    }

    pub fn nphi(&self) -> usize {
        self.nphi
    }

    pub fn hr(&self) -> f64 {
        self.hr
    }

    pub fn hphi(&self) -> f64 {
        self.hphi
    }

    pub fn len(&self) -> usize {
        self.nr * self.nphi
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn radii(&self) -> &[f64] {
        &self.r
    }

    pub fn phi(&self, j: usize) -> f64 {
        j as f64 * self.hphi
    }

    pub fn theta_at(&self, i: usize, j: usize) -> f64 {
        self.theta[i * self.nphi + j]
    }

    /// Cell measure θ h_r h_φ.
    pub fn measure(&self, i: usize, j: usize) -> f64 {
        self.theta_at(i, j) * self.hr * self.hphi
    }

    pub fn total_measure(&self) -> f64 {
        self.theta.iter().sum::<f64>() * self.hr * self.hphi
    }

    /// Samples `f(r, φ)` at the cell centres.
    pub fn sample(&self, f: impl Fn(f64, f64) -> f64) -> SurfaceField {
        let mut values = Vec::with_capacity(self.len());
        for &ri in &self.r {
            for j in 0..self.nphi {
                values.push(f(ri, self.phi(j)));
            }
        }
        SurfaceField { nr: self.nr, nphi: self.nphi, values, time: 0.0 }
    }

    pub fn constant(&self, value: f64) -> SurfaceField {
        SurfaceField { nr: self.nr, nphi: self.nphi, values: vec![value; self.len()], time: 0.0 }
    }

    pub(crate) fn check(&self, f: &SurfaceField) -> Result<()> {
        if f.nr != self.nr || f.nphi != self.nphi || f.values.len() != self.len() {
            return Err(Error::ShapeMismatch { expected: self.len(), got: f.values.len() });
        }
        Ok(())
    }

    /// Row `i` of the symmetric stiffness A = M·Δ applied to `f`, written
    /// into `out` (length nphi). Mass-weighted operator:
    /// `c_mass·M f + c_stiff·A f`.
    pub(crate) fn apply_ring(&self, c_mass: f64, c_stiff: f64, f: &[f64], i: usize, out: &mut [f64]) {
        let n = self.nphi;
        let gr = self.hphi / self.hr;
        let gp = self.hr / self.hphi;
        let row = &f[i * n..(i + 1) * n];
        let inner = &self.face_r[i * n..(i + 1) * n];
        let outer = &self.face_r[(i + 1) * n..(i + 2) * n];
        let bphi = &self.face_phi[i * n..(i + 1) * n];
        for j in 0..n {
            let fc = row[j];
            let mut radial = outer[j] * fc + inner[j] * fc;
            if i + 1 < self.nr {
                radial -= outer[j] * f[(i + 1) * n + j];
            }
            if i > 0 {
                radial -= inner[j] * f[(i - 1) * n + j];
            }
            let jp = if j + 1 == n { 0 } else { j + 1 };
            let jm = if j == 0 { n - 1 } else { j - 1 };
            let angular = bphi[j] * (fc - row[jp]) + bphi[jm] * (fc - row[jm]);
            let mass = self.theta[i * n + j] * self.hr * self.hphi;
            out[j] = c_mass * mass * fc + c_stiff * (gr * radial + gp * angular);
        }
    }

    /// Diagonal and cyclic off-diagonal of the ring block of
    /// `c_mass·M + c_stiff·A`.
    pub(crate) fn ring_block(&self, c_mass: f64, c_stiff: f64, i: usize) -> (Vec<f64>, Vec<f64>) {
        let n = self.nphi;
        let gr = self.hphi / self.hr;
        let gp = self.hr / self.hphi;
        let mut diag = Vec::with_capacity(n);
        let mut off = Vec::with_capacity(n);
        for j in 0..n {
            let jm = if j == 0 { n - 1 } else { j - 1 };
            let radial = self.face_r[i * n + j] + self.face_r[(i + 1) * n + j];
            let angular = self.face_phi[i * n + j] + self.face_phi[i * n + jm];
            let mass = self.theta[i * n + j] * self.hr * self.hphi;
            diag.push(c_mass * mass + c_stiff * (gr * radial + gp * angular));
            off.push(-c_stiff * gp * self.face_phi[i * n + j]);
        }
        (diag, off)
    }

    /// Galerkin projection of `c_mass·M + c_stiff·A` onto φ-independent
    /// fields: a tridiagonal system over rings, as (lower, diag, upper).
    pub(crate) fn radial_coarse(&self, c_mass: f64, c_stiff: f64) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let n = self.nphi;
        let gr = self.hphi / self.hr;
        let ring_sum = |k: usize| self.face_r[k * n..(k + 1) * n].iter().sum::<f64>();
        let faces: Vec<f64> = (0..=self.nr).map(ring_sum).collect();
        let mut lower = vec![0.0; self.nr];
        let mut diag = vec![0.0; self.nr];
        let mut upper = vec![0.0; self.nr];
        for i in 0..self.nr {
            let mass: f64 = self.theta[i * n..(i + 1) * n].iter().sum::<f64>() * self.hr * self.hphi;
            diag[i] = c_mass * mass + c_stiff * gr * (faces[i] + faces[i + 1]);
            if i > 0 {
                lower[i] = -c_stiff * gr * faces[i];
            }
            if i + 1 < self.nr {
                upper[i] = -c_stiff * gr * faces[i + 1];
            }
        }
        (lower, diag, upper)
    }

    /// Max absolute row sum of the discrete Laplacian M⁻¹A.
    pub fn operator_norm(&self) -> f64 {
        let n = self.nphi;
        let gr = self.hphi / self.hr;
        let gp = self.hr / self.hphi;
        let mut worst: f64 = 0.0;
        for i in 0..self.nr {
            for j in 0..n {
                let jm = if j == 0 { n - 1 } else { j - 1 };
                let radial = self.face_r[i * n + j] + self.face_r[(i + 1) * n + j];
                let angular = self.face_phi[i * n + j] + self.face_phi[i * n + jm];
                worst = worst.max(2.0 * (gr * radial + gp * angular) / self.measure(i, j));
            }
        }
        worst
    }

    /// Size of the rounding error expected when applying the Laplacian to
    /// `f`: machine epsilon times the operator norm times max |f|.
    pub fn roundoff_scale(&self, f: &SurfaceField) -> f64 {
        f64::EPSILON * self.operator_norm() * f.max_abs()
    }

    /// Inward normal derivative per φ at the inner ring, if Dirichlet.
    pub fn inner_flux(&self, f: &SurfaceField) -> Option<Vec<f64>> {
        self.metric
            .boundary()
            .inner_dirichlet
            .then(|| (0..self.nphi).map(|j| crate::radial::dirichlet_face_flux(f.at(0, j), self.hr)).collect())
    }

    /// Inward normal derivative per φ at the outer ring, if Dirichlet.
    pub fn outer_flux(&self, f: &SurfaceField) -> Option<Vec<f64>> {
        self.metric.boundary().outer_dirichlet.then(|| {
            (0..self.nphi).map(|j| crate::radial::dirichlet_face_flux(f.at(self.nr - 1, j), self.hr)).collect()
        })
    }
}

/// Values at the cell centres of a [`SurfaceGrid`], ring-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceField {
    pub nr: usize,
    pub nphi: usize,
    pub values: Vec<f64>,
    pub time: f64,
}

impl SurfaceField {
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.nphi + j]
    }

    pub fn ring(&self, i: usize) -> &[f64] {
        &self.values[i * self.nphi..(i + 1) * self.nphi]
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Largest max − min over φ on any ring.
    pub fn angular_spread(&self) -> f64 {
        (0..self.nr).map(|i| ring_spread(self.ring(i))).fold(0.0, f64::max)
    }

    /// CSV with header `r,phi,value`.
    pub fn to_csv(&self, grid: &SurfaceGrid) -> String {
        let mut out = String::from("r,phi,value\n");
        for i in 0..self.nr {
            for j in 0..self.nphi {
                out.push_str(&format!("{:.16e},{:.16e},{:.16e}\n", grid.radii()[i], grid.phi(j), self.at(i, j)));
            }
        }
        out
    }
}

pub(crate) fn ring_spread(v: &[f64]) -> f64 {
    let (lo, hi) = v.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(*x), b.max(*x)));
    hi - lo
}
