use crate::convergence::richardson;
use crate::error::{invalid, Result};
use crate::linalg::{tridiagonal_eigenvalue, tridiagonal_eigenvector};
use crate::radial::problem::{
    dirichlet_face_flux, discretize, BoundaryCondition, RadialField, WeightedIntervalProblem,
};

/// Relative bisection width for eigenvalues.
pub const EIGEN_REL_TOL: f64 = 1e-12;
/// Eigenvalues closer than this are reported as a cluster.
pub const CLUSTER_GAP: f64 = 1e-10;
/// Smallest boundary flux accepted as a nonzero witness.
pub const WITNESS_FLOOR: f64 = 1e-8;

/// Lowest Dirichlet eigenpairs of a weighted interval problem.
#[derive(Debug, Clone)]
pub struct SpectrumResult {
    pub eigenvalues: Vec<f64>,
    /// Normalized so that Σ θ_i h φ_i² = 1 and φ'(x0) > 0.
    pub eigenfunctions: Vec<RadialField>,
    /// Inward normal derivative φ'_k(x0).
    pub boundary_fluxes: Vec<f64>,
    pub warnings: Vec<String>,
}

impl SpectrumResult {
    /// Every boundary flux clears the witness floor.
    pub fn witnesses_nonzero(&self) -> bool {
        self.boundary_fluxes.iter().all(|f| f.abs() > WITNESS_FLOOR)
    }

    /// CSV with header `k,lambda,flux0`, k starting at 1.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("k,lambda,flux0\n");
        for (i, (l, f)) in self.eigenvalues.iter().zip(&self.boundary_fluxes).enumerate() {
            out.push_str(&format!("{},{l:.16e},{f:.16e}\n", i + 1));
        }
        out
    }
}

/// Lowest `k` eigenpairs of the discrete operator on `n` cells.
pub fn radial_dirichlet_spectrum(p: &WeightedIntervalProblem, n: usize, k: usize) -> Result<SpectrumResult> {
    if k < 1 {
        return Err(invalid("k", "need at least one eigenvalue"));
    }
    if p.bc0() != BoundaryCondition::Dirichlet {
        return Err(invalid("bc0", "the spectrum needs a Dirichlet condition at x0"));
    }
    if k > n / 4 {
        return Err(invalid("k", format!("k = {k} is not resolved by {n} cells (limit {})", n / 4)));
    }
    let op = discretize(p, n)?;
    let (diag, off) = op.symmetric_form();
    let masses = op.masses();
    let mut eigenvalues = Vec::with_capacity(k);
    let mut eigenfunctions = Vec::with_capacity(k);
    let mut boundary_fluxes = Vec::with_capacity(k);
    for idx in 0..k {
        let lambda = tridiagonal_eigenvalue(&diag, &off, idx, EIGEN_REL_TOL);
        let y = tridiagonal_eigenvector(&diag, &off, lambda);
        // undo the similarity: φ = D⁻¹ y keeps Σ m_i φ_i² = Σ y_i² = 1
        let mut phi: Vec<f64> = y.iter().zip(&masses).map(|(v, m)| v / m.sqrt()).collect();
        let mut flux = dirichlet_face_flux(phi[0], op.h);
        if flux < 0.0 {
            phi.iter_mut().for_each(|v| *v = -*v);
            flux = -flux;
        }
        eigenvalues.push(lambda);
        eigenfunctions.push(RadialField::new(p.x0(), p.x1(), phi)?);
        boundary_fluxes.push(flux);
    }
    let mut warnings = Vec::new();
    for (i, w) in eigenvalues.windows(2).enumerate() {
        if (w[1] - w[0]).abs() <= CLUSTER_GAP * w[1].abs().max(1.0) {
            warnings.push(format!("eigenvalues {} and {} cluster: {} vs {}", i + 1, i + 2, w[0], w[1]));
        }
    }
    for (i, f) in boundary_fluxes.iter().enumerate() {
        if f.abs() <= WITNESS_FLOOR {
            warnings.push(format!("boundary flux of mode {} vanishes: {f}", i + 1));
        }
    }
    Ok(SpectrumResult { eigenvalues, eigenfunctions, boundary_fluxes, warnings })
}

/// As [`radial_dirichlet_spectrum`], with eigenvalues improved by one
/// Richardson step against the `n/2` grid. Eigenfunctions and fluxes come
/// from the `n`-cell grid.
pub fn radial_dirichlet_spectrum_extrapolated(
    p: &WeightedIntervalProblem,
    n: usize,
    k: usize,
) -> Result<SpectrumResult> {
    let fine = radial_dirichlet_spectrum(p, n, k)?;
    let coarse = radial_dirichlet_spectrum(p, n / 2, k)?;
    let eigenvalues = fine.eigenvalues.iter().zip(&coarse.eigenvalues).map(|(f, c)| richardson(*f, *c, 2.0)).collect();
    Ok(SpectrumResult { eigenvalues, ..fine })
}
