//! Banded solvers and small dense helpers shared by the radial and surface solvers.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Thomas algorithm for a general tridiagonal system.
///
/// `lower[i]` couples row `i` to `i-1` (`lower[0]` ignored), `upper[i]` couples
/// row `i` to `i+1` (`upper[n-1]` ignored). The right-hand side is overwritten
/// with the solution.
pub fn solve_tridiagonal(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &mut [f64]) {
    let n = diag.len();
    assert!(lower.len() == n && upper.len() == n && rhs.len() == n);
    if n == 0 {
        return;
    }
    let mut c = vec![0.0; n];
    let mut beta = diag[0];
    rhs[0] /= beta;
    for i in 1..n {
        c[i - 1] = upper[i - 1] / beta;
        beta = diag[i] - lower[i] * c[i - 1];
        rhs[i] = (rhs[i] - lower[i] * rhs[i - 1]) / beta;
    }
    for i in (0..n - 1).rev() {
        rhs[i] -= c[i] * rhs[i + 1];
    }
}

/// Factorized symmetric periodic tridiagonal matrix
/// (`diag[j]`, `off[j]` couples `j` and `j+1 mod n`), solved by
/// Sherman–Morrison on top of a Thomas sweep.
#[derive(Debug, Clone)]
pub struct CyclicTridiagonal {
    lower: Vec<f64>,
    diag: Vec<f64>,
    // Thomas factors of the modified matrix
    c: Vec<f64>,
    beta: Vec<f64>,
    z: Vec<f64>,
    gamma: f64,
    corner: f64,
    fact: f64,
}

impl CyclicTridiagonal {
    pub fn new(diag: &[f64], off: &[f64]) -> Self {
        let n = diag.len();
        assert!(n >= 3 && off.len() == n);
        let mut lower = vec![0.0; n];
        let mut upper = vec![0.0; n];
        for j in 0..n {
            upper[j] = off[j];
            lower[(j + 1) % n] = off[j];
        }
        // corner entries: A[0][n-1] = off[n-1] = A[n-1][0]
        let corner = off[n - 1];
        let gamma = -diag[0];
        let mut d = diag.to_vec();
        d[0] -= gamma;
        d[n - 1] -= corner * corner / gamma;
        let mut c = vec![0.0; n];
        let mut beta = vec![0.0; n];
        beta[0] = d[0];
        for i in 1..n {
            c[i - 1] = upper[i - 1] / beta[i - 1];
            beta[i] = d[i] - lower[i] * c[i - 1];
        }
        let mut out = Self { lower, diag: d, c, beta, z: vec![0.0; n], gamma, corner, fact: 0.0 };
        let mut u = vec![0.0; n];
        u[0] = gamma;
        u[n - 1] = corner;
        out.sweep(&mut u);
        let fact_den = 1.0 + u[0] + corner * u[n - 1] / gamma;
        out.z = u;
        out.fact = fact_den;
        out
    }

    fn sweep(&self, rhs: &mut [f64]) {
        let n = self.diag.len();
        rhs[0] /= self.beta[0];
        for i in 1..n {
            rhs[i] = (rhs[i] - self.lower[i] * rhs[i - 1]) / self.beta[i];
        }
        for i in (0..n - 1).rev() {
            rhs[i] -= self.c[i] * rhs[i + 1];
        }
    }

    /// Solves in place.
    pub fn solve(&self, rhs: &mut [f64]) {
        let n = self.diag.len();
        self.sweep(rhs);
        let vy = rhs[0] + self.corner * rhs[n - 1] / self.gamma;
        let s = vy / self.fact;
        for (x, z) in rhs.iter_mut().zip(&self.z) {
            *x -= s * z;
        }
    }
}

/// Sturm count: number of eigenvalues of the symmetric tridiagonal matrix
/// (`diag`, `off[i]` couples `i` and `i+1`) strictly less than `x`.
pub fn sturm_count(diag: &[f64], off: &[f64], x: f64) -> usize {
    let mut count = 0;
    let mut q = 1.0_f64;
    for i in 0..diag.len() {
        let b2 = if i == 0 { 0.0 } else { off[i - 1] * off[i - 1] };
        q = diag[i] - x - if i == 0 { 0.0 } else { b2 / q };
        if q == 0.0 {
            q = f64::EPSILON * (diag[i].abs() + x.abs()).max(f64::MIN_POSITIVE);
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// k-th smallest eigenvalue (0-based) of a symmetric tridiagonal matrix by
/// bisection on Sturm counts, to relative interval width `rel_tol`.
pub fn tridiagonal_eigenvalue(diag: &[f64], off: &[f64], k: usize, rel_tol: f64) -> f64 {
    let n = diag.len();
    assert!(k < n);
    // Gershgorin bounds
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        let r = if i > 0 { off[i - 1].abs() } else { 0.0 } + if i + 1 < n { off[i].abs() } else { 0.0 };
        lo = lo.min(diag[i] - r);
        hi = hi.max(diag[i] + r);
    }
    for _ in 0..400 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if sturm_count(diag, off, mid) > k {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo <= rel_tol * 0.5 * (lo.abs() + hi.abs()) {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Tridiagonal solve with partial pivoting (row interchanges), for
/// indefinite or nearly singular systems. Same storage convention as
/// [`solve_tridiagonal`].
pub fn solve_tridiagonal_pivoted(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &mut [f64]) {
    let n = diag.len();
    let mut dl: Vec<f64> = (1..n).map(|i| lower[i]).collect();
    let mut d = diag.to_vec();
    let mut du: Vec<f64> = (0..n.saturating_sub(1)).map(|i| upper[i]).collect();
    let mut du2 = vec![0.0; n.saturating_sub(2)];
    let tiny = f64::MIN_POSITIVE.sqrt();
    for i in 0..n.saturating_sub(1) {
        if d[i].abs() >= dl[i].abs() {
            let piv = if d[i] == 0.0 { tiny } else { d[i] };
            d[i] = piv;
            let fact = dl[i] / piv;
            dl[i] = fact;
            d[i + 1] -= fact * du[i];
            rhs[i + 1] -= fact * rhs[i];
            if i + 2 < n {
                du2[i] = 0.0;
            }
        } else {
            let fact = d[i] / dl[i];
            d[i] = dl[i];
            dl[i] = fact;
            let temp = du[i];
            du[i] = d[i + 1];
            d[i + 1] = temp - fact * d[i + 1];
            if i + 2 < n {
                du2[i] = du[i + 1];
                du[i + 1] *= -fact;
            }
            rhs.swap(i, i + 1);
            rhs[i + 1] -= fact * rhs[i];
        }
    }
    if d[n - 1] == 0.0 {
        d[n - 1] = tiny;
    }
    rhs[n - 1] /= d[n - 1];
    if n > 1 {
        rhs[n - 2] = (rhs[n - 2] - du[n - 2] * rhs[n - 1]) / d[n - 2];
    }
    for i in (0..n.saturating_sub(2)).rev() {
        rhs[i] = (rhs[i] - du[i] * rhs[i + 1] - du2[i] * rhs[i + 2]) / d[i];
    }
}

/// Eigenvector of a symmetric tridiagonal matrix for an accurately known
/// eigenvalue, by inverse iteration. Returned with unit 2-norm.
pub fn tridiagonal_eigenvector(diag: &[f64], off: &[f64], lambda: f64) -> Vec<f64> {
    let n = diag.len();
    let mut lower = vec![0.0; n];
    let mut upper = vec![0.0; n];
    upper[..n - 1].copy_from_slice(&off[..n - 1]);
    lower[1..].copy_from_slice(&off[..n - 1]);
    let d: Vec<f64> = diag.iter().map(|x| x - lambda).collect();
    let mut v: Vec<f64> = (0..n).map(|i| 1.0 + 0.1 * ((i * 7919) % 13) as f64).collect();
    for _ in 0..3 {
        solve_tridiagonal_pivoted(&lower, &d, &upper, &mut v);
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        for x in v.iter_mut() {
            *x /= norm;
        }
    }
    v
}

/// Least-squares solution of `design * coeffs ≈ rhs`, via SVD.
pub fn least_squares(design: &DMatrix<f64>, rhs: &DVector<f64>) -> Result<DVector<f64>> {
    let svd = design.clone().svd(true, true);
    svd.solve(rhs, 1e-14).map_err(|e| Error::RootFind(format!("least squares failed: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn thomas_matches_dense() {
        let lower = [0.0, -1.0, -2.0, 0.5];
        let diag = [4.0, 5.0, 6.0, 3.0];
        let upper = [1.0, 0.5, -1.0, 0.0];
        let x = [1.0, -2.0, 3.0, 0.25];
        let mut rhs: Vec<f64> = (0..4)
            .map(|i| {
                let mut s = diag[i] * x[i];
                if i > 0 {
                    s += lower[i] * x[i - 1];
                }
                if i < 3 {
                    s += upper[i] * x[i + 1];
                }
                s
            })
            .collect();
        solve_tridiagonal(&lower, &diag, &upper, &mut rhs);
        for (a, b) in rhs.iter().zip(x.iter()) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn pivoted_solve_handles_zero_leading_pivot() {
        let lower = [0.0, 1.0, 2.0];
        let diag = [0.0, 1.0, 1.0];
        let upper = [1.0, 3.0, 0.0];
        // x = (1, 2, 3)
        let mut rhs = vec![2.0, 1.0 + 2.0 + 9.0, 4.0 + 3.0];
        solve_tridiagonal_pivoted(&lower, &diag, &upper, &mut rhs);
        for (a, b) in rhs.iter().zip([1.0, 2.0, 3.0]) {
            assert!((a - b).abs() < 1e-13, "{a} vs {b}");
        }
    }

    #[test]
    fn cyclic_solve_matches_dense() {
        let n = 7;
        let diag: Vec<f64> = (0..n).map(|j| 4.0 + 0.3 * j as f64).collect();
        let off: Vec<f64> = (0..n).map(|j| -1.0 + 0.1 * j as f64).collect();
        let x: Vec<f64> = (0..n).map(|j| (j as f64 * 0.7).sin()).collect();
        let mut rhs = vec![0.0; n];
        for j in 0..n {
            rhs[j] = diag[j] * x[j] + off[j] * x[(j + 1) % n] + off[(j + n - 1) % n] * x[(j + n - 1) % n];
        }
        let m = CyclicTridiagonal::new(&diag, &off);
        m.solve(&mut rhs);
        for (a, b) in rhs.iter().zip(x.iter()) {
            assert!((a - b).abs() < 1e-13, "{a} vs {b}");
        }
    }

    #[test]
    fn bisection_finds_laplacian_spectrum() {
        let n = 50;
        let diag = vec![2.0; n];
        let off = vec![-1.0; n - 1];
        for k in 0..5 {
            let exact = 2.0 - 2.0 * (((k + 1) as f64) * std::f64::consts::PI / (n as f64 + 1.0)).cos();
            let got = tridiagonal_eigenvalue(&diag, &off, k, 1e-14);
            assert!((got - exact).abs() < 1e-12, "k={k}: {got} vs {exact}");
        }
    }

    #[test]
    fn inverse_iteration_returns_eigenvector() {
        let n = 20;
        let diag = vec![2.0; n];
        let off = vec![-1.0; n - 1];
        let lam = tridiagonal_eigenvalue(&diag, &off, 2, 1e-15);
        let v = tridiagonal_eigenvector(&diag, &off, lam);
        for i in 0..n {
            let mut av = diag[i] * v[i];
            if i > 0 {
                av += off[i - 1] * v[i - 1];
            }
            if i + 1 < n {
                av += off[i] * v[i + 1];
            }
            assert!((av - lam * v[i]).abs() < 1e-9);
        }
    }
}
