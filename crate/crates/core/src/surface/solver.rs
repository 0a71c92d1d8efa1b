use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::linalg::{solve_tridiagonal, CyclicTridiagonal};
use crate::radial::HeatOptions;
use crate::surface::grid::{ring_spread, SurfaceField, SurfaceGrid};
use crate::surface::operators::apply_system;

/// Relative residual at which conjugate gradients stop.
pub const CG_TOLERANCE: f64 = 1e-10;
/// Iteration cap for conjugate gradients.
pub const CG_MAX_ITERATIONS: usize = 20_000;

/// Additive two-level preconditioner: exact solves on each ring (periodic
/// tridiagonal in φ) plus an exact solve on φ-independent fields.
struct Preconditioner {
    nphi: usize,
    rings: Vec<CyclicTridiagonal>,
    coarse: (Vec<f64>, Vec<f64>, Vec<f64>),
}

impl Preconditioner {
    fn new(g: &SurfaceGrid, c_mass: f64, c_stiff: f64) -> Self {
        let rings = (0..g.nr())
            .into_par_iter()
            .map(|i| {
                let (d, o) = g.ring_block(c_mass, c_stiff, i);
                CyclicTridiagonal::new(&d, &o)
            })
            .collect();
        Self { nphi: g.nphi(), rings, coarse: g.radial_coarse(c_mass, c_stiff) }
    }

    fn apply(&self, r: &[f64], z: &mut [f64]) {
        let n = self.nphi;
        z.copy_from_slice(r);
        z.par_chunks_mut(n).zip(self.rings.par_iter()).for_each(|(zr, blk)| blk.solve(zr));
        let mut c: Vec<f64> = r.chunks(n).map(|ring| ring.iter().sum()).collect();
        let (lo, d, up) = &self.coarse;
        solve_tridiagonal(lo, d, up, &mut c);
        z.par_chunks_mut(n).zip(c.par_iter()).for_each(|(zr, ci)| zr.iter_mut().for_each(|v| *v += ci));
    }
}

/// Dot product summed ring by ring in a fixed order, so results do not
/// depend on thread scheduling.
fn dot(a: &[f64], b: &[f64], chunk: usize) -> f64 {
    let parts: Vec<f64> =
        a.par_chunks(chunk).zip(b.par_chunks(chunk)).map(|(x, y)| x.iter().zip(y).map(|(p, q)| p * q).sum()).collect();
    parts.iter().sum()
}

/// Symmetric positive definite solver for `(c_mass·M + c_stiff·A) x = b`.
struct SystemSolver<'a> {
    grid: &'a SurfaceGrid,
    c_mass: f64,
    c_stiff: f64,
    pre: Preconditioner,
}

impl<'a> SystemSolver<'a> {
    fn new(grid: &'a SurfaceGrid, c_mass: f64, c_stiff: f64) -> Self {
        Self { grid, c_mass, c_stiff, pre: Preconditioner::new(grid, c_mass, c_stiff) }
    }

    /// Preconditioned CG from initial guess `x`; returns the iteration count.
    fn solve(&self, b: &[f64], x: &mut [f64]) -> Result<usize> {
        let n = self.grid.nphi();
        let len = b.len();
        let bnorm = dot(b, b, n).sqrt();
        if bnorm == 0.0 {
            x.fill(0.0);
            return Ok(0);
        }
        let mut ax = vec![0.0; len];
        apply_system(self.grid, self.c_mass, self.c_stiff, x, &mut ax);
        let mut r: Vec<f64> = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
        let mut z = vec![0.0; len];
        self.pre.apply(&r, &mut z);
        let mut p = z.clone();
        let mut rz = dot(&r, &z, n);
        let mut q = vec![0.0; len];
        let mut rel = dot(&r, &r, n).sqrt() / bnorm;
        for it in 0..CG_MAX_ITERATIONS {
            if rel <= CG_TOLERANCE {
                return Ok(it);
            }
            apply_system(self.grid, self.c_mass, self.c_stiff, &p, &mut q);
            let alpha = rz / dot(&p, &q, n);
            x.par_iter_mut().zip(p.par_iter()).for_each(|(xi, pi)| *xi += alpha * pi);
            r.par_iter_mut().zip(q.par_iter()).for_each(|(ri, qi)| *ri -= alpha * qi);
            rel = dot(&r, &r, n).sqrt() / bnorm;
            if !rel.is_finite() {
                return Err(Error::NoConvergence { iterations: it + 1, residual: rel });
            }
            self.pre.apply(&r, &mut z);
            let rz_new = dot(&r, &z, n);
            let beta = rz_new / rz;
            rz = rz_new;
            p.par_iter_mut().zip(z.par_iter()).for_each(|(pi, zi)| *pi = zi + beta * *pi);
        }
        if rel <= CG_TOLERANCE {
            return Ok(CG_MAX_ITERATIONS);
        }
        Err(Error::NoConvergence { iterations: CG_MAX_ITERATIONS, residual: rel })
    }
}

/// Which Dirichlet ring a flux series belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Ring {
    Inner,
    Outer,
}

/// Per-angle boundary flux samples of a two-dimensional heat solve.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SurfaceFluxTrace {
    pub times: Vec<f64>,
    /// `inner[m][j]`: inward normal derivative at φ_j after step m.
    pub inner: Option<Vec<Vec<f64>>>,
    pub outer: Option<Vec<Vec<f64>>>,
    /// Largest max − min over φ on any Dirichlet ring, per time.
    pub spread: Vec<f64>,
}

impl SurfaceFluxTrace {
    pub fn index_near(&self, t: f64) -> Option<usize> {
        self.times.iter().enumerate().min_by(|a, b| (a.1 - t).abs().total_cmp(&(b.1 - t).abs())).map(|(i, _)| i)
    }

    pub fn spread_near(&self, t: f64) -> Option<f64> {
        self.index_near(t).map(|i| self.spread[i])
    }

    pub fn spread_max(&self) -> f64 {
        self.spread.iter().fold(0.0, |m, s| m.max(*s))
    }

    pub fn samples(&self, ring: Ring) -> Option<&Vec<Vec<f64>>> {
        match ring {
            Ring::Inner => self.inner.as_ref(),
            Ring::Outer => self.outer.as_ref(),
        }
    }

    /// Mean over φ of the flux on one ring, per time.
    pub fn ring_average(&self, ring: Ring) -> Option<Vec<f64>> {
        self.samples(ring).map(|s| s.iter().map(|row| row.iter().sum::<f64>() / row.len() as f64).collect())
    }

    /// CSV with header `t,phi_index,flux` for one ring.
    pub fn to_csv(&self, ring: Ring) -> Option<String> {
        let samples = self.samples(ring)?;
        let mut out = String::from("t,phi_index,flux\n");
        for (t, row) in self.times.iter().zip(samples) {
            for (j, f) in row.iter().enumerate() {
                out.push_str(&format!("{t:.16e},{j},{f:.16e}\n"));
            }
        }
        Some(out)
    }
}

/// Crank–Nicolson heat flow on a revolution chart, with the same
/// backward-Euler start as the radial solver.
pub fn solve_heat_2d(
    g: &SurfaceGrid,
    u0: &SurfaceField,
    dt: f64,
    t_final: f64,
) -> Result<(SurfaceField, SurfaceFluxTrace)> {
    solve_heat_2d_with(g, u0, dt, t_final, HeatOptions::default())
}

pub fn solve_heat_2d_with(
    g: &SurfaceGrid,
    u0: &SurfaceField,
    dt: f64,
    t_final: f64,
    opts: HeatOptions,
) -> Result<(SurfaceField, SurfaceFluxTrace)> {
    g.check(u0)?;
    let width = g.metric().r_max() - g.metric().r_min();
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(invalid("dt", format!("time step must be positive, got {dt}")));
    }
    if dt > width * width / 4.0 {
        return Err(invalid("dt", format!("time step {dt} exceeds the accuracy guard {}", width * width / 4.0)));
    }
    if !(t_final.is_finite() && t_final >= dt * (1.0 - 1e-12)) {
        return Err(invalid("T", format!("final time {t_final} must be at least dt = {dt}")));
    }
    if u0.values.iter().any(|v| !v.is_finite()) {
        return Err(invalid("u0", "initial field contains non-finite values"));
    }
    let steps = ((t_final / dt).round() as usize).max(1);
    let dt = t_final / steps as f64;
    // Both the half-step backward Euler and Crank–Nicolson solve with M + (dt/2)A.
    let solver = SystemSolver::new(g, 1.0, 0.5 * dt);
    let mut u = u0.clone();
    let mut rhs = vec![0.0; g.len()];
    let mut trace = SurfaceFluxTrace {
        times: Vec::with_capacity(steps),
        inner: g.metric().boundary().inner_dirichlet.then(Vec::new),
        outer: g.metric().boundary().outer_dirichlet.then(Vec::new),
        spread: Vec::with_capacity(steps),
    };
    let mut next = u.values.clone();
    for m in 0..steps {
        let t = (m + 1) as f64 * dt;
        let substeps: &[f64] = if m < opts.startup_steps { &[0.0, 0.0] } else { &[-0.5 * dt] };
        for &explicit in substeps {
            apply_system(g, 1.0, explicit, &u.values, &mut rhs);
            next.copy_from_slice(&u.values);
            solver.solve(&rhs, &mut next)?;
            std::mem::swap(&mut u.values, &mut next);
        }
        if u.values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { step: m + 1, time: t });
        }
        let mut spread: f64 = 0.0;
        if let Some(v) = trace.inner.as_mut() {
            let f = g.inner_flux(&u).expect("inner ring is Dirichlet");
            spread = spread.max(ring_spread(&f));
            v.push(f);
        }
        if let Some(v) = trace.outer.as_mut() {
            let f = g.outer_flux(&u).expect("outer ring is Dirichlet");
            spread = spread.max(ring_spread(&f));
            v.push(f);
        }
        trace.times.push(t);
        trace.spread.push(spread);
    }
    u.time = u0.time + t_final;
    Ok((u, trace))
}

/// Mean exit time on a chart and its Serrin diagnostics.
#[derive(Debug, Clone)]
pub struct ExitTime2d {
    pub v: SurfaceField,
    /// max − min of ∂v/∂ν over every boundary sample.
    pub serrin_deviation: f64,
    /// Cell (i, j) where v is largest.
    pub argmax: (usize, usize),
    pub argmax_r: f64,
    pub argmax_phi: f64,
    pub inner_flux: Option<Vec<f64>>,
    pub outer_flux: Option<Vec<f64>>,
    pub iterations: usize,
}

/// Solves Δv = 1 with the chart's Dirichlet rings by preconditioned
/// conjugate gradients on the symmetric form A v = M 1.
pub fn exit_time_2d(g: &SurfaceGrid) -> Result<ExitTime2d> {
    let solver = SystemSolver::new(g, 0.0, 1.0);
    let b: Vec<f64> =
        (0..g.nr()).flat_map(|i| (0..g.nphi()).map(move |j| (i, j))).map(|(i, j)| g.measure(i, j)).collect();
    let mut x = vec![0.0; g.len()];
    let iterations = solver.solve(&b, &mut x)?;
    let v = SurfaceField { nr: g.nr(), nphi: g.nphi(), values: x, time: 0.0 };
    let inner_flux = g.inner_flux(&v);
    let outer_flux = g.outer_flux(&v);
    let all: Vec<f64> = inner_flux.iter().chain(outer_flux.iter()).flatten().copied().collect();
    let serrin_deviation = ring_spread(&all);
    let k = v.values.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).map(|(k, _)| k).unwrap_or(0);
    let argmax = (k / g.nphi(), k % g.nphi());
    Ok(ExitTime2d {
        argmax_r: g.radii()[argmax.0],
        argmax_phi: g.phi(argmax.1),
        v,
        serrin_deviation,
        argmax,
        inner_flux,
        outer_flux,
        iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{make_revolution_metric, BoundarySpec, MetricKind, Warp};
    use crate::radial::{
        solve_exit_time_fv, solve_radial_heat, BoundaryCondition, RadialField, WeightedIntervalProblem,
    };
    use std::f64::consts::FRAC_PI_2;
    use std::sync::Arc;

    fn flat_annulus(nr: usize, nphi: usize) -> SurfaceGrid {
        let m = make_revolution_metric(MetricKind::Radial(Warp::Flat), (1.0, 2.0), BoundarySpec::BOTH).unwrap();
        SurfaceGrid::new(m, nr, nphi).unwrap()
    }

    fn annulus_problem() -> WeightedIntervalProblem {
        WeightedIntervalProblem::from_fn(
            1.0,
            2.0,
            Arc::new(|x| x),
            BoundaryCondition::Dirichlet,
            BoundaryCondition::Dirichlet,
        )
        .unwrap()
    }

    #[test]
    fn annulus_exit_time_matches_radial_solver() {
        let g = flat_annulus(128, 16);
        let et = exit_time_2d(&g).unwrap();
        let one = solve_exit_time_fv(&annulus_problem(), 128).unwrap();
        for (i, want) in one.field.values.iter().enumerate() {
            assert!((et.v.at(i, 7) - want).abs() < 1e-9);
        }
        assert!(et.serrin_deviation > 0.1);
    }

    #[test]
    fn cap_exit_time_peaks_at_the_pole() {
        let m =
            make_revolution_metric(MetricKind::Radial(Warp::Sphere), (1e-3, FRAC_PI_2), BoundarySpec::OUTER).unwrap();
        let g = SurfaceGrid::new(m, 32, 32).unwrap();
        let et = exit_time_2d(&g).unwrap();
        assert_eq!(et.argmax.0, 0);
        assert!(et.serrin_deviation < 1e-9, "{}", et.serrin_deviation);
    }

    #[test]
    fn heat_matches_radial_solver_on_flat_annulus() {
        let g = flat_annulus(64, 16);
        let (_, tr2) = solve_heat_2d(&g, &g.constant(1.0), 1e-3, 0.05).unwrap();
        let u0 = RadialField::constant(1.0, 2.0, 64, 1.0).unwrap();
        let (_, tr1) = solve_radial_heat(&annulus_problem(), &u0, 1e-3, 0.05).unwrap();
        let a = tr2.ring_average(Ring::Inner).unwrap();
        let b = tr1.flux_at_x0.unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-8 * y.abs(), "{x} vs {y}");
        }
        assert!(tr2.spread_max() < 1e-9);
    }

    #[test]
    fn heat_rejects_bad_input() {
        let g = flat_annulus(16, 16);
        assert!(solve_heat_2d(&g, &g.constant(1.0), 0.0, 1.0).is_err());
        assert!(solve_heat_2d(&g, &g.constant(1.0), 1.0, 1.0).is_err());
        let bad = SurfaceField { nr: 4, nphi: 4, values: vec![0.0; 16], time: 0.0 };
        assert!(solve_heat_2d(&g, &bad, 1e-3, 1e-2).is_err());
    }

    #[test]
    fn flux_csv_layout() {
        let g = flat_annulus(16, 16);
        let (_, tr) = solve_heat_2d(&g, &g.constant(1.0), 1e-3, 2e-3).unwrap();
        let csv = tr.to_csv(Ring::Outer).unwrap();
        assert!(csv.starts_with("t,phi_index,flux\n"));
        assert_eq!(csv.lines().count(), 1 + 2 * 16);
    }
}
