use crate::error::{invalid, Error, Result};
use crate::linalg::solve_tridiagonal;
use crate::radial::problem::{discretize, RadialField, RadialOperator, WeightedIntervalProblem};

/// Boundary normal-derivative samples of a heat solve.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FluxTrace {
    pub times: Vec<f64>,
    /// Inward normal derivative at x0, present when x0 is a Dirichlet end.
    pub flux_at_x0: Option<Vec<f64>>,
    /// Inward normal derivative at x1, present when x1 is a Dirichlet end.
    pub flux_at_x1: Option<Vec<f64>>,
    /// Angular spread of the flux at each time; identically zero for the
    /// one-dimensional solver.
    pub spread: Vec<f64>,
    /// Weighted heat content Σ θ_i h u_i after each step.
    pub heat_content: Vec<f64>,
    /// (min, max) of the field after each step.
    pub extremes: Vec<(f64, f64)>,
}

impl FluxTrace {
    /// Index of the recorded time closest to `t`.
    pub fn index_near(&self, t: f64) -> Option<usize> {
        self.times.iter().enumerate().min_by(|a, b| (a.1 - t).abs().total_cmp(&(b.1 - t).abs())).map(|(i, _)| i)
    }

    /// Flux at x0 at the recorded time closest to `t`.
    pub fn flux_x0_near(&self, t: f64) -> Option<f64> {
        let i = self.index_near(t)?;
        self.flux_at_x0.as_ref().map(|f| f[i])
    }

    /// Flux at x1 at the recorded time closest to `t`.
    pub fn flux_x1_near(&self, t: f64) -> Option<f64> {
        let i = self.index_near(t)?;
        self.flux_at_x1.as_ref().map(|f| f[i])
    }

    pub fn spread_max(&self) -> f64 {
        self.spread.iter().fold(0.0, |m, s| m.max(*s))
    }

    /// CSV with header `t,flux_x0[,flux_x1]`; only Dirichlet ends get a column.
    pub fn to_csv(&self) -> String {
        let mut header = vec!["t"];
        if self.flux_at_x0.is_some() {
            header.push("flux_x0");
        }
        if self.flux_at_x1.is_some() {
            header.push("flux_x1");
        }
        let mut out = header.join(",");
        out.push('\n');
        for (i, t) in self.times.iter().enumerate() {
            let mut row = vec![format!("{t:.16e}")];
            if let Some(f) = &self.flux_at_x0 {
                row.push(format!("{:.16e}", f[i]));
            }
            if let Some(f) = &self.flux_at_x1 {
                row.push(format!("{:.16e}", f[i]));
            }
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

/// Time-stepping options for [`solve_radial_heat_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeatOptions {
    /// Number of leading Crank–Nicolson steps replaced by two backward-Euler
    /// half steps each, damping the stiff modes excited by incompatible data.
    pub startup_steps: usize,
}

impl Default for HeatOptions {
    fn default() -> Self {
        Self { startup_steps: 2 }
    }
}

/// Default step count per unit horizon: dt = T/2000.
pub const DEFAULT_STEPS: usize = 2000;

/// Crank–Nicolson heat flow ∂u/∂t = (1/θ)(θu')' from `u0` up to time `t_final`.
pub fn solve_radial_heat(
    p: &WeightedIntervalProblem,
    u0: &RadialField,
    dt: f64,
    t_final: f64,
) -> Result<(RadialField, FluxTrace)> {
    solve_radial_heat_with(p, u0, dt, t_final, HeatOptions::default())
}

pub fn solve_radial_heat_with(
    p: &WeightedIntervalProblem,
    u0: &RadialField,
    dt: f64,
    t_final: f64,
    opts: HeatOptions,
) -> Result<(RadialField, FluxTrace)> {
    let width = p.x1() - p.x0();
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(invalid("dt", format!("time step must be positive, got {dt}")));
    }
    if dt > width * width / 4.0 {
        return Err(invalid("dt", format!("time step {dt} exceeds the accuracy guard {}", width * width / 4.0)));
    }
    if !(t_final.is_finite() && t_final >= dt * (1.0 - 1e-12)) {
        return Err(invalid("T", format!("final time {t_final} must be at least dt = {dt}")));
    }
    if (u0.x0 - p.x0()).abs() > 1e-12 * width || (u0.x1 - p.x1()).abs() > 1e-12 * width {
        return Err(invalid("u0", "initial field lives on a different interval"));
    }
    if u0.values.iter().any(|v| !v.is_finite()) {
        return Err(invalid("u0", "initial field contains non-finite values"));
    }
    let op = discretize(p, u0.len())?;
    let steps = ((t_final / dt).round() as usize).max(1);
    let dt = t_final / steps as f64;

    let cn = Stepper::new(&op, dt, 0.5);
    let be = Stepper::new(&op, 0.5 * dt, 1.0);

    let mut u = u0.values.clone();
    let mut trace = FluxTrace {
        times: Vec::with_capacity(steps),
        flux_at_x0: op.boundary_fluxes(&u).0.map(|_| Vec::with_capacity(steps)),
        flux_at_x1: op.boundary_fluxes(&u).1.map(|_| Vec::with_capacity(steps)),
        spread: Vec::with_capacity(steps),
        heat_content: Vec::with_capacity(steps),
        extremes: Vec::with_capacity(steps),
    };
    let masses = op.masses();
    for m in 0..steps {
        if m < opts.startup_steps {
            u = be.step(&op, &u);
            u = be.step(&op, &u);
        } else {
            u = cn.step(&op, &u);
        }
        let t = (m + 1) as f64 * dt;
        if u.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { step: m + 1, time: t });
        }
        let (f0, f1) = op.boundary_fluxes(&u);
        trace.times.push(t);
        if let (Some(v), Some(f)) = (trace.flux_at_x0.as_mut(), f0) {
            v.push(f);
        }
        if let (Some(v), Some(f)) = (trace.flux_at_x1.as_mut(), f1) {
            v.push(f);
        }
        trace.spread.push(0.0);
        trace.heat_content.push(masses.iter().zip(&u).map(|(m, v)| m * v).sum());
        trace.extremes.push(u.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(*v), hi.max(*v))));
    }
    let field = RadialField { x0: u0.x0, x1: u0.x1, values: u, time: u0.time + t_final };
    Ok((field, trace))
}

/// One-step θ-scheme (I + τ·w·L) u⁺ = (I − τ(1−w)L) u.
struct Stepper {
    tau: f64,
    implicit: f64,
    lower: Vec<f64>,
    diag: Vec<f64>,
    upper: Vec<f64>,
}

impl Stepper {
    fn new(op: &RadialOperator, tau: f64, implicit: f64) -> Self {
        let s = tau * implicit;
        Self {
            tau,
            implicit,
            lower: op.lower.iter().map(|v| s * v).collect(),
            diag: op.diag.iter().map(|v| 1.0 + s * v).collect(),
            upper: op.upper.iter().map(|v| s * v).collect(),
        }
    }

    fn step(&self, op: &RadialOperator, u: &[f64]) -> Vec<f64> {
        let explicit = self.tau * (1.0 - self.implicit);
        let mut rhs: Vec<f64> = if explicit == 0.0 {
            u.to_vec()
        } else {
            op.apply(u).iter().zip(u).map(|(lu, ui)| ui - explicit * lu).collect()
        };
        solve_tridiagonal(&self.lower, &self.diag, &self.upper, &mut rhs);
        rhs
    }
}
