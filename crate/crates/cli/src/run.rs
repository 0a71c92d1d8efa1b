//! Executes a parsed configuration and writes its artifacts.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use rayon::prelude::*;

use isoflow_core::convergence::Convergence;
use isoflow_core::geometry::{estimate_focal_order, soul_minimality_check, FocalType, TubeProfile};
use isoflow_core::minimal_surface::{harmonic_identity_check, residuals_to_csv, HarmonicResidual};
use isoflow_core::radial::{
    radial_dirichlet_spectrum, radial_dirichlet_spectrum_extrapolated, solve_exit_time, solve_exit_time_fv,
    solve_radial_heat, BoundaryCondition, RadialField, WeightedIntervalProblem,
};
use isoflow_core::surface::{
    commutation_residual, exit_time_2d, level_derivative_sup, solve_heat_2d, Ring, SurfaceGrid,
};

use crate::config::{Expectation, Experiment, GeometrySpec, Numeric, RunConfig, Thresholds};

/// Test field sampled at (r, φ).
type Field = fn(f64, f64) -> f64;

/// Outcome of one run: summary entries, named checks and CSV artifacts.
#[derive(Debug, Default, Clone, PartialEq)]
pub struct Report {
    pub entries: Vec<(String, String)>,
    pub checks: Vec<(String, bool)>,
    pub files: Vec<(String, String)>,
}

impl Report {
    fn value(&mut self, key: &str, v: impl ToString) {
        self.entries.push((key.to_string(), v.to_string()));
    }

    fn check(&mut self, name: &str, ok: bool) {
        self.checks.push((name.to_string(), ok));
    }

    fn file(&mut self, name: &str, contents: String) {
        self.files.push((name.to_string(), contents));
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|(_, ok)| *ok)
    }
}

fn list(v: &[f64]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

fn interval_problem(g: &GeometrySpec) -> Result<Option<WeightedIntervalProblem>> {
    use BoundaryCondition::Dirichlet;
    Ok(match g {
        GeometrySpec::Profile(p) => Some(p.build()?.interval_problem()),
        GeometrySpec::Interval { length } => {
            Some(WeightedIntervalProblem::uniform(0.0, *length, Dirichlet, Dirichlet)?)
        }
        GeometrySpec::Annulus { inner, outer } => {
            Some(WeightedIntervalProblem::from_fn(*inner, *outer, Arc::new(|r| r), Dirichlet, Dirichlet)?)
        }
        _ => None,
    })
}

fn profile(g: &GeometrySpec) -> Result<TubeProfile> {
    match g {
        GeometrySpec::Profile(p) => Ok(p.build()?),
        other => bail!("geometry `{}` is not a tube profile", other.name()),
    }
}

fn grid(g: &GeometrySpec, nr: usize, nphi: usize) -> Result<SurfaceGrid> {
    match g {
        GeometrySpec::Revolution(r) => Ok(SurfaceGrid::new(r.build()?, nr, nphi)?),
        other => bail!("geometry `{}` is not a revolution chart", other.name()),
    }
}

/// Both levels agree to within `tol` relative and every value exceeds `min`.
fn stable_above(values: &[f64], min: f64, tol: f64) -> bool {
    values.iter().all(|v| *v > min) && values.windows(2).all(|w| (w[1] - w[0]).abs() <= tol * w[1].abs())
}

fn heat_flow(cfg: &RunConfig, num: &Numeric, r: &mut Report) -> Result<()> {
    let th = &cfg.thresholds;
    let dt = num.time_step();
    r.value("T", num.t);
    r.value("dt", dt);
    let (spread_max, spread_end) = if let Some(p) = interval_problem(&cfg.geometry)? {
        let u0 = RadialField::constant(p.x0(), p.x1(), num.n, 1.0)?;
        let (_, trace) = solve_radial_heat(&p, &u0, dt, num.t)?;
        r.value("N", num.n);
        r.value("steps", trace.times.len());
        let last = trace.times.len() - 1;
        // with two Dirichlet ends the flux must agree across them
        let spread: Vec<f64> = match (&trace.flux_at_x0, &trace.flux_at_x1) {
            (Some(a), Some(b)) => a.iter().zip(b).map(|(x, y)| (x - y).abs()).collect(),
            _ => vec![0.0; trace.times.len()],
        };
        if let Some(f) = &trace.flux_at_x0 {
            r.value("flux_x0_at_T", f[last]);
        }
        if let Some(f) = &trace.flux_at_x1 {
            r.value("flux_x1_at_T", f[last]);
        }
        r.value("heat_content_at_T", trace.heat_content[last]);
        let lo = trace.extremes.iter().map(|e| e.0).fold(f64::INFINITY, f64::min);
        let hi = trace.extremes.iter().map(|e| e.1).fold(f64::NEG_INFINITY, f64::max);
        r.value("field_min", lo);
        r.value("field_max", hi);
        r.check("maximum_principle", lo >= -th.roundoff && hi <= 1.0 + th.roundoff);
        r.check("heat_loss_monotone", trace.heat_content.windows(2).all(|w| w[1] <= w[0] * (1.0 + th.roundoff)));
        r.file("flux.csv", trace.to_csv());
        (spread.iter().cloned().fold(0.0, f64::max), spread[last])
    } else {
        let g = grid(&cfg.geometry, num.nr, num.nphi)?;
        let (_, trace) = solve_heat_2d(&g, &g.constant(1.0), dt, num.t)?;
        r.value("Nr", num.nr);
        r.value("Nphi", num.nphi);
        r.value("steps", trace.times.len());
        let last = trace.times.len() - 1;
        for (ring, key, file) in
            [(Ring::Inner, "flux_inner_at_T", "flux_inner.csv"), (Ring::Outer, "flux_outer_at_T", "flux_outer.csv")]
        {
            if let Some(avg) = trace.ring_average(ring) {
                r.value(key, avg[last]);
            }
            if let Some(csv) = trace.to_csv(ring) {
                r.file(file, csv);
            }
        }
        let mut csv = String::from("t,spread\n");
        for (t, s) in trace.times.iter().zip(&trace.spread) {
            let _ = writeln!(csv, "{t:.16e},{s:.16e}");
        }
        r.file("spread.csv", csv);
        (trace.spread_max(), trace.spread[last])
    };
    r.value("spread_max", spread_max);
    r.value("spread_at_T", spread_end);
    match cfg.expect {
        Expectation::Constant => r.check("constant_flow", spread_max <= th.spread_tol),
        Expectation::Nonconstant => r.check("nonconstant_flow", spread_end >= th.spread_min),
    }
    Ok(())
}

fn serrin_check(r: &mut Report, th: &Thresholds, expect: Expectation, deviation: f64) {
    r.value("serrin_deviation", deviation);
    match expect {
        Expectation::Constant => r.check("constant_boundary_derivative", deviation <= th.serrin_tol),
        Expectation::Nonconstant => r.check("nonconstant_boundary_derivative", deviation >= th.serrin_min),
    }
}

fn exit_time(cfg: &RunConfig, num: &Numeric, r: &mut Report) -> Result<()> {
    let th = &cfg.thresholds;
    match &cfg.geometry {
        GeometrySpec::Profile(_) => {
            let p = profile(&cfg.geometry)?;
            let e = solve_exit_time(&p)?;
            let limit = isoflow_core::radial::exit_time_curvature_limit(&p)?;
            let expected = match p.focal_type() {
                FocalType::VanishingOrder(d) => -1.0 / (d as f64 + 1.0),
                FocalType::TwoSidedSoul => -1.0,
            };
            r.value("psi_max", e.max_value());
            r.value("curvature_limit", limit);
            r.value("curvature_limit_expected", expected);
            r.check("curvature_limit", (limit - expected).abs() <= th.curvature_tol);
            let rr = p.inner_radius();
            let mut csv = String::from("rho,psi,psi_prime\n");
            for i in 0..=num.n {
                let rho = rr * i as f64 / num.n as f64;
                let _ = writeln!(csv, "{rho:.16e},{:.16e},{:.16e}", e.psi(rho), e.psi_prime(rho));
            }
            r.file("exit_time.csv", csv);
        }
        GeometrySpec::Interval { .. } | GeometrySpec::Annulus { .. } => {
            let p = interval_problem(&cfg.geometry)?.expect("interval geometry");
            let s = solve_exit_time_fv(&p, num.n)?;
            let (a, b) = (s.flux_at_x0.unwrap_or(f64::NAN), s.flux_at_x1.unwrap_or(f64::NAN));
            r.value("N", num.n);
            r.value("inner_derivative", a);
            r.value("outer_derivative", b);
            r.value("v_max", s.field.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max));
            serrin_check(r, th, cfg.expect, (a - b).abs());
            let mut csv = String::from("x,v\n");
            for (x, v) in s.field.centers().iter().zip(&s.field.values) {
                let _ = writeln!(csv, "{x:.16e},{v:.16e}");
            }
            r.file("exit_time.csv", csv);
        }
        GeometrySpec::Revolution(_) => {
            let g = grid(&cfg.geometry, num.nr, num.nphi)?;
            let e = exit_time_2d(&g)?;
            r.value("Nr", num.nr);
            r.value("Nphi", num.nphi);
            r.value("cg_iterations", e.iterations);
            r.value("argmax_r", e.argmax_r);
            r.value("argmax_phi", e.argmax_phi);
            let mean = |v: &Option<Vec<f64>>| v.as_ref().map(|v| v.iter().sum::<f64>() / v.len() as f64);
            if let Some(m) = mean(&e.inner_flux) {
                r.value("inner_derivative", m);
            }
            if let Some(m) = mean(&e.outer_flux) {
                r.value("outer_derivative", m);
            }
            serrin_check(r, th, cfg.expect, e.serrin_deviation);
            r.file("exit_time.csv", e.v.to_csv(&g));
        }
        GeometrySpec::Surface(_) => bail!("exit-time does not apply to parametric surfaces"),
    }
    Ok(())
}

fn spectrum(cfg: &RunConfig, num: &Numeric, r: &mut Report) -> Result<()> {
    let p = interval_problem(&cfg.geometry)?.context("spectrum needs a one-dimensional geometry")?;
    let s = if num.extrapolate {
        radial_dirichlet_spectrum_extrapolated(&p, num.n, num.k)?
    } else {
        radial_dirichlet_spectrum(&p, num.n, num.k)?
    };
    r.value("N", num.n);
    r.value("k", num.k);
    r.value("extrapolated", num.extrapolate);
    r.value("eigenvalues", list(&s.eigenvalues));
    r.value("boundary_fluxes", list(&s.boundary_fluxes));
    r.value("warnings", s.warnings.len());
    r.check("witnesses_nonzero", s.witnesses_nonzero());
    r.check("eigenvalues_increasing", s.eigenvalues.windows(2).all(|w| w[0] < w[1]));
    r.file("spectrum.csv", s.to_csv());
    Ok(())
}

fn commute(cfg: &RunConfig, num: &Numeric, r: &mut Report) -> Result<()> {
    let th = &cfg.thresholds;
    let mut radial = Vec::new();
    let mut mixed = Vec::new();
    let mut scales = Vec::new();
    let mut csv = String::from("Nr,Nphi,grid_h,radial_residual,residual,roundoff_scale\n");
    for level in 0..num.levels {
        let (nr, np) = (num.nr << level, num.nphi << level);
        let g = grid(&cfg.geometry, nr, np)?;
        let a = commutation_residual(&g, &g.sample(|r, _| r * r + r.cos()))?;
        let f = g.sample(|r, p| r * p.cos() + r.sin() * (2.0 * p).sin());
        let b = commutation_residual(&g, &f)?;
        let s = g.roundoff_scale(&f);
        let _ = writeln!(csv, "{nr},{np},{:.16e},{a:.16e},{b:.16e},{s:.16e}", g.hr());
        radial.push(a);
        mixed.push(b);
        scales.push(s);
    }
    r.value("radial_residuals", list(&radial));
    r.value("residuals", list(&mixed));
    r.value("roundoff_scales", list(&scales));
    match cfg.expect {
        Expectation::Constant => {
            r.check("radial_field_exact", radial.iter().all(|v| *v == 0.0));
            let at_roundoff = mixed.iter().zip(&scales).all(|(v, s)| v <= s);
            let rate = Convergence::classify(&mixed, 0.0);
            r.value("rate", &rate);
            r.check("commutes", at_roundoff || rate.within(th.min_rate, th.max_rate));
        }
        Expectation::Nonconstant => {
            r.check("fails_to_commute", stable_above(&mixed, th.commute_min, th.stability));
        }
    }
    r.file("commute.csv", csv);
    Ok(())
}

fn level_identity(cfg: &RunConfig, num: &Numeric, r: &mut Report) -> Result<()> {
    let th = &cfg.thresholds;
    let fields: [(&str, Field); 3] = [
        ("cos_r", |r, _| r.cos()),
        ("r2_one_plus_cos_phi", |r, p| r * r * (1.0 + p.cos())),
        ("exp_r_plus_sin_r_cos_2phi", |r, p| r.exp() + r.sin() * (2.0 * p).cos()),
    ];
    let mut csv = String::from("grid_h,field,residual\n");
    for (name, f) in fields {
        let mut errs = Vec::new();
        for level in 0..num.levels {
            let g = grid(&cfg.geometry, num.nr << level, num.nphi)?;
            let e = level_derivative_sup(&g, &g.sample(f))?;
            let _ = writeln!(csv, "{:.16e},{name},{e:.16e}", g.hr());
            errs.push(e);
        }
        let c = Convergence::classify(&errs, th.roundoff);
        r.value(&format!("{name}.residuals"), list(&errs));
        r.value(&format!("{name}.rate"), &c);
        r.check(&format!("{name}.converges"), c.at_least(th.min_rate));
    }
    r.file("level.csv", csv);
    Ok(())
}

fn profile_csv(p: &TubeProfile, n: usize) -> String {
    let mut csv = String::from("rho,theta,eta\n");
    let rr = p.inner_radius();
    for i in 0..=n {
        let rho = rr * i as f64 / n as f64;
        let eta = p.eta(rho).unwrap_or(f64::NAN);
        let _ = writeln!(csv, "{rho:.16e},{:.16e},{eta:.16e}", p.theta(rho));
    }
    csv
}

fn focal_order(cfg: &RunConfig, num: &Numeric, r: &mut Report) -> Result<()> {
    let p = profile(&cfg.geometry)?;
    let fit = estimate_focal_order(&p)?;
    let declared = match p.focal_type() {
        FocalType::VanishingOrder(d) => d,
        FocalType::TwoSidedSoul => 0,
    };
    r.value("d_estimate", fit.d_estimate);
    r.value("c_estimate", fit.c_estimate);
    r.value("order", fit.order);
    r.value("declared_order", declared);
    r.value("fit_residual", fit.residual);
    r.value("invariant_violations", p.invariant_violations().len());
    r.check("order_matches", fit.order == declared);
    r.file("profile.csv", profile_csv(&p, num.n));
    Ok(())
}

fn soul_minimality(cfg: &RunConfig, num: &Numeric, r: &mut Report) -> Result<()> {
    let th = &cfg.thresholds;
    let p = profile(&cfg.geometry)?;
    let coeff = soul_minimality_check(&p)?;
    r.value("linear_coefficient", coeff);
    match cfg.expect {
        Expectation::Constant => r.check("soul_minimal", coeff.abs() < th.soul_tol),
        Expectation::Nonconstant => r.check("soul_not_minimal", coeff.abs() >= th.soul_tol),
    }
    r.file("profile.csv", profile_csv(&p, num.n));
    Ok(())
}

fn free_boundary(cfg: &RunConfig, num: &Numeric, r: &mut Report) -> Result<()> {
    let th = &cfg.thresholds;
    let GeometrySpec::Surface(spec) = cfg.geometry else {
        bail!("free-boundary needs a parametric surface");
    };
    let mut rows: Vec<HarmonicResidual> = Vec::new();
    let mut angle: f64 = 0.0;
    let mut curvature = 0.0;
    for level in 0..num.levels {
        let s = spec.build(num.n << level, num.nphi)?;
        rows.push(harmonic_identity_check(&s)?);
        angle = s.boundary_angle_max();
        curvature = s.mean_curvature_max();
    }
    let interior: Vec<f64> = rows.iter().map(|x| x.interior).collect();
    let boundary: Vec<f64> = rows.iter().map(|x| x.boundary).collect();
    r.value("interior_residuals", list(&interior));
    r.value("boundary_residuals", list(&boundary));
    r.value("boundary_angle", angle);
    r.value("mean_curvature_max", curvature);
    match cfg.expect {
        Expectation::Constant => {
            let ci = Convergence::classify(&interior, th.roundoff);
            let cb = Convergence::classify(&boundary, th.roundoff);
            r.value("interior_rate", &ci);
            r.value("boundary_rate", &cb);
            r.check("interior_converges", ci.at_least(th.min_rate));
            r.check("boundary_converges", cb.at_least(th.min_rate));
            r.check("orthogonal_contact", angle <= th.angle_tol);
        }
        Expectation::Nonconstant => {
            r.check("residual_bounded_away", stable_above(&interior, th.residual_min, th.stability));
        }
    }
    r.file("residuals.csv", residuals_to_csv(&rows));
    Ok(())
}

/// Runs the experiment once at the given resolutions.
pub fn execute(cfg: &RunConfig, num: &Numeric) -> Result<Report> {
    let mut r = Report::default();
    match cfg.experiment {
        Experiment::HeatFlow => heat_flow(cfg, num, &mut r)?,
        Experiment::ExitTime => exit_time(cfg, num, &mut r)?,
        Experiment::Spectrum => spectrum(cfg, num, &mut r)?,
        Experiment::Commute => commute(cfg, num, &mut r)?,
        Experiment::LevelIdentity => level_identity(cfg, num, &mut r)?,
        Experiment::FocalOrder => focal_order(cfg, num, &mut r)?,
        Experiment::SoulMinimality => soul_minimality(cfg, num, &mut r)?,
        Experiment::FreeBoundary => free_boundary(cfg, num, &mut r)?,
    }
    Ok(r)
}

/// Runs every sweep entry (concurrently), writes artifacts and
/// `summary.txt` into `out`, and returns whether every check passed.
pub fn run(cfg: &RunConfig, out: &Path, refine: u32) -> Result<bool> {
    let base = cfg.numeric.refined(refine);
    let factors = if cfg.sweep.is_empty() { vec![1] } else { cfg.sweep.clone() };
    let reports: Vec<Result<Report>> = factors.par_iter().map(|f| execute(cfg, &base.scaled(*f))).collect();

    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let mut summary = String::new();
    let _ = writeln!(summary, "experiment = {}", cfg.experiment.name());
    let _ = writeln!(summary, "geometry = {}", cfg.geometry.name());
    let _ = writeln!(
        summary,
        "expect = {}",
        match cfg.expect {
            Expectation::Constant => "constant",
            Expectation::Nonconstant => "nonconstant",
        }
    );
    let _ = writeln!(summary, "refine = {refine}");
    let mut all_passed = true;
    let mut failure = None;
    for (f, report) in factors.iter().zip(reports) {
        let (file_prefix, key_prefix) =
            if cfg.sweep.is_empty() { (String::new(), String::new()) } else { (format!("x{f}_"), format!("x{f}.")) };
        let report = match report {
            Ok(r) => r,
            Err(e) => {
                let _ = writeln!(summary, "{key_prefix}error = {e:#}");
                failure.get_or_insert(e);
                all_passed = false;
                continue;
            }
        };
        for (name, contents) in &report.files {
            let path = out.join(format!("{file_prefix}{name}"));
            fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))?;
        }
        for (k, v) in &report.entries {
            let _ = writeln!(summary, "{key_prefix}{k} = {v}");
        }
        for (k, ok) in &report.checks {
            let _ = writeln!(summary, "{key_prefix}check.{k} = {}", if *ok { "pass" } else { "fail" });
        }
        all_passed &= report.passed();
    }
    let _ = writeln!(summary, "verdict = {}", if all_passed { "pass" } else { "fail" });
    fs::write(out.join("summary.txt"), summary).context("writing summary.txt")?;
    if let Some(e) = failure {
        return Err(e.context("solver failure"));
    }
    Ok(all_passed)
}
