use rayon::prelude::*;

use crate::error::{invalid, Result};
use crate::surface::grid::{SurfaceField, SurfaceGrid};

/// Applies `c_mass·M + c_stiff·A` ring by ring.
pub(crate) fn apply_system(g: &SurfaceGrid, c_mass: f64, c_stiff: f64, f: &[f64], out: &mut [f64]) {
    out.par_chunks_mut(g.nphi()).enumerate().for_each(|(i, ring)| g.apply_ring(c_mass, c_stiff, f, i, ring));
}

/// Geometer's Laplace–Beltrami operator
/// Δf = −(1/θ)[∂_r(θ ∂_r f) + ∂_φ((1/θ) ∂_φ f)] in conservative form, with
/// homogeneous Dirichlet ghosts on Dirichlet rings and zero flux elsewhere.
pub fn laplace_beltrami_apply(g: &SurfaceGrid, f: &SurfaceField) -> Result<SurfaceField> {
    g.check(f)?;
    let mut values = vec![0.0; g.len()];
    apply_system(g, 0.0, 1.0, &f.values, &mut values);
    for i in 0..g.nr() {
        for j in 0..g.nphi() {
            values[i * g.nphi() + j] /= g.measure(i, j);
        }
    }
    Ok(SurfaceField { nr: f.nr, nphi: f.nphi, values, time: f.time })
}

/// θ-weighted ring average 𝒜f, written as f₀ + Σθ(f − f₀)/Σθ so that
/// radial fields are reproduced bit for bit.
pub fn radialize(g: &SurfaceGrid, f: &SurfaceField) -> Result<SurfaceField> {
    g.check(f)?;
    let n = g.nphi();
    let mut values = vec![0.0; g.len()];
    values.par_chunks_mut(n).enumerate().for_each(|(i, out)| {
        let ring = f.ring(i);
        let base = ring[0];
        let mut num = 0.0;
        let mut den = 0.0;
        for (j, v) in ring.iter().enumerate() {
            let t = g.theta_at(i, j);
            num += t * (v - base);
            den += t;
        }
        out.fill(base + num / den);
    });
    Ok(SurfaceField { nr: f.nr, nphi: f.nphi, values, time: f.time })
}

/// Max-norm of Δ(𝒜f) − 𝒜(Δf) over rings not adjacent to the chart edges.
pub fn commutation_residual(g: &SurfaceGrid, f: &SurfaceField) -> Result<f64> {
    let lhs = laplace_beltrami_apply(g, &radialize(g, f)?)?;
    let rhs = radialize(g, &laplace_beltrami_apply(g, f)?)?;
    let n = g.nphi();
    let lo = n;
    let hi = (g.nr() - 1) * n;
    Ok(lhs.values[lo..hi].iter().zip(&rhs.values[lo..hi]).fold(0.0, |m, (a, b)| m.max((a - b).abs())))
}

/// Both sides of d/dr ∫_{ring} f = ∫_{ring} (∂_r f − f Δρ) at one ring.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LevelCheck {
    pub ring: usize,
    pub r: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
}

/// Level-set derivative identity at the ring nearest to `r`, with ρ the r
/// coordinate and Δρ = −∂_r θ/θ. Only radial metrics qualify.
pub fn level_derivative_check(g: &SurfaceGrid, f: &SurfaceField, r: f64) -> Result<LevelCheck> {
    g.check(f)?;
    if !g.metric().is_radial() {
        return Err(invalid("metric", "the level-set identity needs r to be a distance function (radial metric)"));
    }
    let m = g.metric();
    if !(r > m.r_min() && r < m.r_max()) {
        return Err(invalid("r", format!("must lie inside ({}, {}), got {r}", m.r_min(), m.r_max())));
    }
    let ring = (((r - m.r_min()) / g.hr() - 0.5).round().max(0.0) as usize).min(g.nr() - 1);
    if ring == 0 || ring + 1 == g.nr() {
        return Err(invalid("r", format!("ring {ring} touches the chart edge; pick an interior radius")));
    }
    let n = g.nphi();
    let hp = g.hphi();
    let level = |i: usize| (0..n).map(|j| f.at(i, j) * g.theta_at(i, j)).sum::<f64>() * hp;
    let lhs = (level(ring + 1) - level(ring - 1)) / (2.0 * g.hr());
    let ri = g.radii()[ring];
    let theta_r = m.theta_r_radial(ri);
    let rhs = (0..n)
        .map(|j| {
            let dr = (f.at(ring + 1, j) - f.at(ring - 1, j)) / (2.0 * g.hr());
            let t = g.theta_at(ring, j);
            // (∂_r f − f Δρ) θ with Δρ = −θ_r/θ
            dr * t + f.at(ring, j) * theta_r
        })
        .sum::<f64>()
        * hp;
    Ok(LevelCheck { ring, r: ri, lhs, rhs, residual: (lhs - rhs).abs() })
}

/// Largest level-identity residual over all rings not touching the chart
/// edges.
pub fn level_derivative_sup(g: &SurfaceGrid, f: &SurfaceField) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for i in 1..g.nr() - 1 {
        worst = worst.max(level_derivative_check(g, f, g.radii()[i])?.residual);
    }
    Ok(worst)
}
