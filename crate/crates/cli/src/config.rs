//! Line-oriented run configuration.
//!
//! ```text
//! # comment
//! [geometry]
//! kind = ball
//! n = 3  R = 1.0
//! [experiment]
//! experiment = exit-time
//! ```
//!
//! Several `key = value` pairs may share a line, and a section header may be
//! followed by pairs on the same line. Values contain no whitespace; lists are
//! comma separated.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;

use isoflow_core::geometry::{
    make_annulus_side_profile, make_clifford_tube_profile, make_euclidean_ball_profile, make_revolution_metric,
    make_spherical_cap_profile, AnnulusSide, BoundarySpec, MetricKind, RevolutionMetric, TubeProfile, Warp,
};
use isoflow_core::minimal_surface::{
    make_critical_catenoid, make_flat_disk, make_spherical_cap_control, ParametricSurface,
};

/// One problem found while parsing, with its 1-based line (0 when the
/// problem is a missing key).
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub line: usize,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.line == 0 {
            write!(f, "{}", self.message)
        } else {
            write!(f, "line {}: {}", self.line, self.message)
        }
    }
}

/// All problems found in a configuration.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub struct ConfigErrors(pub Vec<ConfigError>);

impl fmt::Display for ConfigErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let lines: Vec<String> = self.0.iter().map(|e| e.to_string()).collect();
        write!(f, "invalid configuration:\n  {}", lines.join("\n  "))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProfileKind {
    Ball { n: usize },
    Cap { n: usize },
    Clifford,
    AnnulusSide(AnnulusSide),
}

/// Tube profile parameters; `size` is R, R0 or unused for annulus sides.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileSpec {
    pub kind: ProfileKind,
    pub size: f64,
    pub inner: f64,
    pub outer: f64,
}

impl ProfileSpec {
    pub fn build(&self) -> isoflow_core::Result<TubeProfile> {
        match self.kind {
            ProfileKind::Ball { n } => make_euclidean_ball_profile(n, self.size),
            ProfileKind::Cap { n } => make_spherical_cap_profile(n, self.size),
            ProfileKind::Clifford => make_clifford_tube_profile(self.size),
            ProfileKind::AnnulusSide(side) => make_annulus_side_profile(self.inner, self.outer, side),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RevolutionSpec {
    pub sphere: bool,
    pub r_min: f64,
    pub r_max: f64,
    pub boundary: BoundarySpec,
    pub epsilon: f64,
    pub mode: u32,
}

impl RevolutionSpec {
    pub fn build(&self) -> isoflow_core::Result<RevolutionMetric> {
        let warp = if self.sphere { Warp::Sphere } else { Warp::Flat };
        let kind = if self.epsilon == 0.0 {
            MetricKind::Radial(warp)
        } else {
            MetricKind::Perturbed { warp, epsilon: self.epsilon, mode: self.mode }
        };
        make_revolution_metric(kind, (self.r_min, self.r_max), self.boundary)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SurfaceSpec {
    Disk,
    Catenoid,
    Control,
}

impl SurfaceSpec {
    pub fn build(&self, nu: usize, nv: usize) -> isoflow_core::Result<ParametricSurface> {
        match self {
            SurfaceSpec::Disk => make_flat_disk(nu, nv),
            SurfaceSpec::Catenoid => make_critical_catenoid(nu, nv),
            SurfaceSpec::Control => make_spherical_cap_control(nu, nv),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum GeometrySpec {
    Profile(ProfileSpec),
    /// Segment [0, length] with Dirichlet ends.
    Interval {
        length: f64,
    },
    /// Planar annulus inner ≤ |x| ≤ outer in the radial variable.
    Annulus {
        inner: f64,
        outer: f64,
    },
    Revolution(RevolutionSpec),
    Surface(SurfaceSpec),
}

impl GeometrySpec {
    pub fn name(&self) -> &'static str {
        match self {
            GeometrySpec::Profile(p) => match p.kind {
                ProfileKind::Ball { .. } => "ball",
                ProfileKind::Cap { .. } => "cap",
                ProfileKind::Clifford => "clifford",
                ProfileKind::AnnulusSide(_) => "annulus-side",
            },
            GeometrySpec::Interval { .. } => "interval",
            GeometrySpec::Annulus { .. } => "annulus",
            GeometrySpec::Revolution(_) => "revolution",
            GeometrySpec::Surface(SurfaceSpec::Disk) => "disk",
            GeometrySpec::Surface(SurfaceSpec::Catenoid) => "catenoid",
            GeometrySpec::Surface(SurfaceSpec::Control) => "spherical-cap-control",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    HeatFlow,
    ExitTime,
    Spectrum,
    Commute,
    LevelIdentity,
    FocalOrder,
    SoulMinimality,
    FreeBoundary,
}

impl Experiment {
    const ALL: [(&'static str, Experiment); 8] = [
        ("heat-flow", Experiment::HeatFlow),
        ("exit-time", Experiment::ExitTime),
        ("spectrum", Experiment::Spectrum),
        ("commute", Experiment::Commute),
        ("level-identity", Experiment::LevelIdentity),
        ("focal-order", Experiment::FocalOrder),
        ("soul-minimality", Experiment::SoulMinimality),
        ("free-boundary", Experiment::FreeBoundary),
    ];

    pub fn name(&self) -> &'static str {
        Self::ALL.iter().find(|(_, e)| e == self).map(|(n, _)| *n).unwrap_or("?")
    }

    fn parse(s: &str) -> Option<Self> {
        Self::ALL.iter().find(|(n, _)| *n == s).map(|(_, e)| *e)
    }

    fn accepts(&self, g: &GeometrySpec) -> bool {
        use GeometrySpec as G;
        match self {
            Experiment::HeatFlow | Experiment::ExitTime => !matches!(g, G::Surface(_)),
            Experiment::Spectrum => matches!(g, G::Profile(_) | G::Interval { .. } | G::Annulus { .. }),
            Experiment::Commute => matches!(g, G::Revolution(_)),
            Experiment::LevelIdentity => matches!(g, G::Revolution(r) if r.epsilon == 0.0),
            Experiment::FocalOrder | Experiment::SoulMinimality => matches!(g, G::Profile(_)),
            Experiment::FreeBoundary => matches!(g, G::Surface(_)),
        }
    }
}

/// What the experiment is expected to show: the property holds (`constant`)
/// or the geometry is a counterexample (`nonconstant`).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Expectation {
    Constant,
    Nonconstant,
}

/// Grid and time-stepping parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Numeric {
    /// Cells of 1-D grids and u-cells of parametric surfaces.
    pub n: usize,
    pub nr: usize,
    pub nphi: usize,
    /// Time step; defaults to T/2000.
    pub dt: Option<f64>,
    pub t: f64,
    pub k: usize,
    /// Grid levels in refinement studies.
    pub levels: usize,
    pub extrapolate: bool,
}

impl Default for Numeric {
    fn default() -> Self {
        Self { n: 256, nr: 64, nphi: 64, dt: None, t: 0.1, k: 5, levels: 3, extrapolate: true }
    }
}

impl Numeric {
    /// Doubles every grid resolution `times` times.
    pub fn refined(&self, times: u32) -> Self {
        let f = 1usize << times;
        Self { n: self.n * f, nr: self.nr * f, nphi: self.nphi * f, ..self.clone() }
    }

    pub fn scaled(&self, factor: usize) -> Self {
        Self { n: self.n * factor, nr: self.nr * factor, nphi: self.nphi * factor, ..self.clone() }
    }

    pub fn time_step(&self) -> f64 {
        self.dt.unwrap_or(self.t / isoflow_core::radial::DEFAULT_STEPS as f64)
    }
}

/// Verdict thresholds. Defaults are documented per field.
#[derive(Debug, Clone, PartialEq)]
pub struct Thresholds {
    /// Flux spread counted as constant flow (1e-10).
    pub spread_tol: f64,
    /// Flux spread a counterexample must exceed (1e-3).
    pub spread_min: f64,
    /// Boundary-derivative spread counted as a Serrin domain (1e-8).
    pub serrin_tol: f64,
    /// Boundary-derivative spread a Serrin counterexample must exceed (0.1).
    pub serrin_min: f64,
    /// Lowest accepted observed order (1.8).
    pub min_rate: f64,
    /// Highest accepted observed order where one is bounded (2.2).
    pub max_rate: f64,
    /// Errors below this count as exact (1e-10).
    pub roundoff: f64,
    /// Curvature limit tolerance (1e-3).
    pub curvature_tol: f64,
    /// Soul expansion coefficient counted as zero (1e-6).
    pub soul_tol: f64,
    /// Commutation residual a perturbed metric must exceed (0.1).
    pub commute_min: f64,
    /// Harmonic-identity residual the non-minimal control must exceed (0.25).
    pub residual_min: f64,
    /// Relative change between levels still counted as stable (0.1).
    pub stability: f64,
    /// Boundary contact angle counted as orthogonal, radians (1e-6).
    pub angle_tol: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            spread_tol: 1e-10,
            spread_min: 1e-3,
            serrin_tol: 1e-8,
            serrin_min: 0.1,
            min_rate: 1.8,
            max_rate: 2.2,
            roundoff: 1e-10,
            curvature_tol: 1e-3,
            soul_tol: 1e-6,
            commute_min: 0.1,
            residual_min: 0.25,
            stability: 0.1,
            angle_tol: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub geometry: GeometrySpec,
    pub experiment: Experiment,
    pub expect: Expectation,
    /// Resolution multipliers; each entry is an independent run.
    pub sweep: Vec<usize>,
    pub numeric: Numeric,
    pub thresholds: Thresholds,
    pub output_dir: PathBuf,
}

const SECTIONS: [&str; 5] = ["geometry", "experiment", "numeric", "thresholds", "output"];

fn allowed_keys(section: &str) -> &'static [&'static str] {
    match section {
        "geometry" => &[
            "kind", "n", "R", "R0", "inner", "outer", "side", "length", "warp", "r_min", "r_max", "boundary",
            "epsilon", "mode",
        ],
        "experiment" => &["experiment", "expect", "sweep"],
        "numeric" => &["N", "Nr", "Nphi", "dt", "T", "k", "levels", "extrapolate"],
        "thresholds" => &[
            "spread_tol",
            "spread_min",
            "serrin_tol",
            "serrin_min",
            "min_rate",
            "max_rate",
            "roundoff",
            "curvature_tol",
            "soul_tol",
            "commute_min",
            "residual_min",
            "stability",
            "angle_tol",
        ],
        "output" => &["dir"],
        _ => &[],
    }
}

/// Raw `section.key → (value, line)` table.
struct Table {
    entries: BTreeMap<(String, String), (String, usize)>,
    errors: Vec<ConfigError>,
}

impl Table {
    fn err(&mut self, line: usize, message: impl Into<String>) {
        self.errors.push(ConfigError { line, message: message.into() });
    }

    fn raw(&self, section: &str, key: &str) -> Option<(String, usize)> {
        self.entries.get(&(section.to_string(), key.to_string())).cloned()
    }

    fn line_of(&self, section: &str, key: &str) -> usize {
        self.raw(section, key).map(|(_, l)| l).unwrap_or(0)
    }

    fn get<T: std::str::FromStr>(&mut self, section: &str, key: &str, what: &str) -> Option<T> {
        let (v, line) = self.raw(section, key)?;
        match v.parse() {
            Ok(x) => Some(x),
            Err(_) => {
                self.err(line, format!("[{section}] {key}: expected {what}, got `{v}`"));
                None
            }
        }
    }

    fn float(&mut self, section: &str, key: &str) -> Option<f64> {
        let v: f64 = self.get(section, key, "a number")?;
        if v.is_finite() {
            Some(v)
        } else {
            let line = self.line_of(section, key);
            self.err(line, format!("[{section}] {key}: expected a finite number"));
            None
        }
    }

    fn uint(&mut self, section: &str, key: &str) -> Option<usize> {
        self.get(section, key, "a non-negative integer")
    }

    fn text(&self, section: &str, key: &str) -> Option<String> {
        self.raw(section, key).map(|(v, _)| v)
    }

    fn require_float(&mut self, section: &str, key: &str) -> Option<f64> {
        if self.raw(section, key).is_none() {
            self.err(0, format!("missing required key `{key}` in [{section}]"));
            return None;
        }
        self.float(section, key)
    }

    fn require_uint(&mut self, section: &str, key: &str) -> Option<usize> {
        if self.raw(section, key).is_none() {
            self.err(0, format!("missing required key `{key}` in [{section}]"));
            return None;
        }
        self.uint(section, key)
    }
}

fn tokenize(line: &str) -> Vec<String> {
    let spaced = line.replace('=', " = ");
    let mut tokens: Vec<String> = Vec::new();
    for t in spaced.split_whitespace() {
        // glue list items written as `a, b`
        match tokens.last_mut() {
            Some(last) if last.ends_with(',') || t.starts_with(',') => last.push_str(t),
            _ => tokens.push(t.to_string()),
        }
    }
    tokens
}

fn read_table(text: &str) -> Table {
    let mut table = Table { entries: BTreeMap::new(), errors: Vec::new() };
    let mut section: Option<String> = None;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut rest = line;
        if let Some(stripped) = rest.strip_prefix('[') {
            let Some(end) = stripped.find(']') else {
                table.err(line_no, "unterminated section header");
                continue;
            };
            let name = stripped[..end].trim();
            if !SECTIONS.contains(&name) {
                table.err(line_no, format!("unknown section [{name}]"));
                section = None;
            } else {
                section = Some(name.to_string());
            }
            rest = stripped[end + 1..].trim();
            if rest.is_empty() {
                continue;
            }
        }
        let tokens = tokenize(rest);
        if !tokens.len().is_multiple_of(3) || tokens.chunks(3).any(|c| c[1] != "=" || c[0] == "=" || c[2] == "=") {
            table.err(line_no, format!("expected `key = value` pairs, got `{rest}`"));
            continue;
        }
        let Some(sec) = section.clone() else {
            table.err(line_no, "key outside of a known section");
            continue;
        };
        for c in tokens.chunks(3) {
            let key = c[0].clone();
            if !allowed_keys(&sec).contains(&key.as_str()) {
                table.err(line_no, format!("unknown key `{key}` in [{sec}]"));
                continue;
            }
            if let Some((_, first)) = table.entries.get(&(sec.clone(), key.clone())) {
                let first = *first;
                table.err(line_no, format!("duplicate key `{key}` in [{sec}] (first set on line {first})"));
                continue;
            }
            table.entries.insert((sec.clone(), key), (c[2].clone(), line_no));
        }
    }
    table
}

fn parse_geometry(t: &mut Table) -> Option<GeometrySpec> {
    let Some(kind) = t.text("geometry", "kind") else {
        t.err(0, "missing required key `kind` in [geometry]");
        return None;
    };
    let kind_line = t.line_of("geometry", "kind");
    let spec = match kind.as_str() {
        "ball" => {
            let n = t.require_uint("geometry", "n")?;
            let r = t.require_float("geometry", "R")?;
            GeometrySpec::Profile(ProfileSpec { kind: ProfileKind::Ball { n }, size: r, inner: 0.0, outer: 0.0 })
        }
        "cap" => {
            let n = t.require_uint("geometry", "n")?;
            let r = t.require_float("geometry", "R0")?;
            GeometrySpec::Profile(ProfileSpec { kind: ProfileKind::Cap { n }, size: r, inner: 0.0, outer: 0.0 })
        }
        "clifford" => {
            let r = t.require_float("geometry", "R")?;
            GeometrySpec::Profile(ProfileSpec { kind: ProfileKind::Clifford, size: r, inner: 0.0, outer: 0.0 })
        }
        "annulus-side" => {
            let inner = t.require_float("geometry", "inner")?;
            let outer = t.require_float("geometry", "outer")?;
            let side = match t.text("geometry", "side").as_deref() {
                None | Some("outward") => AnnulusSide::Outward,
                Some("inward") => AnnulusSide::Inward,
                Some(other) => {
                    let line = t.line_of("geometry", "side");
                    t.err(line, format!("[geometry] side: expected outward or inward, got `{other}`"));
                    return None;
                }
            };
            GeometrySpec::Profile(ProfileSpec { kind: ProfileKind::AnnulusSide(side), size: 0.0, inner, outer })
        }
        "interval" => GeometrySpec::Interval { length: t.float("geometry", "length").unwrap_or(2.0) },
        "annulus" => GeometrySpec::Annulus {
            inner: t.float("geometry", "inner").unwrap_or(1.0),
            outer: t.float("geometry", "outer").unwrap_or(2.0),
        },
        "revolution" => {
            let sphere = match t.text("geometry", "warp").as_deref() {
                Some("sphere") => true,
                Some("flat") => false,
                None => {
                    t.err(0, "missing required key `warp` in [geometry]");
                    return None;
                }
                Some(other) => {
                    let line = t.line_of("geometry", "warp");
                    t.err(line, format!("[geometry] warp: expected flat or sphere, got `{other}`"));
                    return None;
                }
            };
            let boundary = match t.text("geometry", "boundary").as_deref() {
                None | Some("outer") => BoundarySpec::OUTER,
                Some("both") => BoundarySpec::BOTH,
                Some(other) => {
                    let line = t.line_of("geometry", "boundary");
                    t.err(line, format!("[geometry] boundary: expected outer or both, got `{other}`"));
                    return None;
                }
            };
            let r_min = t.require_float("geometry", "r_min")?;
            let r_max = t.require_float("geometry", "r_max")?;
            let epsilon = t.float("geometry", "epsilon").unwrap_or(0.0);
            let mode = t.get::<u32>("geometry", "mode", "a non-negative integer").unwrap_or(1);
            GeometrySpec::Revolution(RevolutionSpec { sphere, r_min, r_max, boundary, epsilon, mode })
        }
        "disk" => GeometrySpec::Surface(SurfaceSpec::Disk),
        "catenoid" => GeometrySpec::Surface(SurfaceSpec::Catenoid),
        "spherical-cap-control" => GeometrySpec::Surface(SurfaceSpec::Control),
        other => {
            t.err(kind_line, format!("unknown geometry kind `{other}`"));
            return None;
        }
    };
    // surface the preconditions of the catalog constructors now
    let check = match &spec {
        GeometrySpec::Profile(p) => p.build().err().map(|e| e.to_string()),
        GeometrySpec::Revolution(r) => r.build().err().map(|e| e.to_string()),
        GeometrySpec::Interval { length } => {
            (length.is_nan() || *length <= 0.0).then(|| format!("length must be positive, got {length}"))
        }
        GeometrySpec::Annulus { inner, outer } => {
            (!(*inner > 0.0 && outer > inner)).then(|| format!("need 0 < inner < outer, got [{inner}, {outer}]"))
        }
        GeometrySpec::Surface(_) => None,
    };
    if let Some(msg) = check {
        t.err(kind_line, format!("geometry `{kind}`: {msg}"));
        return None;
    }
    Some(spec)
}

/// Parses and validates a configuration, reporting every problem found.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigErrors> {
    let mut t = read_table(text);
    let geometry = parse_geometry(&mut t);

    let experiment = match t.text("experiment", "experiment") {
        None => {
            t.err(0, "missing required key `experiment` in [experiment]");
            None
        }
        Some(name) => {
            let parsed = Experiment::parse(&name);
            if parsed.is_none() {
                let line = t.line_of("experiment", "experiment");
                let names: Vec<&str> = Experiment::ALL.iter().map(|(n, _)| *n).collect();
                t.err(line, format!("unknown experiment `{name}` (one of {})", names.join(", ")));
            }
            parsed
        }
    };
    let expect = match t.text("experiment", "expect").as_deref() {
        None | Some("constant") => Expectation::Constant,
        Some("nonconstant") => Expectation::Nonconstant,
        Some(other) => {
            let line = t.line_of("experiment", "expect");
            t.err(line, format!("[experiment] expect: expected constant or nonconstant, got `{other}`"));
            Expectation::Constant
        }
    };
    let sweep = match t.text("experiment", "sweep") {
        None => Vec::new(),
        Some(list) => {
            let parsed: Result<Vec<usize>, _> = list.split(',').map(|s| s.trim().parse::<usize>()).collect();
            match parsed {
                Ok(v) if !v.is_empty() && v.iter().all(|f| *f >= 1) => v,
                _ => {
                    let line = t.line_of("experiment", "sweep");
                    t.err(
                        line,
                        format!("[experiment] sweep: expected positive integers separated by commas, got `{list}`"),
                    );
                    Vec::new()
                }
            }
        }
    };

    let d = Numeric::default();
    let numeric = Numeric {
        n: t.uint("numeric", "N").unwrap_or(d.n),
        nr: t.uint("numeric", "Nr").unwrap_or(d.nr),
        nphi: t.uint("numeric", "Nphi").unwrap_or(d.nphi),
        dt: t.float("numeric", "dt"),
        t: t.float("numeric", "T").unwrap_or(d.t),
        k: t.uint("numeric", "k").unwrap_or(d.k),
        levels: t.uint("numeric", "levels").unwrap_or(d.levels),
        extrapolate: t.get("numeric", "extrapolate", "true or false").unwrap_or(d.extrapolate),
    };
    for (key, ok) in [
        ("T", numeric.t > 0.0),
        ("dt", numeric.dt.is_none_or(|v| v > 0.0)),
        ("k", numeric.k >= 1),
        ("levels", numeric.levels >= 2),
        ("N", numeric.n >= 8),
        ("Nr", numeric.nr >= 16),
        ("Nphi", numeric.nphi >= 16),
    ] {
        if !ok {
            let line = t.line_of("numeric", key);
            t.err(line, format!("[numeric] {key} is out of range"));
        }
    }

    let d = Thresholds::default();
    let mut th = |key: &str, default: f64| t.float("thresholds", key).unwrap_or(default);
    let thresholds = Thresholds {
        spread_tol: th("spread_tol", d.spread_tol),
        spread_min: th("spread_min", d.spread_min),
        serrin_tol: th("serrin_tol", d.serrin_tol),
        serrin_min: th("serrin_min", d.serrin_min),
        min_rate: th("min_rate", d.min_rate),
        max_rate: th("max_rate", d.max_rate),
        roundoff: th("roundoff", d.roundoff),
        curvature_tol: th("curvature_tol", d.curvature_tol),
        soul_tol: th("soul_tol", d.soul_tol),
        commute_min: th("commute_min", d.commute_min),
        residual_min: th("residual_min", d.residual_min),
        stability: th("stability", d.stability),
        angle_tol: th("angle_tol", d.angle_tol),
    };
    let output_dir = PathBuf::from(t.text("output", "dir").unwrap_or_else(|| "out".to_string()));

    if let (Some(g), Some(e)) = (&geometry, experiment) {
        if !e.accepts(g) {
            let line = t.line_of("experiment", "experiment");
            t.err(line, format!("experiment `{}` does not apply to geometry `{}`", e.name(), g.name()));
        }
    }
    if !t.errors.is_empty() {
        t.errors.sort_by_key(|e| e.line);
        return Err(ConfigErrors(t.errors));
    }
    Ok(RunConfig {
        geometry: geometry.expect("no errors implies a geometry"),
        experiment: experiment.expect("no errors implies an experiment"),
        expect,
        sweep,
        numeric,
        thresholds,
        output_dir,
    })
}
