//! TOML scenario files. The grammar is documented in `docs/formats.md`.

use std::collections::BTreeMap;
use std::path::PathBuf;

use serde::Deserialize;

use crate::boundary::{BoundaryKind, BoundaryOperatorSpec};
use crate::density::PiecewiseDensity;
use crate::error::{Error, Result};
use crate::geometry::{ConvexBilliard, Geometry, IntervalRule, IntervalUnion, Vec2, VelocitySpec};
use crate::honesty::{DEFAULT_SAMPLES, DEFAULT_TOL};

pub const DEFAULT_N_CAP: usize = 1000;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    scenario: RawScenario,
    geometry: RawGeometry,
    boundary: RawBoundary,
    density: RawDensity,
    #[serde(default)]
    run: RawRun,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    name: String,
    #[serde(default)]
    description: String,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGeometry {
    kind: String,
    rule: Option<String>,
    origin: Option<f64>,
    spacing: Option<f64>,
    width: Option<f64>,
    first_width: Option<f64>,
    ratio: Option<f64>,
    intervals: Option<Vec<[f64; 2]>>,
    shape: Option<String>,
    center: Option<[f64; 2]>,
    radius: Option<f64>,
    vertices: Option<Vec<[f64; 2]>>,
    speeds: Option<Vec<f64>>,
    speed_min: Option<f64>,
    speed_max: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBoundary {
    kind: String,
    r: Option<f64>,
    #[serde(default)]
    rows: Vec<RawRow>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRow {
    from: usize,
    to: Vec<RawTarget>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTarget {
    interval: usize,
    p: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDensity {
    #[serde(default)]
    pieces: Vec<RawPiece>,
    particles: Option<usize>,
    seed: Option<u64>,
    mass: Option<f64>,
    region_center: Option<[f64; 2]>,
    region_radius: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPiece {
    interval: usize,
    lo: f64,
    hi: f64,
    value: f64,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRun {
    #[serde(default)]
    times: Vec<f64>,
    tol: Option<f64>,
    n_cap: Option<usize>,
    #[serde(default)]
    lambdas: Vec<f64>,
    #[serde(default)]
    windows: Vec<[f64; 2]>,
    #[serde(default)]
    honesty_intervals: Vec<[f64; 2]>,
    samples: Option<usize>,
    resolvent_orders: Option<usize>,
    output_dir: Option<PathBuf>,
    #[serde(default)]
    dump_particles: bool,
}

/// Initial data: exact on interval unions, sampled on billiards.
#[derive(Debug, Clone, PartialEq)]
pub enum Initial {
    Piecewise(PiecewiseDensity),
    Ensemble {
        particles: usize,
        seed: u64,
        mass: f64,
        region: Option<(Vec2, f64)>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSettings {
    /// Report times, sorted ascending.
    pub times: Vec<f64>,
    pub tol: f64,
    pub n_cap: usize,
    pub lambdas: Vec<f64>,
    pub windows: Vec<(f64, f64)>,
    pub honesty_intervals: Vec<(f64, f64)>,
    pub samples: usize,
    /// Boundary orders summed in pointwise resolvent evaluations.
    pub resolvent_orders: usize,
    pub output_dir: Option<PathBuf>,
    pub dump_particles: bool,
}

/// A validated scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub name: String,
    pub description: String,
    pub geometry: Geometry,
    pub boundary: BoundaryOperatorSpec,
    pub initial: Initial,
    pub run: RunSettings,
}

const BUILTINS: &[(&str, &str)] = &[
    (
        "unit-ladder-honest",
        include_str!("../../scenarios/unit-ladder-honest.toml"),
    ),
    (
        "geometric-ladder-dishonest",
        include_str!("../../scenarios/geometric-ladder-dishonest.toml"),
    ),
    (
        "disk-billiard",
        include_str!("../../scenarios/disk-billiard.toml"),
    ),
];

fn need<T>(value: Option<T>, field: &str) -> Result<T> {
    value.ok_or_else(|| Error::config(field, "missing"))
}

fn finite(x: f64, field: &str) -> Result<f64> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(Error::config(field, "must be finite"))
    }
}

fn vec2(p: [f64; 2], field: &str) -> Result<Vec2> {
    Ok(Vec2::new(finite(p[0], field)?, finite(p[1], field)?))
}

fn field_error(field: &str) -> impl Fn(Error) -> Error + '_ {
    move |e| match e {
        Error::Config { .. } => e,
        other => Error::config(field, other.to_string()),
    }
}

impl ScenarioConfig {
    pub fn builtin_names() -> impl Iterator<Item = &'static str> {
        BUILTINS.iter().map(|(n, _)| *n)
    }

    pub fn builtin(name: &str) -> Result<Self> {
        let text = BUILTINS
            .iter()
            .find(|(n, _)| *n == name)
            .map(|(_, t)| *t)
            .ok_or_else(|| {
                let names: Vec<_> = Self::builtin_names().collect();
                Error::config(
                    "builtin",
                    format!("unknown scenario `{name}`; known: {}", names.join(", ")),
                )
            })?;
        Self::from_toml(text)
    }

    /// Reads `builtin:NAME` or a file path.
    pub fn load(spec: &str) -> Result<Self> {
        match spec.strip_prefix("builtin:") {
            Some(name) => Self::builtin(name),
            None => Self::from_toml(&std::fs::read_to_string(spec)?),
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let raw: RawConfig =
            toml::from_str(text).map_err(|e| Error::config("toml", e.message().to_string()))?;
        let geometry = geometry(&raw.geometry)?;
        let boundary = boundary(&raw.boundary, &geometry)?;
        let initial = initial(&raw.density, &geometry)?;
        let run = run(&raw.run, &geometry)?;
        if raw.scenario.name.trim().is_empty() {
            return Err(Error::config("scenario.name", "must not be empty"));
        }
        Ok(Self {
            name: raw.scenario.name,
            description: raw.scenario.description,
            geometry,
            boundary,
            initial,
            run,
        })
    }

    pub fn set_tol(&mut self, tol: f64) -> Result<()> {
        if !(tol > 0.0 && tol.is_finite()) {
            return Err(Error::config("run.tol", "must be positive"));
        }
        self.run.tol = tol;
        Ok(())
    }

    pub fn set_n_cap(&mut self, n_cap: usize) -> Result<()> {
        if n_cap == 0 {
            return Err(Error::config("run.n_cap", "must be at least 1"));
        }
        self.run.n_cap = n_cap;
        Ok(())
    }

    pub fn set_seed(&mut self, seed: u64) -> Result<()> {
        match &mut self.initial {
            Initial::Ensemble { seed: s, .. } => {
                *s = seed;
                Ok(())
            }
            Initial::Piecewise(_) => Err(Error::config(
                "density.seed",
                "only particle ensembles take a seed",
            )),
        }
    }
}

fn geometry(raw: &RawGeometry) -> Result<Geometry> {
    match raw.kind.as_str() {
        "interval-union" => {
            let rule = match need(raw.rule.as_deref(), "geometry.rule")? {
                "arithmetic" => IntervalRule::Arithmetic {
                    origin: raw.origin.unwrap_or(0.0),
                    spacing: need(raw.spacing, "geometry.spacing")?,
                    width: need(raw.width, "geometry.width")?,
                },
                "geometric" => IntervalRule::Geometric {
                    origin: raw.origin.unwrap_or(0.0),
                    spacing: need(raw.spacing, "geometry.spacing")?,
                    first_width: need(raw.first_width, "geometry.first_width")?,
                    ratio: need(raw.ratio, "geometry.ratio")?,
                },
                "explicit" => IntervalRule::Explicit(
                    need(raw.intervals.as_ref(), "geometry.intervals")?
                        .iter()
                        .map(|p| (p[0], p[1]))
                        .collect(),
                ),
                other => {
                    return Err(Error::config(
                        "geometry.rule",
                        format!("`{other}` is not one of arithmetic, geometric, explicit"),
                    ))
                }
            };
            Ok(IntervalUnion::new(rule).map_err(field_error("geometry"))?.into())
        }
        "billiard" => {
            let velocity = match (&raw.speeds, raw.speed_min, raw.speed_max) {
                (Some(s), None, None) => VelocitySpec::Speeds(s.clone()),
                (None, Some(min), Some(max)) => VelocitySpec::Annulus { min, max },
                _ => {
                    return Err(Error::config(
                        "geometry.speeds",
                        "give either `speeds` or both `speed_min` and `speed_max`",
                    ))
                }
            };
            let table = match need(raw.shape.as_deref(), "geometry.shape")? {
                "disk" => ConvexBilliard::disk(
                    vec2(raw.center.unwrap_or([0.0, 0.0]), "geometry.center")?,
                    need(raw.radius, "geometry.radius")?,
                    velocity,
                ),
                "polygon" => ConvexBilliard::polygon(
                    need(raw.vertices.as_ref(), "geometry.vertices")?
                        .iter()
                        .map(|&p| vec2(p, "geometry.vertices"))
                        .collect::<Result<_>>()?,
                    velocity,
                ),
                other => {
                    return Err(Error::config(
                        "geometry.shape",
                        format!("`{other}` is not one of disk, polygon"),
                    ))
                }
            };
            Ok(table.map_err(field_error("geometry"))?.into())
        }
        other => Err(Error::config(
            "geometry.kind",
            format!("`{other}` is not one of interval-union, billiard"),
        )),
    }
}

fn boundary(raw: &RawBoundary, g: &Geometry) -> Result<BoundaryOperatorSpec> {
    let r = raw.r.unwrap_or(1.0);
    if !raw.rows.is_empty() && raw.kind != "kernel" {
        return Err(Error::config("boundary.rows", "only kernel operators take rows"));
    }
    let spec = match (raw.kind.as_str(), g) {
        ("shift", Geometry::Intervals(_)) => BoundaryOperatorSpec::shift(r),
        ("kernel", Geometry::Intervals(_)) => {
            let mut rows: BTreeMap<usize, Vec<(usize, f64)>> = BTreeMap::new();
            for row in &raw.rows {
                if rows.contains_key(&row.from) {
                    return Err(Error::config(
                        "boundary.rows",
                        format!("row {} given twice", row.from),
                    ));
                }
                rows.insert(row.from, row.to.iter().map(|t| (t.interval, t.p)).collect());
            }
            BoundaryOperatorSpec::kernel(rows, r)
        }
        ("specular", Geometry::Billiard(_)) => {
            if r != 1.0 {
                return Err(Error::config("boundary.r", "specular reflection takes r = 1"));
            }
            Ok(BoundaryOperatorSpec::specular())
        }
        ("shift" | "kernel", Geometry::Billiard(_)) => {
            return Err(Error::config("boundary.kind", "billiards use `specular`"))
        }
        ("specular", Geometry::Intervals(_)) => {
            return Err(Error::config(
                "boundary.kind",
                "interval unions use `shift` or `kernel`",
            ))
        }
        (other, _) => {
            return Err(Error::config(
                "boundary.kind",
                format!("`{other}` is not one of shift, kernel, specular"),
            ))
        }
    }
    .map_err(field_error("boundary"))?;
    if let Geometry::Intervals(gi) = g {
        spec.validate_for(gi).map_err(field_error("boundary.rows"))?;
    }
    Ok(spec)
}

fn initial(raw: &RawDensity, g: &Geometry) -> Result<Initial> {
    match g {
        Geometry::Intervals(gi) => {
            if raw.particles.is_some() || raw.seed.is_some() {
                return Err(Error::config(
                    "density.particles",
                    "interval unions take exact `pieces`, not particles",
                ));
            }
            if raw.pieces.is_empty() {
                return Err(Error::config("density.pieces", "missing"));
            }
            let pieces: Vec<_> = raw
                .pieces
                .iter()
                .map(|p| (p.interval, p.lo, p.hi, p.value))
                .collect();
            Ok(Initial::Piecewise(
                PiecewiseDensity::from_pieces(gi, &pieces).map_err(field_error("density.pieces"))?,
            ))
        }
        Geometry::Billiard(table) => {
            if !raw.pieces.is_empty() {
                return Err(Error::config("density.pieces", "billiards take particles"));
            }
            let particles = need(raw.particles, "density.particles")?;
            if particles == 0 {
                return Err(Error::config("density.particles", "must be at least 1"));
            }
            let seed = need(raw.seed, "density.seed")?;
            let mass = raw.mass.unwrap_or(1.0);
            if !(mass >= 0.0 && mass.is_finite()) {
                return Err(Error::config("density.mass", "must be finite and >= 0"));
            }
            let region = match (raw.region_center, raw.region_radius) {
                (None, None) => None,
                (Some(c), Some(r)) => {
                    let c = vec2(c, "density.region_center")?;
                    if !(r > 0.0) || !table.contains_disk(&c, r) {
                        return Err(Error::config(
                            "density.region_radius",
                            "sampling disk must lie inside the table",
                        ));
                    }
                    Some((c, r))
                }
                _ => {
                    return Err(Error::config(
                        "density.region_center",
                        "give both `region_center` and `region_radius`",
                    ))
                }
            };
            Ok(Initial::Ensemble {
                particles,
                seed,
                mass,
                region,
            })
        }
    }
}

fn run(raw: &RawRun, g: &Geometry) -> Result<RunSettings> {
    let mut times = raw.times.clone();
    if times.is_empty() {
        return Err(Error::config("run.times", "missing"));
    }
    if times.iter().any(|t| !(*t >= 0.0 && t.is_finite())) {
        return Err(Error::config("run.times", "times must be finite and >= 0"));
    }
    times.sort_by(f64::total_cmp);
    times.dedup();
    let tol = raw.tol.unwrap_or(DEFAULT_TOL);
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Error::config("run.tol", "must be positive"));
    }
    let n_cap = raw.n_cap.unwrap_or(DEFAULT_N_CAP);
    if n_cap == 0 {
        return Err(Error::config("run.n_cap", "must be at least 1"));
    }
    if raw.lambdas.iter().any(|l| !(*l > 0.0 && l.is_finite())) {
        return Err(Error::config("run.lambdas", "every λ must be positive"));
    }
    let pairs = |list: &[[f64; 2]], field: &str| -> Result<Vec<(f64, f64)>> {
        list.iter()
            .map(|&[s, t]| {
                if 0.0 <= s && s <= t && t.is_finite() {
                    Ok((s, t))
                } else {
                    Err(Error::config(field, format!("({s}, {t}) needs 0 <= s <= t")))
                }
            })
            .collect()
    };
    let windows = pairs(&raw.windows, "run.windows")?;
    let honesty_intervals = pairs(&raw.honesty_intervals, "run.honesty_intervals")?;
    let samples = raw.samples.unwrap_or(DEFAULT_SAMPLES);
    if samples < 2 {
        return Err(Error::config("run.samples", "must be at least 2"));
    }
    if let Geometry::Billiard(_) = g {
        if !raw.lambdas.is_empty() {
            return Err(Error::config("run.lambdas", "resolvent diagnostics need an interval union"));
        }
        if !honesty_intervals.is_empty() {
            return Err(Error::config(
                "run.honesty_intervals",
                "subinterval honesty needs an interval union",
            ));
        }
    } else if raw.dump_particles {
        return Err(Error::config("run.dump_particles", "only billiards have particles"));
    }
    Ok(RunSettings {
        times,
        tol,
        n_cap,
        lambdas: raw.lambdas.clone(),
        windows,
        honesty_intervals,
        samples,
        resolvent_orders: raw.resolvent_orders.unwrap_or(64),
        output_dir: raw.output_dir.clone(),
        dump_particles: raw.dump_particles,
    })
}

/// Kind name as written in scenario files.
pub fn boundary_kind_name(spec: &BoundaryOperatorSpec) -> &'static str {
    match spec.kind() {
        BoundaryKind::Shift => "shift",
        BoundaryKind::Kernel(_) => "kernel",
        BoundaryKind::Specular => "specular",
    }
}
