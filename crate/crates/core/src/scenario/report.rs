//! Formatting and writing of run outputs.
//!
//! Floats go out as `{:.16e}` so a round trip through the text is exact.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::convergence::LimitStatus;
use crate::error::Result;
use crate::geometry::Geometry;
use crate::honesty::{DefectReport, DefectWindow};

use super::config::boundary_kind_name;
use super::run::ScenarioReport;

/// Environment variable that overrides the configured output directory.
pub const OUT_DIR_ENV: &str = "HONESTY_OUT_DIR";

pub const TIMESERIES_FILE: &str = "timeseries.csv";
pub const DEFECTS_FILE: &str = "defects.csv";
pub const SUMMARY_FILE: &str = "summary.toml";
pub const DENSITY_FILE: &str = "density.csv";
pub const ENSEMBLE_FILE: &str = "ensemble.csv";

/// `-0.0` and `0.0` print alike.
fn unsigned_zero(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x
    }
}

fn num(x: f64) -> String {
    format!("{:.16e}", unsigned_zero(x))
}

/// Explicit override, then the environment, then the scenario file, then
/// `honesty-out/<name>`.
pub fn resolve_output_dir(report: &ScenarioReport, explicit: Option<&Path>) -> PathBuf {
    if let Some(p) = explicit {
        return p.to_path_buf();
    }
    if let Some(p) = std::env::var_os(OUT_DIR_ENV).filter(|p| !p.is_empty()) {
        return PathBuf::from(p);
    }
    if let Some(p) = &report.config.run.output_dir {
        return p.clone();
    }
    Path::new("honesty-out").join(&report.config.name)
}

pub fn timeseries_csv(report: &ScenarioReport) -> String {
    let width = report
        .rows
        .iter()
        .map(|r| r.order_masses.len().max(r.trace_norms.len()))
        .max()
        .unwrap_or(0);
    let mut out = String::from("t,mass,status,bound,eta");
    for n in 0..width {
        write!(out, ",order_mass_{n}").unwrap();
    }
    for n in 0..width {
        write!(out, ",trace_norm_{n}").unwrap();
    }
    out.push('\n');
    for r in &report.rows {
        write!(
            out,
            "{},{},{},{},{}",
            num(r.t),
            num(r.mass),
            r.status,
            num(r.bound),
            num(r.eta)
        )
        .unwrap();
        for seq in [&r.order_masses, &r.trace_norms] {
            for n in 0..width {
                out.push(',');
                if let Some(&x) = seq.get(n) {
                    out.push_str(&num(x));
                }
            }
        }
        out.push('\n');
    }
    out
}

fn label(d: &DefectReport) -> String {
    match d.window {
        DefectWindow::Time { s, t } => format!("time:{s}:{t}"),
        DefectWindow::Resolvent { lambda } => format!("resolvent:{lambda}"),
    }
}

/// One line per defect and order.
pub fn defects_csv(report: &ScenarioReport) -> String {
    let mut out = String::from("window,kind,s,t,lambda,order,value\n");
    let all = std::iter::once(&report.trajectory)
        .chain(&report.windows)
        .chain(&report.resolvents);
    for d in all {
        let (kind, s, t, lambda) = match d.window {
            DefectWindow::Time { s, t } => ("time", num(s), num(t), String::new()),
            DefectWindow::Resolvent { lambda } => {
                ("resolvent", String::new(), String::new(), num(lambda))
            }
        };
        let name = label(d);
        for (n, &x) in d.sequence.iter().enumerate() {
            writeln!(out, "{name},{kind},{s},{t},{lambda},{n},{}", num(x)).unwrap();
        }
    }
    out
}

pub fn density_csv(report: &ScenarioReport) -> Option<String> {
    let f = report.final_density.as_ref()?;
    let mut out = String::from("interval,lo,hi,value\n");
    for row in f.rows() {
        for (w, &v) in row.breakpoints.windows(2).zip(&row.values) {
            writeln!(out, "{},{},{},{}", row.interval, num(w[0]), num(w[1]), num(v)).unwrap();
        }
    }
    Some(out)
}

pub fn ensemble_csv(report: &ScenarioReport) -> Option<String> {
    let e = report.final_ensemble.as_ref()?;
    let mut out = String::from("x,y,vx,vy,weight,rebounds,degenerate\n");
    for p in &e.particles {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            num(p.x[0]),
            num(p.x[1]),
            num(p.v[0]),
            num(p.v[1]),
            num(p.w),
            p.rebounds,
            p.degenerate
        )
        .unwrap();
    }
    Some(out)
}

#[derive(Serialize)]
struct Summary<'a> {
    scenario: ScenarioSection<'a>,
    verdict: VerdictSection,
    defects: Vec<DefectSection>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    honesty_intervals: Vec<IntervalSection>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    resolvent_values: Vec<ResolventSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    mass_accounting: Option<AccountingSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    billiard: Option<BilliardSection>,
    times: Vec<TimeSection<'a>>,
}

#[derive(Serialize)]
struct ScenarioSection<'a> {
    name: &'a str,
    description: &'a str,
    geometry: &'static str,
    boundary: &'static str,
    r: f64,
    tol: f64,
    n_cap: usize,
}

#[derive(Serialize)]
struct VerdictSection {
    overall: &'static str,
    exit_code: i32,
    trajectory: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    resolvent_agrees: Option<bool>,
}

#[derive(Serialize)]
struct DefectSection {
    window: String,
    limit: f64,
    eta: f64,
    status: LimitStatus,
    verdict: &'static str,
    tol: f64,
    orders: usize,
}

#[derive(Serialize)]
struct IntervalSection {
    s1: f64,
    s2: f64,
    verdict: &'static str,
    windows: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    witness: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    witness_limit: Option<f64>,
}

#[derive(Serialize)]
struct ResolventSection {
    lambda: f64,
    x: f64,
    value: f64,
    bound: f64,
}

#[derive(Serialize)]
struct AccountingSection {
    t: f64,
    mass_loss: f64,
    boundary_loss: f64,
    boundary_loss_bound: f64,
    defect: f64,
    conclusive: bool,
}

#[derive(Serialize)]
struct BilliardSection {
    particles: usize,
    seed: u64,
    initial_mass: f64,
    mass_drift: f64,
    degenerate: usize,
    min_flight: f64,
    max_rebounds: u32,
    tol: f64,
}

#[derive(Serialize)]
struct TimeSection<'a> {
    t: f64,
    mass: f64,
    status: &'a str,
    bound: f64,
    eta: f64,
    orders: usize,
}

fn defect_section(d: &DefectReport) -> DefectSection {
    DefectSection {
        window: label(d),
        limit: unsigned_zero(d.limit),
        eta: unsigned_zero(d.eta()),
        status: d.status,
        verdict: d.verdict.as_str(),
        tol: d.tol,
        orders: d.sequence.len(),
    }
}

pub fn summary_toml(report: &ScenarioReport) -> Result<String> {
    let c = &report.config;
    let summary = Summary {
        scenario: ScenarioSection {
            name: &c.name,
            description: &c.description,
            geometry: match c.geometry {
                Geometry::Intervals(_) => "interval-union",
                Geometry::Billiard(_) => "billiard",
            },
            boundary: boundary_kind_name(&c.boundary),
            r: c.boundary.r(),
            tol: c.run.tol,
            n_cap: c.run.n_cap,
        },
        verdict: VerdictSection {
            overall: report.verdict.as_str(),
            exit_code: report.verdict.exit_code(),
            trajectory: report.trajectory.verdict.as_str(),
            resolvent_agrees: report.resolvent_agrees,
        },
        defects: std::iter::once(&report.trajectory)
            .chain(&report.windows)
            .chain(&report.resolvents)
            .map(defect_section)
            .collect(),
        honesty_intervals: report
            .subintervals
            .iter()
            .map(|s| IntervalSection {
                s1: s.interval.0,
                s2: s.interval.1,
                verdict: s.verdict.as_str(),
                windows: s.windows.len(),
                witness: s.witness().map(label),
                witness_limit: s.witness().map(|w| unsigned_zero(w.limit)),
            })
            .collect(),
        resolvent_values: report
            .resolvent_samples
            .iter()
            .map(|r| ResolventSection {
                lambda: r.lambda,
                x: r.x,
                value: r.value,
                bound: r.bound,
            })
            .collect(),
        mass_accounting: report.accounting.as_ref().map(|a| AccountingSection {
            t: a.t,
            mass_loss: unsigned_zero(a.mass_loss),
            boundary_loss: unsigned_zero(a.boundary_loss),
            boundary_loss_bound: a.boundary_loss_bound,
            defect: unsigned_zero(a.defect),
            conclusive: a.conclusive,
        }),
        billiard: report.billiard.as_ref().map(|b| BilliardSection {
            particles: b.particles,
            seed: b.seed,
            initial_mass: b.initial_mass,
            mass_drift: b.mass_drift,
            degenerate: b.degenerate,
            min_flight: b.min_flight,
            max_rebounds: b.max_rebounds,
            tol: b.tol,
        }),
        times: report
            .rows
            .iter()
            .map(|r| TimeSection {
                t: r.t,
                mass: unsigned_zero(r.mass),
                status: r.status,
                bound: r.bound,
                eta: unsigned_zero(r.eta),
                orders: r.order_masses.len(),
            })
            .collect(),
    };
    toml::to_string(&summary).map_err(|e| crate::error::Error::config("summary", e.to_string()))
}

/// Writes every output file into `dir`, creating it if needed, and returns
/// the paths written.
pub fn write_reports(report: &ScenarioReport, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut files = vec![
        (TIMESERIES_FILE, timeseries_csv(report)),
        (DEFECTS_FILE, defects_csv(report)),
        (SUMMARY_FILE, summary_toml(report)?),
    ];
    if let Some(d) = density_csv(report) {
        files.push((DENSITY_FILE, d));
    }
    if let Some(e) = ensemble_csv(report) {
        files.push((ENSEMBLE_FILE, e));
    }
    let mut written = Vec::with_capacity(files.len());
    for (name, text) in files {
        let path = dir.join(name);
        fs::write(&path, text)?;
        written.push(path);
    }
    Ok(written)
}
