use crate::boundary::{resolvent_eval, BoundaryKind};
use crate::density::{transport_ensemble, ParticleEnsemble, PiecewiseDensity};
use crate::error::Result;
use crate::expansion::v_partial_sum;
use crate::geometry::{ConvexBilliard, Geometry};
use crate::honesty::{
    billiard_trace_decay, boundary_loss, defect, honesty_on_subinterval, mass_loss,
    resolvent_defect, DefectReport, SubintervalReport, Verdict,
};

use rayon::prelude::*;

use super::config::{Initial, ScenarioConfig};

/// One row of the time-series table.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeRow {
    pub t: f64,
    pub mass: f64,
    /// Truncation status of the partial sum, or `sampled` for particles.
    pub status: &'static str,
    /// Bound on omitted mass; the statistical tolerance for particles.
    pub bound: f64,
    /// `η_f(t)`.
    pub eta: f64,
    pub order_masses: Vec<f64>,
    pub trace_norms: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MassAccounting {
    pub t: f64,
    pub mass_loss: f64,
    pub boundary_loss: f64,
    pub boundary_loss_bound: f64,
    pub defect: f64,
    pub conclusive: bool,
}

/// Truncated `R(λ)f` at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResolventSample {
    pub lambda: f64,
    pub x: f64,
    pub value: f64,
    pub bound: f64,
}

/// Midpoints of the first few intervals.
const RESOLVENT_POINTS: usize = 4;

#[derive(Debug, Clone, PartialEq)]
pub struct BilliardSummary {
    pub particles: usize,
    pub seed: u64,
    pub initial_mass: f64,
    /// `max_t |mass(t) - mass(0)|` over the report times.
    pub mass_drift: f64,
    pub degenerate: usize,
    pub min_flight: f64,
    pub max_rebounds: u32,
    pub tol: f64,
}

/// Everything a scenario run produces, before formatting.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioReport {
    pub config: ScenarioConfig,
    pub verdict: Verdict,
    /// Defect over `[0, T]` at the last report time.
    pub trajectory: DefectReport,
    /// Whether every resolvent verdict matches the trajectory verdict.
    pub resolvent_agrees: Option<bool>,
    pub rows: Vec<TimeRow>,
    pub windows: Vec<DefectReport>,
    pub resolvents: Vec<DefectReport>,
    pub resolvent_samples: Vec<ResolventSample>,
    pub subintervals: Vec<SubintervalReport>,
    pub accounting: Option<MassAccounting>,
    pub billiard: Option<BilliardSummary>,
    /// Partial sum at the last report time.
    pub final_density: Option<PiecewiseDensity>,
    /// Particle cloud at the last report time.
    pub final_ensemble: Option<ParticleEnsemble>,
}

fn no_negative_zero(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x
    }
}

pub fn run_scenario(config: &ScenarioConfig) -> Result<ScenarioReport> {
    match (&config.geometry, &config.initial) {
        (Geometry::Billiard(table), Initial::Ensemble { .. }) => run_billiard(config, table),
        (Geometry::Intervals(_), Initial::Piecewise(f)) => run_intervals(config, f),
        _ => Err(crate::error::Error::config(
            "density",
            "initial data does not match the geometry",
        )),
    }
}

fn run_intervals(config: &ScenarioConfig, f: &PiecewiseDensity) -> Result<ScenarioReport> {
    let g = &config.geometry;
    let spec = &config.boundary;
    let run = &config.run;
    let (tol, n_cap) = (run.tol, run.n_cap);
    let horizon = *run.times.last().expect("validated nonempty");

    // independent diagnostics run in parallel; collection keeps input order
    let sums = run
        .times
        .par_iter()
        .map(|&t| {
            let sum = v_partial_sum(t, f, g, spec, tol, n_cap)?;
            let eta = defect(0.0, t, f, g, spec, tol, n_cap)?;
            Ok((t, sum, eta))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut rows = Vec::with_capacity(sums.len());
    let mut final_density = None;
    for (t, sum, eta) in sums {
        rows.push(TimeRow {
            t,
            mass: no_negative_zero(sum.mass()),
            status: sum.status.as_str(),
            bound: sum.bound,
            eta: no_negative_zero(eta.eta()),
            order_masses: sum.order_masses.clone(),
            trace_norms: sum.trace_norms.clone(),
        });
        final_density = Some(sum.density);
    }

    let trajectory = defect(0.0, horizon, f, g, spec, tol, n_cap)?;
    let mut verdict = trajectory.verdict;
    let windows = run
        .windows
        .par_iter()
        .map(|&(s, t)| defect(s, t, f, g, spec, tol, n_cap))
        .collect::<Result<Vec<_>>>()?;
    let resolvents = run
        .lambdas
        .par_iter()
        .map(|&l| resolvent_defect(f, l, g, spec, tol, n_cap))
        .collect::<Result<Vec<_>>>()?;
    let subintervals = run
        .honesty_intervals
        .par_iter()
        .map(|&(s1, s2)| honesty_on_subinterval(s1, s2, f, run.samples, g, spec, tol, n_cap))
        .collect::<Result<Vec<_>>>()?;
    for v in windows
        .iter()
        .chain(&resolvents)
        .map(|r| r.verdict)
        .chain(subintervals.iter().map(|r| r.verdict))
    {
        verdict = verdict.merge(v);
    }
    let gi = crate::expansion::intervals(g)?;
    let mut resolvent_samples = Vec::new();
    for &lambda in &run.lambdas {
        for k in (0..RESOLVENT_POINTS).filter(|&k| gi.contains_index(k)) {
            let x = 0.5 * (gi.left(k) + gi.right(k));
            let r = resolvent_eval(f, lambda, x, run.resolvent_orders, gi, spec)?;
            resolvent_samples.push(ResolventSample {
                lambda,
                x,
                value: r.value,
                bound: r.truncation_bound(),
            });
        }
    }
    let resolvent_agrees = (!resolvents.is_empty())
        .then(|| resolvents.iter().all(|r| r.verdict == trajectory.verdict));

    let loss = mass_loss(0.0, horizon, f, g, spec, tol, n_cap)?;
    let boundary = boundary_loss(horizon, f, g, spec, tol, n_cap)?;
    let accounting = Some(MassAccounting {
        t: horizon,
        mass_loss: loss.value,
        boundary_loss: boundary.value,
        boundary_loss_bound: boundary.bound,
        defect: trajectory.limit,
        conclusive: loss.conclusive && boundary.conclusive,
    });

    Ok(ScenarioReport {
        config: config.clone(),
        verdict,
        trajectory,
        resolvent_agrees,
        rows,
        windows,
        resolvents,
        resolvent_samples,
        subintervals,
        accounting,
        billiard: None,
        final_density,
        final_ensemble: None,
    })
}

fn run_billiard(config: &ScenarioConfig, table: &ConvexBilliard) -> Result<ScenarioReport> {
    debug_assert_eq!(*config.boundary.kind(), BoundaryKind::Specular);
    let run = &config.run;
    let (particles, seed) = match config.initial {
        Initial::Ensemble {
            particles, seed, ..
        } => (particles, seed),
        Initial::Piecewise(_) => unreachable!("checked by the caller"),
    };
    let start = ensemble_start(config, table)?;
    let initial_mass = start.mass();

    // every time at which a snapshot is needed, ascending
    let mut stops: Vec<f64> = run
        .times
        .iter()
        .copied()
        .chain(run.windows.iter().flat_map(|&(s, t)| [s, t]))
        .collect();
    stops.sort_by(f64::total_cmp);
    stops.dedup();
    let mut snapshots: Vec<ParticleEnsemble> = Vec::with_capacity(stops.len());
    let mut current = start.clone();
    for &t in &stops {
        let (next, _) = transport_ensemble(&current, t - current.time, table)?;
        current = next;
        snapshots.push(current.clone());
    }
    let snapshot = |t: f64| -> &ParticleEnsemble {
        let i = stops.iter().position(|&x| x == t).expect("snapshot taken");
        &snapshots[i]
    };

    let mut rows = Vec::with_capacity(run.times.len());
    let mut mass_drift: f64 = 0.0;
    for &t in &run.times {
        let e = snapshot(t);
        let decay = billiard_trace_decay(&start, e)?;
        let m = e.mass();
        mass_drift = mass_drift.max((m - initial_mass).abs());
        rows.push(TimeRow {
            t,
            mass: m,
            status: "sampled",
            bound: decay.tol,
            eta: no_negative_zero(decay.report.eta()),
            order_masses: e.order_weights(),
            trace_norms: decay.estimates,
        });
    }
    let last = snapshot(*run.times.last().expect("validated nonempty"));
    let trajectory = billiard_trace_decay(&start, last)?.report;
    let mut verdict = trajectory.verdict;
    let windows = run
        .windows
        .iter()
        .map(|&(s, t)| Ok(billiard_trace_decay(snapshot(s), snapshot(t))?.report))
        .collect::<Result<Vec<_>>>()?;
    for w in &windows {
        verdict = verdict.merge(w.verdict);
    }
    let billiard = Some(BilliardSummary {
        particles,
        seed,
        initial_mass,
        mass_drift,
        degenerate: last.degenerate_count(),
        min_flight: last.min_flight(),
        max_rebounds: last.max_rebounds(),
        tol: 3.0 / (particles as f64).sqrt(),
    });
    Ok(ScenarioReport {
        config: config.clone(),
        verdict,
        trajectory,
        resolvent_agrees: None,
        rows,
        windows,
        resolvents: Vec::new(),
        resolvent_samples: Vec::new(),
        subintervals: Vec::new(),
        accounting: None,
        billiard,
        final_density: None,
        final_ensemble: run.dump_particles.then(|| last.clone()),
    })
}

fn ensemble_start(config: &ScenarioConfig, table: &ConvexBilliard) -> Result<ParticleEnsemble> {
    match config.initial {
        Initial::Ensemble {
            particles,
            seed,
            mass,
            region,
        } => ParticleEnsemble::sample(table, particles, mass, seed, region),
        Initial::Piecewise(_) => Err(crate::error::Error::config(
            "density",
            "a billiard needs an ensemble",
        )),
    }
}

/// Defect over one window `(s, t)`, with the scenario's own settings.
pub fn window_defect(config: &ScenarioConfig, s: f64, t: f64) -> Result<DefectReport> {
    let run = &config.run;
    match (&config.geometry, &config.initial) {
        (Geometry::Billiard(table), _) => {
            if !(0.0 <= s && s <= t && t.is_finite()) {
                return Err(crate::error::Error::Precondition(format!(
                    "window ({s}, {t}) needs 0 <= s <= t"
                )));
            }
            let start = ensemble_start(config, table)?;
            let (at_s, _) = transport_ensemble(&start, s, table)?;
            let (at_t, _) = transport_ensemble(&at_s, t - s, table)?;
            Ok(billiard_trace_decay(&at_s, &at_t)?.report)
        }
        (_, Initial::Piecewise(f)) => {
            defect(s, t, f, &config.geometry, &config.boundary, run.tol, run.n_cap)
        }
        _ => Err(crate::error::Error::config(
            "density",
            "initial data does not match the geometry",
        )),
    }
}

/// Resolvent defect at `λ`; interval unions only.
pub fn lambda_defect(config: &ScenarioConfig, lambda: f64) -> Result<DefectReport> {
    match &config.initial {
        Initial::Piecewise(f) => resolvent_defect(
            f,
            lambda,
            &config.geometry,
            &config.boundary,
            config.run.tol,
            config.run.n_cap,
        ),
        Initial::Ensemble { .. } => Err(crate::error::Error::Unsupported(
            "resolvent diagnostics need an interval union",
        )),
    }
}
