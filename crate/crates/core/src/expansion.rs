//! The boundary-order expansion `V_H(t) f = Σ_k U_k(t) f` on interval unions.
//!
//! Mass of order `n` is mass that has crossed the boundary exactly `n`
//! times. Everything is driven by time series at the boundary points: for
//! each order `n` and interval `j`, `β_n(s)(b_j)` is the outgoing trace of
//! `U_n(s) f` at `b_j` and `ι_n(s)(a_j) = [H β_{n-1}(s)](a_j)` the influx
//! entering `I_j` at time `s`. With unit drift
//!
//! ```text
//! β_0(s)(b_j) = f(b_j - s),            0 <= s < Δ_j
//! β_n(s)(b_j) = ι_n(s - Δ_j)(a_j)
//! U_n(t) f(x) = ι_n(t - (x - a_j))(a_j), x in I_j
//! ```
//!
//! and the trace of `∫_s^t U_n(r) f dr` at `b_j` is `∫_s^t β_n(r)(b_j) dr`.
//! All series are piecewise constant, so every quantity below is exact up to
//! rounding.

use std::collections::BTreeMap;

use crate::boundary::{apply_h, BoundaryKind, BoundaryOperatorSpec, BoundaryVector};
use crate::convergence::{detect, traces_settled, LimitEstimate, LimitStatus};
use crate::density::PiecewiseDensity;
use crate::error::{Error, Result};
use crate::geometry::{Geometry, IntervalUnion};
use crate::steps::Steps;

type Series = BTreeMap<usize, Steps>;

/// Lazily grown boundary-order expansion of one density up to a time horizon.
#[derive(Debug, Clone)]
pub struct Expansion {
    g: IntervalUnion,
    spec: BoundaryOperatorSpec,
    f: PiecewiseDensity,
    horizon: f64,
    /// `β_n` per order.
    traces: Vec<Series>,
    /// `ι_n` per order; entry 0 is empty.
    influx: Vec<Series>,
}

impl Expansion {
    pub fn new(
        g: &IntervalUnion,
        spec: &BoundaryOperatorSpec,
        f: &PiecewiseDensity,
        horizon: f64,
    ) -> Result<Self> {
        if !(horizon >= 0.0 && horizon.is_finite()) {
            return Err(Error::Precondition(format!(
                "horizon {horizon} must be finite and >= 0"
            )));
        }
        spec.validate_for(g)?;
        let mut traces = BTreeMap::new();
        for (k, s) in f.parts() {
            let b = g.right(k);
            let series = s.reflected(b).clipped(0.0, horizon);
            if !series.is_zero() {
                traces.insert(k, series);
            }
        }
        Ok(Self {
            g: g.clone(),
            spec: spec.clone(),
            f: f.clone(),
            horizon,
            traces: vec![traces],
            influx: vec![Series::new()],
        })
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn geometry(&self) -> &IntervalUnion {
        &self.g
    }

    pub fn initial(&self) -> &PiecewiseDensity {
        &self.f
    }

    pub fn ensure_order(&mut self, n: usize) {
        while self.traces.len() <= n {
            let prev = self.traces.last().expect("order 0 exists");
            let mut inflow = Series::new();
            for (&k, beta) in prev {
                for (j, w) in self.spec.targets(k, &self.g) {
                    let add = beta.scaled(w);
                    let sum = match inflow.remove(&j) {
                        Some(old) => old.add(&add),
                        None => add,
                    };
                    if !sum.is_zero() {
                        inflow.insert(j, sum);
                    }
                }
            }
            let mut next = Series::new();
            for (&j, iota) in &inflow {
                let beta = iota.shifted(self.g.width(j)).clipped(0.0, self.horizon);
                if !beta.is_zero() {
                    next.insert(j, beta);
                }
            }
            self.traces.push(next);
            self.influx.push(inflow);
        }
    }

    fn check_time(&self, t: f64) {
        assert!(
            t >= 0.0 && t <= self.horizon,
            "time {t} outside [0, {}]",
            self.horizon
        );
    }

    /// `U_n(t) f` for `0 <= t <= horizon`.
    pub fn order_density(&mut self, n: usize, t: f64) -> PiecewiseDensity {
        self.check_time(t);
        if n == 0 {
            return self.f.free_stream(&self.g, t);
        }
        self.ensure_order(n);
        let mut out = PiecewiseDensity::zero();
        for (&j, iota) in &self.influx[n] {
            let (a, b) = self.g.interval(j).expect("stored interval exists");
            out.insert(j, iota.reflected(t + a).clipped(a, b));
        }
        out
    }

    /// Trace at the outgoing points of `∫_s^t U_n(r) f dr`.
    pub fn trace_integral(&mut self, n: usize, s: f64, t: f64) -> BoundaryVector {
        self.check_time(t);
        self.ensure_order(n);
        BoundaryVector::outgoing(
            self.traces[n]
                .iter()
                .map(|(&j, beta)| (j, beta.integral_over(s, t))),
        )
    }

    /// Earliest time at which order `n` leaves any interval; infinite when
    /// order `n` carries nothing before the horizon.
    pub fn arrival_front(&mut self, n: usize) -> f64 {
        self.ensure_order(n);
        self.traces[n]
            .values()
            .filter_map(Steps::support)
            .map(|(lo, _)| lo)
            .fold(f64::INFINITY, f64::min)
    }

    /// Latest point of the support of `β_n`; `-∞` when it vanishes.
    pub fn arrival_end(&mut self, n: usize) -> f64 {
        self.ensure_order(n);
        self.traces[n]
            .values()
            .filter_map(Steps::support)
            .map(|(_, hi)| hi)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// `n ↦ ‖B⁺∫_0^t U_n‖` until its limit is detected or `n_cap` is reached.
    pub fn trace_norm_limit(&mut self, t: f64, tol: f64, n_cap: usize) -> (Vec<f64>, LimitEstimate) {
        let mut seq = Vec::new();
        let (mut fronts, mut ends) = (Vec::new(), Vec::new());
        for n in 0..=n_cap {
            let front = self.arrival_front(n);
            seq.push(self.trace_integral(n, 0.0, t).norm());
            if front >= t {
                return (
                    seq,
                    LimitEstimate {
                        status: LimitStatus::Exhausted,
                        limit: 0.0,
                        ratio: None,
                    },
                );
            }
            fronts.push(front);
            ends.push(self.arrival_end(n));
            if let Some(est) = detect(&seq, tol, traces_settled(&fronts, &ends, t)) {
                return (seq, est);
            }
        }
        let last = *seq.last().expect("at least order 0");
        (
            seq,
            LimitEstimate {
                status: LimitStatus::CapReached,
                limit: last,
                ratio: None,
            },
        )
    }
}

pub(crate) fn intervals(g: &Geometry) -> Result<&IntervalUnion> {
    g.as_intervals().map_err(|_| {
        Error::Unsupported("the exact expansion needs the interval-union geometry; billiards use particle ensembles")
    })
}

pub(crate) fn check_spec(spec: &BoundaryOperatorSpec) -> Result<()> {
    if *spec.kind() == BoundaryKind::Specular {
        return Err(Error::Unsupported("specular reflection needs the billiard geometry"));
    }
    Ok(())
}

/// `U_k(t) f`.
pub fn u_k_apply(
    k: usize,
    t: f64,
    f: &PiecewiseDensity,
    g: &Geometry,
    spec: &BoundaryOperatorSpec,
) -> Result<PiecewiseDensity> {
    check_spec(spec)?;
    let mut e = Expansion::new(intervals(g)?, spec, f, t)?;
    Ok(e.order_density(k, t))
}

/// `B⁺ ∫_0^t U_k(s) f ds`.
pub fn boundary_time_integral(
    k: usize,
    t: f64,
    f: &PiecewiseDensity,
    g: &Geometry,
    spec: &BoundaryOperatorSpec,
) -> Result<BoundaryVector> {
    check_spec(spec)?;
    let mut e = Expansion::new(intervals(g)?, spec, f, t)?;
    Ok(e.trace_integral(k, 0.0, t))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TruncationStatus {
    /// All omitted orders vanish identically.
    Exact,
    /// The residual bound fell below the tolerance.
    Converged,
    /// The residual bound settled above the tolerance, but its extrapolated
    /// drop, which bounds the omitted mass, is below it.
    Stabilized,
    /// The order cap was reached first.
    Unconverged,
}

impl TruncationStatus {
    pub fn is_conclusive(self) -> bool {
        self != TruncationStatus::Unconverged
    }

    pub fn as_str(self) -> &'static str {
        match self {
            TruncationStatus::Exact => "exact",
            TruncationStatus::Converged => "converged",
            TruncationStatus::Stabilized => "stabilized",
            TruncationStatus::Unconverged => "unconverged",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PartialSum {
    pub density: PiecewiseDensity,
    /// `‖U_k(t) f‖` for `k = 0..=n`.
    pub order_masses: Vec<f64>,
    /// `‖B⁺∫_0^t U_k‖` for `k = 0..=n`.
    pub trace_norms: Vec<f64>,
    /// Bound on the mass of the omitted orders.
    pub bound: f64,
    pub status: TruncationStatus,
}

impl PartialSum {
    pub fn order(&self) -> usize {
        self.order_masses.len() - 1
    }

    pub fn mass(&self) -> f64 {
        self.density.l1_norm()
    }
}

/// `Σ_{k≤n} U_k(t) f`, stopping at the first `n` whose residual bound
/// `‖B⁺∫_0^t U_n‖` drops below `tol`.
pub fn v_partial_sum(
    t: f64,
    f: &PiecewiseDensity,
    g: &Geometry,
    spec: &BoundaryOperatorSpec,
    tol: f64,
    n_cap: usize,
) -> Result<PartialSum> {
    check_spec(spec)?;
    if !(tol > 0.0) {
        return Err(Error::Precondition("tol must be positive".into()));
    }
    let mut e = Expansion::new(intervals(g)?, spec, f, t)?;
    let mut sum = PartialSum {
        density: PiecewiseDensity::zero(),
        order_masses: Vec::new(),
        trace_norms: Vec::new(),
        bound: f64::INFINITY,
        status: TruncationStatus::Unconverged,
    };
    let (mut fronts, mut ends) = (Vec::new(), Vec::new());
    for n in 0..=n_cap {
        let u = e.order_density(n, t);
        let b = e.trace_integral(n, 0.0, t).norm();
        let front = e.arrival_front(n);
        sum.order_masses.push(u.l1_norm());
        sum.trace_norms.push(b);
        sum.density = sum.density.add(&u);
        if front >= t {
            sum.bound = 0.0;
            sum.status = TruncationStatus::Exact;
            return Ok(sum);
        }
        sum.bound = b;
        if b < tol {
            sum.status = TruncationStatus::Converged;
            return Ok(sum);
        }
        fronts.push(front);
        ends.push(e.arrival_end(n));
        if let Some(est) = detect(&sum.trace_norms, tol, traces_settled(&fronts, &ends, t)) {
            let drop = b - est.limit;
            if drop < tol {
                sum.bound = drop;
                sum.status = TruncationStatus::Stabilized;
                return Ok(sum);
            }
        }
    }
    Ok(sum)
}

/// [`v_partial_sum`] for `H_r = r H`.
pub fn v_r_partial_sum(
    t: f64,
    f: &PiecewiseDensity,
    r: f64,
    g: &Geometry,
    spec: &BoundaryOperatorSpec,
    tol: f64,
    n_cap: usize,
) -> Result<PartialSum> {
    v_partial_sum(t, f, g, &spec.scaled(r)?, tol, n_cap)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MassBalance {
    /// `Σ_{k≤n} ‖U_k(t) f‖`.
    pub lhs: f64,
    /// `‖f‖ - ‖B⁺∫_0^t U_n‖ + Σ_{k<n} brackets[k]`.
    pub rhs: f64,
    /// `‖H B⁺∫_0^t U_k‖ - ‖B⁺∫_0^t U_k‖` for `k < n`.
    pub brackets: Vec<f64>,
    pub residual: f64,
}

pub fn mass_balance_report(
    n: usize,
    t: f64,
    f: &PiecewiseDensity,
    g: &Geometry,
    spec: &BoundaryOperatorSpec,
) -> Result<MassBalance> {
    check_spec(spec)?;
    if !f.is_nonnegative() {
        return Err(Error::SignedDensity);
    }
    let gi = intervals(g)?;
    let mut e = Expansion::new(gi, spec, f, t)?;
    let mut lhs = 0.0;
    let mut brackets = Vec::with_capacity(n);
    for k in 0..=n {
        lhs += e.order_density(k, t).l1_norm();
        if k < n {
            let trace = e.trace_integral(k, 0.0, t);
            brackets.push(apply_h(spec, &trace, gi).norm() - trace.norm());
        }
    }
    let rhs = f.l1_norm() - e.trace_integral(n, 0.0, t).norm() + brackets.iter().sum::<f64>();
    Ok(MassBalance {
        lhs,
        rhs,
        brackets,
        residual: (lhs - rhs).abs(),
    })
}

/// `‖U_k(t+s) f - Σ_{j≤k} U_j(t) U_{k-j}(s) f‖`.
pub fn semigroup_identity_residual(
    k: usize,
    t: f64,
    s: f64,
    f: &PiecewiseDensity,
    g: &Geometry,
    spec: &BoundaryOperatorSpec,
) -> Result<f64> {
    check_spec(spec)?;
    let gi = intervals(g)?;
    let lhs = Expansion::new(gi, spec, f, t + s)?.order_density(k, t + s);
    let mut inner = Expansion::new(gi, spec, f, s)?;
    let mut rhs = PiecewiseDensity::zero();
    for j in 0..=k {
        let mid = inner.order_density(k - j, s);
        if mid.is_zero() {
            continue;
        }
        rhs = rhs.add(&Expansion::new(gi, spec, &mid, t)?.order_density(j, t));
    }
    Ok(lhs.sub(&rhs).l1_norm())
}
