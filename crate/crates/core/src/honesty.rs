//! Mass-defect functionals and honesty verdicts.
//!
//! A trajectory `t ↦ V_H(t) f` is honest on a window `[s, t]` when all mass
//! it loses there leaves through the boundary functional. The defect over a
//! window is `lim_n ‖B⁺∫_s^t U_n(r) f dr‖`; honest windows have limit zero.

use crate::boundary::{apply_h, g_lambda, m_lambda, BoundaryOperatorSpec, BoundaryVector, Side};
use crate::convergence::{detect, LimitEstimate, LimitStatus};
use crate::density::{ParticleEnsemble, PiecewiseDensity};
use crate::error::{Error, Result};
use crate::expansion::{check_spec, intervals, v_partial_sum, Expansion};
use crate::geometry::{Geometry, IntervalUnion};

/// Default tolerance on the exact path.
pub const DEFAULT_TOL: f64 = 1e-8;

/// Default number of sample points per honesty interval.
pub const DEFAULT_SAMPLES: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Honest,
    Dishonest,
    Inconclusive,
}

impl Verdict {
    /// Process exit status used by the command-line tool.
    pub fn exit_code(self) -> i32 {
        match self {
            Verdict::Honest => 0,
            Verdict::Dishonest => 2,
            Verdict::Inconclusive => 3,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Honest => "honest",
            Verdict::Dishonest => "dishonest",
            Verdict::Inconclusive => "inconclusive",
        }
    }

    /// Combination over several diagnostics: any inconclusive part makes the
    /// whole inconclusive, otherwise one dishonest part suffices.
    pub fn merge(self, other: Verdict) -> Verdict {
        use Verdict::*;
        match (self, other) {
            (Inconclusive, _) | (_, Inconclusive) => Inconclusive,
            (Dishonest, _) | (_, Dishonest) => Dishonest,
            _ => Honest,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DefectWindow {
    Time { s: f64, t: f64 },
    Resolvent { lambda: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct DefectReport {
    pub window: DefectWindow,
    /// `n ↦ ‖B⁺∫_s^t U_n‖`, or `n ↦ ‖(M_λH)^n G_λ f‖`.
    pub sequence: Vec<f64>,
    pub limit: f64,
    pub status: LimitStatus,
    pub tol: f64,
    pub verdict: Verdict,
}

impl DefectReport {
    /// `η_f` over the window: minus the defect limit.
    pub fn eta(&self) -> f64 {
        -self.limit
    }

    fn from_estimate(window: DefectWindow, sequence: Vec<f64>, est: LimitEstimate, tol: f64) -> Self {
        let verdict = if !est.status.is_conclusive() {
            Verdict::Inconclusive
        } else if est.limit <= tol {
            Verdict::Honest
        } else {
            Verdict::Dishonest
        };
        Self {
            window,
            sequence,
            limit: est.limit,
            status: est.status,
            tol,
            verdict,
        }
    }
}

fn require_nonnegative(f: &PiecewiseDensity) -> Result<()> {
    if f.is_nonnegative() {
        Ok(())
    } else {
        Err(Error::SignedDensity)
    }
}

fn check_tol(tol: f64) -> Result<()> {
    if tol > 0.0 {
        Ok(())
    } else {
        Err(Error::Precondition("tol must be positive".into()))
    }
}

fn check_window(s: f64, t: f64) -> Result<()> {
    if 0.0 <= s && s <= t && t.is_finite() {
        Ok(())
    } else {
        Err(Error::Precondition(format!("window ({s}, {t}) needs 0 <= s <= t")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MassLoss {
    pub value: f64,
    /// Both partial sums reached their tolerance.
    pub conclusive: bool,
}

/// `‖V_H(s) f‖ - ‖V_H(t) f‖`.
pub fn mass_loss(
    s: f64,
    t: f64,
    f: &PiecewiseDensity,
    g: &Geometry,
    spec: &BoundaryOperatorSpec,
    tol: f64,
    n_cap: usize,
) -> Result<MassLoss> {
    check_window(s, t)?;
    require_nonnegative(f)?;
    let a = v_partial_sum(s, f, g, spec, tol, n_cap)?;
    let b = v_partial_sum(t, f, g, spec, tol, n_cap)?;
    Ok(MassLoss {
        value: a.mass() - b.mass(),
        conclusive: a.status.is_conclusive() && b.status.is_conclusive(),
    })
}

/// `∫_{Γ₊} ψ - ∫_{Γ₋} H ψ`, with signs.
pub fn a0_functional(psi: &BoundaryVector, spec: &BoundaryOperatorSpec, g: &IntervalUnion) -> f64 {
    psi.sum() - apply_h(spec, psi, g).sum()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryLoss {
    /// `Σ_k 𝔞₀(B⁺∫_0^t U_k f)` over the orders computed.
    pub value: f64,
    /// Bound on the contribution of the orders left out.
    pub bound: f64,
    pub conclusive: bool,
}

/// Mass that leaves through the boundary functional over `[0, t]`.
pub fn boundary_loss(
    t: f64,
    f: &PiecewiseDensity,
    g: &Geometry,
    spec: &BoundaryOperatorSpec,
    tol: f64,
    n_cap: usize,
) -> Result<BoundaryLoss> {
    check_spec(spec)?;
    require_nonnegative(f)?;
    check_tol(tol)?;
    let gi = intervals(g)?;
    let mut e = Expansion::new(gi, spec, f, t)?;
    let (seq, est) = e.trace_norm_limit(t, tol, n_cap);
    let value = (0..seq.len())
        .map(|k| a0_functional(&e.trace_integral(k, 0.0, t), spec, gi))
        .sum();
    // 𝔞₀ of order k is at most b_k - b_{k+1}
    let bound = (seq[seq.len() - 1] - est.limit).max(0.0);
    Ok(BoundaryLoss {
        value,
        bound,
        conclusive: est.status.is_conclusive(),
    })
}

/// Finite-difference estimate of `ĉ(f)`: boundary loss over `[0, h]`
/// divided by `h`. An estimate only; no convergence rate is known.
pub fn c_hat_estimate(
    h: f64,
    f: &PiecewiseDensity,
    g: &Geometry,
    spec: &BoundaryOperatorSpec,
    tol: f64,
    n_cap: usize,
) -> Result<f64> {
    if !(h > 0.0) {
        return Err(Error::Precondition("step h must be positive".into()));
    }
    Ok(boundary_loss(h, f, g, spec, tol, n_cap)?.value / h)
}

/// Window report from the `[0, s]` and `[0, t]` limits. Each of those
/// sequences is nonincreasing, which the window sequence need not be.
fn window_report(
    e: &mut Expansion,
    s: f64,
    t: f64,
    at_s: &(Vec<f64>, LimitEstimate),
    at_t: &(Vec<f64>, LimitEstimate),
    tol: f64,
) -> DefectReport {
    let len = at_s.0.len().max(at_t.0.len());
    let sequence = (0..len).map(|n| e.trace_integral(n, s, t).norm()).collect();
    let (es, et) = (at_s.1, at_t.1);
    let status = if !es.status.is_conclusive() || !et.status.is_conclusive() {
        LimitStatus::CapReached
    } else if es.status == LimitStatus::Stabilized || et.status == LimitStatus::Stabilized {
        LimitStatus::Stabilized
    } else if es.status == LimitStatus::Exhausted && et.status == LimitStatus::Exhausted {
        LimitStatus::Exhausted
    } else {
        LimitStatus::Vanished
    };
    let est = LimitEstimate {
        status,
        limit: (et.limit - es.limit).max(0.0),
        ratio: None,
    };
    DefectReport::from_estimate(DefectWindow::Time { s, t }, sequence, est, tol)
}

fn prepare<'a>(
    f: &PiecewiseDensity,
    g: &'a Geometry,
    spec: &BoundaryOperatorSpec,
    tol: f64,
) -> Result<&'a IntervalUnion> {
    check_spec(spec)?;
    require_nonnegative(f)?;
    check_tol(tol)?;
    intervals(g)
}

/// `lim_n ‖B⁺∫_s^t U_n(r) f dr‖` with a verdict.
pub fn defect(
    s: f64,
    t: f64,
    f: &PiecewiseDensity,
    g: &Geometry,
    spec: &BoundaryOperatorSpec,
    tol: f64,
    n_cap: usize,
) -> Result<DefectReport> {
    check_window(s, t)?;
    let gi = prepare(f, g, spec, tol)?;
    let mut e = Expansion::new(gi, spec, f, t)?;
    let at_t = e.trace_norm_limit(t, tol, n_cap);
    let at_s = e.trace_norm_limit(s, tol, n_cap);
    Ok(window_report(&mut e, s, t, &at_s, &at_t, tol))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SubintervalReport {
    pub interval: (f64, f64),
    pub verdict: Verdict,
    /// One report per sampled sub-window `s < t`, in grid order.
    pub windows: Vec<DefectReport>,
    /// Index into `windows` of the largest limit.
    pub worst: Option<usize>,
}

impl SubintervalReport {
    pub fn witness(&self) -> Option<&DefectReport> {
        self.worst.map(|i| &self.windows[i])
    }
}

/// Honesty on `J = [s1, s2]`, sampled on `samples` equally spaced points;
/// every pair of grid points is a sub-window.
#[allow(clippy::too_many_arguments)]
pub fn honesty_on_subinterval(
    s1: f64,
    s2: f64,
    f: &PiecewiseDensity,
    samples: usize,
    g: &Geometry,
    spec: &BoundaryOperatorSpec,
    tol: f64,
    n_cap: usize,
) -> Result<SubintervalReport> {
    check_window(s1, s2)?;
    if samples < 2 {
        return Err(Error::Precondition("honesty grid needs at least 2 samples".into()));
    }
    let gi = prepare(f, g, spec, tol)?;
    let mut report = SubintervalReport {
        interval: (s1, s2),
        verdict: Verdict::Honest,
        windows: Vec::new(),
        worst: None,
    };
    if s1 == s2 {
        return Ok(report);
    }
    let grid: Vec<f64> = (0..samples)
        .map(|i| {
            if i + 1 == samples {
                s2
            } else {
                s1 + (s2 - s1) * i as f64 / (samples - 1) as f64
            }
        })
        .collect();
    let mut e = Expansion::new(gi, spec, f, s2)?;
    let limits: Vec<_> = grid.iter().map(|&x| e.trace_norm_limit(x, tol, n_cap)).collect();
    for i in 0..samples {
        for j in i + 1..samples {
            let r = window_report(&mut e, grid[i], grid[j], &limits[i], &limits[j], tol);
            report.verdict = report.verdict.merge(r.verdict);
            let better = report
                .worst
                .is_none_or(|w| r.limit > report.windows[w].limit);
            if better {
                report.worst = Some(report.windows.len());
            }
            report.windows.push(r);
        }
    }
    Ok(report)
}

/// `u_0 = G_λ f`, `u_{n+1} = M_λ H u_n` for `n < count`.
pub fn resolvent_iterates(
    f: &PiecewiseDensity,
    lambda: f64,
    count: usize,
    g: &IntervalUnion,
    spec: &BoundaryOperatorSpec,
) -> Vec<BoundaryVector> {
    let mut out = Vec::with_capacity(count + 1);
    let mut u = g_lambda(f, lambda, g);
    for _ in 0..count {
        let next = m_lambda(&apply_h(spec, &u, g), lambda, g);
        out.push(u);
        u = next;
    }
    out.push(u);
    out
}

/// `lim_n ‖(M_λH)^n G_λ f‖` with a verdict.
pub fn resolvent_defect(
    f: &PiecewiseDensity,
    lambda: f64,
    g: &Geometry,
    spec: &BoundaryOperatorSpec,
    tol: f64,
    n_cap: usize,
) -> Result<DefectReport> {
    if !(lambda > 0.0) {
        return Err(Error::Precondition(format!("λ = {lambda} must be positive")));
    }
    let gi = prepare(f, g, spec, tol)?;
    spec.validate_for(gi)?;
    let window = DefectWindow::Resolvent { lambda };
    let mut u = g_lambda(f, lambda, gi);
    let mut seq = Vec::new();
    for _ in 0..=n_cap {
        seq.push(u.norm());
        if u.is_zero() {
            let est = LimitEstimate {
                status: LimitStatus::Exhausted,
                limit: 0.0,
                ratio: None,
            };
            return Ok(DefectReport::from_estimate(window, seq, est, tol));
        }
        if let Some(est) = detect(&seq, tol, true) {
            return Ok(DefectReport::from_estimate(window, seq, est, tol));
        }
        u = m_lambda(&apply_h(spec, &u, gi), lambda, gi);
    }
    let est = LimitEstimate {
        status: LimitStatus::CapReached,
        limit: *seq.last().expect("nonempty"),
        ratio: None,
    };
    Ok(DefectReport::from_estimate(window, seq, est, tol))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SufficientCheck {
    /// The inequality holds at every checked index.
    Satisfied { checked: usize },
    /// First index where it fails, with both sides.
    Violated { index: usize, lhs: f64, rhs: f64 },
}

impl SufficientCheck {
    pub fn is_satisfied(&self) -> bool {
        matches!(self, SufficientCheck::Satisfied { .. })
    }
}

fn le(lhs: f64, rhs: f64) -> bool {
    lhs <= rhs + 1e-14 * rhs.abs().max(1.0)
}

/// `(H h)(a_k) ≤ h(b_k)` for `k = 0..=K`, where `K` is the last index of `h`.
///
/// `h` must be strictly positive on `b_0..b_K`. Only these indices are
/// checked; whether `h` extends to a summable function on all of `Γ₊`
/// satisfying the same inequality is up to the caller.
pub fn sufficient_check_trace(
    h: &BoundaryVector,
    g: &IntervalUnion,
    spec: &BoundaryOperatorSpec,
) -> Result<SufficientCheck> {
    if h.side() != Side::Outgoing {
        return Err(Error::WrongBoundarySide { expected: "outgoing" });
    }
    check_spec(spec)?;
    let last = match h.iter().last() {
        Some((k, _)) => k,
        None => return Err(Error::NotQuasiInterior { index: 0 }),
    };
    if let Some(index) = (0..=last).find(|&k| !(h.get(k) > 0.0)) {
        return Err(Error::NotQuasiInterior { index });
    }
    let hh = apply_h(spec, h, g);
    for k in 0..=last {
        let (lhs, rhs) = (hh.get(k), h.get(k));
        if !le(lhs, rhs) {
            return Ok(SufficientCheck::Violated { index: k, lhs, rhs });
        }
    }
    Ok(SufficientCheck::Satisfied { checked: last + 1 })
}

/// `(M_λ H) G_λ f ≤ G_λ f` entrywise.
pub fn sufficient_check_resolvent(
    f: &PiecewiseDensity,
    lambda: f64,
    g: &IntervalUnion,
    spec: &BoundaryOperatorSpec,
) -> Result<SufficientCheck> {
    require_nonnegative(f)?;
    check_spec(spec)?;
    if !(lambda > 0.0) {
        return Err(Error::Precondition(format!("λ = {lambda} must be positive")));
    }
    let gf = g_lambda(f, lambda, g);
    let lhs = m_lambda(&apply_h(spec, &gf, g), lambda, g);
    let mut indices: Vec<usize> = gf.iter().chain(lhs.iter()).map(|(k, _)| k).collect();
    indices.sort_unstable();
    indices.dedup();
    for &k in &indices {
        if !le(lhs.get(k), gf.get(k)) {
            return Ok(SufficientCheck::Violated {
                index: k,
                lhs: lhs.get(k),
                rhs: gf.get(k),
            });
        }
    }
    Ok(SufficientCheck::Satisfied {
        checked: indices.len(),
    })
}

/// Verdict for the whole trajectory up to `horizon`. The defect over
/// `[0, t]` grows with `t`, so the largest window decides.
pub fn trajectory_verdict(
    horizon: f64,
    f: &PiecewiseDensity,
    g: &Geometry,
    spec: &BoundaryOperatorSpec,
    tol: f64,
    n_cap: usize,
) -> Result<DefectReport> {
    defect(0.0, horizon, f, g, spec, tol, n_cap)
}

/// Rebound-order trace decay of a particle cloud over a time window.
#[derive(Debug, Clone, PartialEq)]
pub struct BilliardDecay {
    /// Entry `n`: weight whose `(n+1)`-th reflection falls in the window.
    pub estimates: Vec<f64>,
    /// Shortest observed flight between consecutive reflections.
    pub min_flight: f64,
    /// Statistical tolerance `3/√N`.
    pub tol: f64,
    pub report: DefectReport,
}

/// Trace-decay check between two snapshots of the same cloud.
///
/// Specular reflection conserves weight, so the only possible defect is
/// weight that reflects infinitely often within the window. With finitely
/// many particles the estimates reach zero past the largest rebound count.
pub fn billiard_trace_decay(start: &ParticleEnsemble, end: &ParticleEnsemble) -> Result<BilliardDecay> {
    if end.is_empty() || start.len() != end.len() || start.time > end.time {
        return Err(Error::Precondition(
            "snapshots must come from the same nonempty cloud, in time order".into(),
        ));
    }
    let tol = 3.0 / (end.len() as f64).sqrt();
    let top = end.max_rebounds() as usize;
    let mut estimates = vec![0.0; top + 1];
    for (p, q) in start.particles.iter().zip(&end.particles) {
        for est in &mut estimates[p.rebounds as usize..q.rebounds as usize] {
            *est += q.w;
        }
    }
    let est = LimitEstimate {
        status: LimitStatus::Exhausted,
        limit: 0.0,
        ratio: None,
    };
    let report = DefectReport::from_estimate(
        DefectWindow::Time {
            s: start.time,
            t: end.time,
        },
        estimates.clone(),
        est,
        tol,
    );
    Ok(BilliardDecay {
        estimates,
        min_flight: end.min_flight(),
        tol,
        report,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn setup(unit: bool) -> (Geometry, BoundaryOperatorSpec, PiecewiseDensity) {
        let gi = if unit {
            IntervalUnion::unit_ladder()
        } else {
            IntervalUnion::geometric_ladder()
        };
        let f = PiecewiseDensity::interval_indicator(&gi, 0).unwrap();
        (Geometry::from(gi), BoundaryOperatorSpec::shift(1.0).unwrap(), f)
    }

    #[test]
    fn mass_loss_examples() {
        let (g, h, f) = setup(true);
        let l = mass_loss(0.0, 10.0, &f, &g, &h, 1e-8, 100).unwrap();
        assert!(l.value.abs() < 1e-12 && l.conclusive);
        let (g, h, f) = setup(false);
        let l = mass_loss(0.0, 2.0, &f, &g, &h, 1e-8, 200).unwrap();
        assert!((l.value - 1.0).abs() < 1e-12 && l.conclusive);
        assert_eq!(mass_loss(1.0, 1.0, &f, &g, &h, 1e-8, 200).unwrap().value, 0.0);
    }

    #[test]
    fn a0_examples() {
        let g = IntervalUnion::unit_ladder();
        let h = BoundaryOperatorSpec::shift(1.0).unwrap();
        let psi = BoundaryVector::outgoing([(0, 2.0), (3, 1.5)]);
        assert_eq!(a0_functional(&psi, &h, &g), 0.0);
        let h = BoundaryOperatorSpec::shift(0.5).unwrap();
        assert_eq!(a0_functional(&BoundaryVector::outgoing([(0, 2.0)]), &h, &g), 1.0);
        assert_eq!(a0_functional(&BoundaryVector::zero(Side::Outgoing), &h, &g), 0.0);
    }

    #[test]
    fn defect_examples() {
        let (g, h, f) = setup(true);
        let d = defect(0.0, 5.0, &f, &g, &h, 1e-8, 100).unwrap();
        assert_eq!(d.verdict, Verdict::Honest);
        let (g, h, f) = setup(false);
        let d = defect(0.0, 1.5, &f, &g, &h, 1e-8, 200).unwrap();
        assert_eq!(d.verdict, Verdict::Dishonest);
        assert!((d.limit - 0.5).abs() < 1e-10);
        assert!((d.eta() + 0.5).abs() < 1e-10);
        let z = defect(0.0, 1.5, &PiecewiseDensity::zero(), &g, &h, 1e-8, 200).unwrap();
        assert_eq!(z.verdict, Verdict::Honest);
        assert!(z.sequence.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn subintervals() {
        let (g, h, f) = setup(false);
        let r = honesty_on_subinterval(0.5, 1.0, &f, 8, &g, &h, 1e-8, 200).unwrap();
        assert_eq!(r.verdict, Verdict::Honest);
        let r = honesty_on_subinterval(1.0, 2.0, &f, 8, &g, &h, 1e-8, 200).unwrap();
        assert_eq!(r.verdict, Verdict::Dishonest);
        let w = r.witness().unwrap();
        assert_eq!(w.window, DefectWindow::Time { s: 1.0, t: 2.0 });
        assert!((w.limit - 1.0).abs() < 1e-10);
        let r = honesty_on_subinterval(1.5, 1.5, &f, 8, &g, &h, 1e-8, 200).unwrap();
        assert_eq!(r.verdict, Verdict::Honest);
    }

    #[test]
    fn resolvent_examples() {
        let (g, h, f) = setup(true);
        let d = resolvent_defect(&f, 1.0, &g, &h, 1e-8, 500).unwrap();
        assert_eq!(d.verdict, Verdict::Honest);
        let (g, h, f) = setup(false);
        let d = resolvent_defect(&f, 1.0, &g, &h, 1e-8, 500).unwrap();
        assert_eq!(d.verdict, Verdict::Dishonest);
        let want = (1.0 - (-1.0f64).exp()) * (-1.0f64).exp();
        assert!((d.limit - want).abs() < 1e-10, "{}", d.limit);
    }

    #[test]
    fn sufficient_checks() {
        let g = IntervalUnion::unit_ladder();
        let h = BoundaryOperatorSpec::shift(1.0).unwrap();
        let ones = BoundaryVector::outgoing((0..10).map(|k| (k, 1.0)));
        assert!(sufficient_check_trace(&ones, &g, &h).unwrap().is_satisfied());
        let holey = BoundaryVector::outgoing([(0, 1.0), (2, 1.0)]);
        assert!(matches!(
            sufficient_check_trace(&holey, &g, &h),
            Err(Error::NotQuasiInterior { index: 1 })
        ));

        let g = IntervalUnion::geometric_ladder();
        let f = PiecewiseDensity::interval_indicator(&g, 0).unwrap();
        match sufficient_check_resolvent(&f, 1.0, &g, &h).unwrap() {
            SufficientCheck::Violated { index, lhs, rhs } => {
                assert_eq!(index, 1);
                let want = (1.0 - (-1.0f64).exp()) * (-0.5f64).exp();
                assert!((lhs - want).abs() < 1e-15);
                assert_eq!(rhs, 0.0);
            }
            other => panic!("{other:?}"),
        }
    }
}
