//! Limit detection for nonincreasing nonnegative sequences such as
//! `n ↦ ‖B⁺∫ U_n‖` or `n ↦ ‖(M_λH)^n G_λ f‖`.

use serde::Serialize;

/// Number of trailing entries that must agree before a tail counts as settled.
pub const SPAN: usize = 5;

/// Largest ratio of successive differences accepted as geometric contraction.
pub const MAX_RATIO: f64 = 0.9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum LimitStatus {
    /// Every later entry is exactly zero.
    Exhausted,
    /// The last `SPAN` entries lie below the tolerance.
    Vanished,
    /// The tail settled at a value, extrapolated geometrically.
    Stabilized,
    /// The order cap was reached first.
    CapReached,
}

impl LimitStatus {
    pub fn is_conclusive(self) -> bool {
        self != LimitStatus::CapReached
    }

    pub fn as_str(self) -> &'static str {
        match self {
            LimitStatus::Exhausted => "exhausted",
            LimitStatus::Vanished => "vanished",
            LimitStatus::Stabilized => "stabilized",
            LimitStatus::CapReached => "cap-reached",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LimitEstimate {
    pub status: LimitStatus,
    pub limit: f64,
    /// Ratio of the last two differences, when defined.
    pub ratio: Option<f64>,
}

/// Ratio `d_n / d_{n-1}` of the last two differences. `Some(0.0)` when the
/// last difference is exactly zero.
fn difference_ratio(seq: &[f64]) -> Option<f64> {
    let n = seq.len();
    if n < 3 {
        return None;
    }
    let d1 = seq[n - 1] - seq[n - 2];
    let d0 = seq[n - 2] - seq[n - 3];
    if d1 == 0.0 {
        return Some(0.0);
    }
    if d0 == 0.0 {
        return None;
    }
    Some(d1 / d0)
}

/// Geometric extrapolation `x_n + d_n q / (1 - q)`, clamped to `[0, x_n]`.
fn extrapolate(seq: &[f64], q: f64) -> f64 {
    let n = seq.len();
    let last = seq[n - 1];
    if q == 0.0 {
        return last;
    }
    let d = last - seq[n - 2];
    (last + d * q / (1.0 - q)).clamp(0.0, last.max(0.0))
}

fn contracts_to(times: &[f64], horizon: f64, inclusive: bool) -> bool {
    let n = times.len();
    if n < 3 || times.iter().any(|e| !e.is_finite()) {
        return false;
    }
    let d1 = times[n - 1] - times[n - 2];
    let d0 = times[n - 2] - times[n - 3];
    if !(d0 > 0.0) || d1 < 0.0 {
        return false;
    }
    let q = d1 / d0;
    if q > MAX_RATIO {
        return false;
    }
    let limit = times[n - 1] + d1 * q / (1.0 - q);
    if inclusive {
        limit <= horizon
    } else {
        limit < horizon
    }
}

/// Whether a strictly increasing sequence of arrival times contracts
/// geometrically to a point before `horizon`.
pub fn fronts_settle_before(fronts: &[f64], horizon: f64) -> bool {
    contracts_to(fronts, horizon, false)
}

/// Outside evidence for [`detect`] on `n ↦ ‖B⁺∫_0^t U_n‖`, given the first
/// and last arrival time of each order.
///
/// Contracting fronts are necessary but not enough: an order whose last
/// arrival precedes `horizon` contributes its full trace mass, so a run of
/// such saturated terms can sit flat and still drop later. The tail counts
/// only if its terms are unsaturated, or if the last arrivals also contract
/// to a point no later than `horizon`, so that every later term saturates.
/// Last arrivals may be clipped at `horizon`; a clipped order is unsaturated.
pub fn traces_settled(fronts: &[f64], ends: &[f64], horizon: f64) -> bool {
    if !fronts_settle_before(fronts, horizon) {
        return false;
    }
    let n = ends.len();
    (n >= SPAN && ends[n - SPAN..].iter().all(|&l| l >= horizon)) || contracts_to(ends, horizon, true)
}

/// Decides whether the sequence seen so far has a detectable limit.
///
/// `settled` tells whether outside evidence rules out further drops of order
/// one (for time-domain traces: the arrival fronts contract to a point
/// before the window ends). Without it only a vanishing tail is accepted.
pub fn detect(seq: &[f64], tol: f64, settled: bool) -> Option<LimitEstimate> {
    let n = seq.len();
    if n < SPAN {
        return None;
    }
    let tail = &seq[n - SPAN..];
    let ratio = difference_ratio(seq);
    if tail.iter().all(|&x| x.abs() < tol) {
        let last = seq[n - 1];
        let limit = match ratio {
            Some(q) if (0.0..=MAX_RATIO).contains(&q) => extrapolate(seq, q),
            _ => last,
        };
        return Some(LimitEstimate {
            status: LimitStatus::Vanished,
            limit,
            ratio,
        });
    }
    if !settled {
        return None;
    }
    let hi = tail.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = tail.iter().copied().fold(f64::INFINITY, f64::min);
    if hi - lo >= tol / 10.0 {
        return None;
    }
    match ratio {
        Some(q) if (0.0..=MAX_RATIO).contains(&q) => Some(LimitEstimate {
            status: LimitStatus::Stabilized,
            limit: extrapolate(seq, q),
            ratio,
        }),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn geometric_tail_extrapolates() {
        let seq: Vec<f64> = (0..40).map(|n| 0.5 + 0.5f64.powi(n)).collect();
        let est = detect(&seq, 1e-8, true).unwrap();
        assert_eq!(est.status, LimitStatus::Stabilized);
        assert!((est.limit - 0.5).abs() < 1e-15);
    }

    #[test]
    fn plateau_needs_outside_evidence() {
        let seq = vec![1.0; 10];
        assert!(detect(&seq, 1e-8, false).is_none());
        let est = detect(&seq, 1e-8, true).unwrap();
        assert_eq!(est.limit, 1.0);
    }

    #[test]
    fn slow_decay_is_not_stabilized() {
        let seq: Vec<f64> = (0..40).map(|n| 0.99f64.powi(n)).collect();
        assert!(detect(&seq, 1e-8, true).is_none());
    }

    #[test]
    fn vanishing_tail() {
        let seq: Vec<f64> = (0..40).map(|n| 0.5f64.powi(n)).collect();
        let est = detect(&seq, 1e-8, false).unwrap();
        assert_eq!(est.status, LimitStatus::Vanished);
        assert!(est.limit.abs() < 1e-20);
    }

    #[test]
    fn fronts() {
        let e: Vec<f64> = (0..10).map(|n| 1.0 - 0.5f64.powi(n)).collect();
        assert!(fronts_settle_before(&e, 1.5));
        assert!(!fronts_settle_before(&e, 1.0));
        let e: Vec<f64> = (0..10).map(|n| n as f64).collect();
        assert!(!fronts_settle_before(&e, 100.0));
    }

    #[test]
    fn saturated_plateau_is_not_settled() {
        // last arrivals 2 - 2^-n: orders 0..=4 are saturated at t = 1.95
        let fronts: Vec<f64> = (0..5).map(|n| 1.0 - 0.5f64.powi(n)).collect();
        let ends: Vec<f64> = (0..5).map(|n| 2.0 - 0.5f64.powi(n)).collect();
        assert!(!traces_settled(&fronts, &ends, 1.95));
        let ends: Vec<f64> = (0..12).map(|n| (2.0 - 0.5f64.powi(n)).min(1.95)).collect();
        let fronts: Vec<f64> = (0..12).map(|n| 1.0 - 0.5f64.powi(n)).collect();
        assert!(traces_settled(&fronts, &ends, 1.95));
        // every later order saturates once the ends settle by the horizon
        assert!(traces_settled(&fronts[..5], &ends[..5], 2.0));
    }
}
