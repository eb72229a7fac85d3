//! Disjoint unions of open intervals `I_k = (a_k, b_k)` with unit drift.
//!
//! Characteristics move right at unit speed, leave `I_k` through `b_k` and,
//! under a boundary operator, re-enter at some `a_j`. Incoming boundary points
//! are the left ends `a_k`, outgoing ones the right ends `b_k`, both carrying
//! counting measure.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How the interval endpoints are produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum IntervalRule {
    /// A finite explicit list of `(a_k, b_k)`.
    Explicit(Vec<(f64, f64)>),
    /// `a_k = origin + spacing·k`, `Δ_k = width`.
    Arithmetic { origin: f64, spacing: f64, width: f64 },
    /// `a_k = origin + spacing·k`, `Δ_k = first_width·ratio^k` with
    /// `0 < ratio < 1`, so `Σ Δ_k = first_width / (1 - ratio)` is finite.
    Geometric {
        origin: f64,
        spacing: f64,
        first_width: f64,
        ratio: f64,
    },
}

/// Where a real number sits relative to the union.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Location {
    Interior(usize),
    /// Equal to `a_k`.
    LeftEnd(usize),
    /// Equal to `b_k`.
    RightEnd(usize),
    Outside,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntervalUnion {
    rule: IntervalRule,
}

impl IntervalUnion {
    pub fn new(rule: IntervalRule) -> Result<Self> {
        match &rule {
            IntervalRule::Explicit(list) => {
                if list.is_empty() {
                    return Err(Error::InvalidGeometry("no intervals".into()));
                }
                for (k, &(a, b)) in list.iter().enumerate() {
                    if !(a.is_finite() && b.is_finite() && a < b) {
                        return Err(Error::InvalidGeometry(format!(
                            "interval {k} = ({a}, {b}) is empty or not finite"
                        )));
                    }
                    if let Some(&(next_a, _)) = list.get(k + 1) {
                        if !(b < next_a) {
                            return Err(Error::InvalidGeometry(format!(
                                "b_{k} = {b} must lie strictly left of a_{} = {next_a}",
                                k + 1
                            )));
                        }
                    }
                }
            }
            IntervalRule::Arithmetic {
                origin,
                spacing,
                width,
            } => {
                if !(origin.is_finite() && *width > 0.0 && width < spacing && spacing.is_finite())
                {
                    return Err(Error::InvalidGeometry(
                        "arithmetic rule needs 0 < width < spacing".into(),
                    ));
                }
            }
            IntervalRule::Geometric {
                origin,
                spacing,
                first_width,
                ratio,
            } => {
                if !(origin.is_finite()
                    && *first_width > 0.0
                    && first_width < spacing
                    && spacing.is_finite())
                {
                    return Err(Error::InvalidGeometry(
                        "geometric rule needs 0 < first_width < spacing".into(),
                    ));
                }
                if !(*ratio > 0.0 && *ratio < 1.0) {
                    return Err(Error::InvalidGeometry(
                        "geometric rule needs 0 < ratio < 1".into(),
                    ));
                }
            }
        }
        Ok(Self { rule })
    }

    /// `a_k = 2k`, `Δ_k = 1`: infinite total width.
    pub fn unit_ladder() -> Self {
        Self::new(IntervalRule::Arithmetic {
            origin: 0.0,
            spacing: 2.0,
            width: 1.0,
        })
        .expect("valid rule")
    }

    /// `a_k = 3k`, `Δ_k = 2^{-k}`: total width 2.
    pub fn geometric_ladder() -> Self {
        Self::new(IntervalRule::Geometric {
            origin: 0.0,
            spacing: 3.0,
            first_width: 1.0,
            ratio: 0.5,
        })
        .expect("valid rule")
    }

    pub fn rule(&self) -> &IntervalRule {
        &self.rule
    }

    /// Number of intervals, `None` when generated without end.
    pub fn count(&self) -> Option<usize> {
        match &self.rule {
            IntervalRule::Explicit(list) => Some(list.len()),
            _ => None,
        }
    }

    pub fn contains_index(&self, k: usize) -> bool {
        self.count().is_none_or(|n| k < n)
    }

    /// `(a_k, b_k)`, or `None` past the end of a finite list.
    pub fn interval(&self, k: usize) -> Option<(f64, f64)> {
        match &self.rule {
            IntervalRule::Explicit(list) => list.get(k).copied(),
            IntervalRule::Arithmetic {
                origin,
                spacing,
                width,
            } => {
                let a = origin + spacing * k as f64;
                Some((a, a + width))
            }
            IntervalRule::Geometric {
                origin,
                spacing,
                first_width,
                ratio,
            } => {
                let a = origin + spacing * k as f64;
                Some((a, a + first_width * ratio.powi(k as i32)))
            }
        }
    }

    pub fn left(&self, k: usize) -> f64 {
        self.interval(k).expect("interval index in range").0
    }

    pub fn right(&self, k: usize) -> f64 {
        self.interval(k).expect("interval index in range").1
    }

    /// `Δ_k = b_k - a_k`.
    pub fn width(&self, k: usize) -> f64 {
        match &self.rule {
            IntervalRule::Arithmetic { width, .. } => *width,
            IntervalRule::Geometric {
                first_width, ratio, ..
            } => first_width * ratio.powi(k as i32),
            IntervalRule::Explicit(list) => {
                let (a, b) = list[k];
                b - a
            }
        }
    }

    /// `Σ_{m=from}^{to} Δ_m`; zero when `to < from`. Indices past the end of
    /// a finite list contribute nothing.
    pub fn width_sum(&self, from: usize, to: usize) -> f64 {
        if to < from {
            return 0.0;
        }
        match &self.rule {
            IntervalRule::Arithmetic { width, .. } => width * (to - from + 1) as f64,
            IntervalRule::Geometric {
                first_width, ratio, ..
            } => {
                let n = (to - from + 1) as i32;
                first_width * ratio.powi(from as i32) * (1.0 - ratio.powi(n)) / (1.0 - ratio)
            }
            IntervalRule::Explicit(list) => list
                .iter()
                .take(to + 1)
                .skip(from)
                .map(|(a, b)| b - a)
                .sum(),
        }
    }

    /// `Σ_{m≥from} Δ_m`, possibly infinite.
    pub fn tail_width(&self, from: usize) -> f64 {
        match &self.rule {
            IntervalRule::Arithmetic { .. } => f64::INFINITY,
            IntervalRule::Geometric {
                first_width, ratio, ..
            } => first_width * ratio.powi(from as i32) / (1.0 - ratio),
            IntervalRule::Explicit(list) => {
                list.iter().skip(from).map(|(a, b)| b - a).sum()
            }
        }
    }

    /// `Δ = Σ_k Δ_k`.
    pub fn total_width(&self) -> f64 {
        self.tail_width(0)
    }

    /// Number of intervals past `I_k` that mass starting in `I_k` can enter
    /// within time `t` when each exit `b_j` feeds `a_{j+1}`.
    ///
    /// This is the smallest `n` with `Σ_{j=k+1}^{k+n} Δ_j ≥ t`, capped by the
    /// number of intervals that exist. `None` means no finite `n` works: the
    /// widths past `k` sum to at most `t`, so trajectories can pass through
    /// infinitely many intervals before `t`.
    pub fn reachable_count(&self, k: usize, t: f64) -> Option<usize> {
        if t <= 0.0 {
            return Some(0);
        }
        match &self.rule {
            IntervalRule::Arithmetic { width, .. } => Some((t / width).ceil() as usize),
            IntervalRule::Explicit(list) => {
                let mut acc = 0.0;
                let mut n = 0;
                for (a, b) in list.iter().skip(k + 1) {
                    n += 1;
                    acc += b - a;
                    if acc >= t {
                        break;
                    }
                }
                Some(n)
            }
            IntervalRule::Geometric { .. } => {
                if self.tail_width(k + 1) <= t {
                    return None;
                }
                let mut acc = 0.0;
                let mut n = 0;
                while acc < t {
                    n += 1;
                    acc += self.width(k + n);
                }
                Some(n)
            }
        }
    }

    pub fn locate(&self, x: f64) -> Location {
        if !x.is_finite() {
            return Location::Outside;
        }
        let k = match &self.rule {
            IntervalRule::Explicit(list) => {
                // last interval whose a_k <= x
                let idx = list.partition_point(|&(a, _)| a <= x);
                if idx == 0 {
                    return Location::Outside;
                }
                idx - 1
            }
            IntervalRule::Arithmetic { origin, spacing, .. }
            | IntervalRule::Geometric { origin, spacing, .. } => {
                if x < *origin {
                    return Location::Outside;
                }
                ((x - origin) / spacing).floor() as usize
            }
        };
        let (a, b) = match self.interval(k) {
            Some(iv) => iv,
            None => return Location::Outside,
        };
        if x == a {
            Location::LeftEnd(k)
        } else if x == b {
            Location::RightEnd(k)
        } else if x > a && x < b {
            Location::Interior(k)
        } else {
            Location::Outside
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_ladder_endpoints() {
        let g = IntervalUnion::unit_ladder();
        assert_eq!(g.interval(3), Some((6.0, 7.0)));
        assert_eq!(g.width_sum(1, 4), 4.0);
        assert_eq!(g.total_width(), f64::INFINITY);
    }

    #[test]
    fn geometric_ladder_widths() {
        let g = IntervalUnion::geometric_ladder();
        assert_eq!(g.width(2), 0.25);
        assert_eq!(g.interval(2), Some((6.0, 6.25)));
        assert!((g.width_sum(1, 3) - 0.875).abs() < 1e-15);
        assert!((g.total_width() - 2.0).abs() < 1e-15);
        assert!((g.tail_width(1) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn width_sum_matches_direct_summation() {
        let g = IntervalUnion::geometric_ladder();
        let direct: f64 = (3..=17).map(|k| g.width(k)).sum();
        assert!((g.width_sum(3, 17) - direct).abs() < 1e-15);
        assert_eq!(g.width_sum(4, 3), 0.0);
    }

    #[test]
    fn locate_points() {
        let g = IntervalUnion::unit_ladder();
        assert_eq!(g.locate(0.7), Location::Interior(0));
        assert_eq!(g.locate(2.0), Location::LeftEnd(1));
        assert_eq!(g.locate(3.0), Location::RightEnd(1));
        assert_eq!(g.locate(1.5), Location::Outside);
        assert_eq!(g.locate(-0.5), Location::Outside);

        let e = IntervalUnion::new(IntervalRule::Explicit(vec![(0.0, 1.0), (5.0, 6.0)])).unwrap();
        assert_eq!(e.locate(5.5), Location::Interior(1));
        assert_eq!(e.locate(7.0), Location::Outside);
    }

    #[test]
    fn rejects_overlapping_lists() {
        let r = IntervalUnion::new(IntervalRule::Explicit(vec![(0.0, 2.0), (1.0, 3.0)]));
        assert!(matches!(r, Err(Error::InvalidGeometry(_))));
        let r = IntervalUnion::new(IntervalRule::Geometric {
            origin: 0.0,
            spacing: 1.0,
            first_width: 1.0,
            ratio: 0.5,
        });
        assert!(r.is_err());
    }

    #[test]
    fn reachability() {
        let unit = IntervalUnion::unit_ladder();
        assert_eq!(unit.reachable_count(0, 2.5), Some(3));
        assert_eq!(unit.reachable_count(0, 0.0), Some(0));

        let geo = IntervalUnion::geometric_ladder();
        // Σ_{j≥1} Δ_j = 1
        assert_eq!(geo.reachable_count(0, 1.5), None);
        assert_eq!(geo.reachable_count(0, 0.7), Some(2));

        let e = IntervalUnion::new(IntervalRule::Explicit(vec![(0.0, 1.0), (2.0, 3.0)])).unwrap();
        assert_eq!(e.reachable_count(0, 10.0), Some(1));
    }
}
