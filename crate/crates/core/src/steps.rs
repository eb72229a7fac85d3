//! Compactly supported piecewise-constant functions on the real line.
//!
//! A [`Steps`] value is stored as a strictly increasing knot vector and one
//! value per cell: `values[i]` holds on `[knots[i], knots[i + 1])`, and the
//! function is zero outside `[knots[0], knots[last])`. Both phase-space
//! densities on a single interval and boundary-trace time series use it.
//!
//! Values are kept canonical: no zero-width cells, no zero cells at either
//! end, and no two adjacent cells carrying the same value.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Steps {
    knots: Vec<f64>,
    values: Vec<f64>,
}

impl Steps {
    pub fn zero() -> Self {
        Self::default()
    }

    /// `value` on `[lo, hi)`, zero elsewhere.
    pub fn indicator(lo: f64, hi: f64, value: f64) -> Self {
        Self::from_cells(vec![(lo, hi, value)])
    }

    /// Builds a function from `(lo, hi, value)` cells.
    ///
    /// Cells must not overlap; gaps between them are zero. Empty or inverted
    /// cells are dropped.
    pub fn from_cells(mut cells: Vec<(f64, f64, f64)>) -> Self {
        cells.retain(|&(lo, hi, v)| hi > lo && v != 0.0);
        cells.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut knots = Vec::with_capacity(cells.len() * 2);
        let mut values = Vec::with_capacity(cells.len() * 2);
        for (lo, hi, v) in cells {
            match knots.last() {
                None => knots.push(lo),
                Some(&end) => {
                    debug_assert!(lo >= end, "overlapping cells");
                    if lo > end {
                        values.push(0.0);
                        knots.push(lo);
                    }
                }
            }
            values.push(v);
            knots.push(hi);
        }
        let mut s = Self { knots, values };
        s.canonicalize();
        s
    }

    /// Builds a function from raw knots and values, then canonicalizes.
    ///
    /// Returns `None` when the lengths do not match or the knots are not
    /// strictly increasing.
    pub fn from_knots(knots: Vec<f64>, values: Vec<f64>) -> Option<Self> {
        if knots.is_empty() {
            return values.is_empty().then(Self::zero);
        }
        if knots.len() != values.len() + 1 || knots.windows(2).any(|w| !(w[0] < w[1])) {
            return None;
        }
        if knots.iter().chain(&values).any(|x| !x.is_finite()) {
            return None;
        }
        let mut s = Self { knots, values };
        s.canonicalize();
        Some(s)
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn is_zero(&self) -> bool {
        self.values.is_empty()
    }

    /// `(lo, hi, value)` for every cell, including interior zero cells.
    pub fn cells(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        self.values
            .iter()
            .enumerate()
            .map(move |(i, &v)| (self.knots[i], self.knots[i + 1], v))
    }

    /// Closed hull of the support, or `None` for the zero function.
    pub fn support(&self) -> Option<(f64, f64)> {
        Some((*self.knots.first()?, *self.knots.last()?))
    }

    pub fn eval(&self, x: f64) -> f64 {
        let (lo, hi) = match self.support() {
            Some(s) => s,
            None => return 0.0,
        };
        if x < lo || x >= hi {
            return 0.0;
        }
        // index of the last knot <= x
        let i = self.knots.partition_point(|&k| k <= x) - 1;
        self.values[i]
    }

    pub fn integral(&self) -> f64 {
        self.cells().map(|(lo, hi, v)| v * (hi - lo)).sum()
    }

    pub fn l1_norm(&self) -> f64 {
        self.cells().map(|(lo, hi, v)| v.abs() * (hi - lo)).sum()
    }

    /// Integral over `[a, b]`.
    pub fn integral_over(&self, a: f64, b: f64) -> f64 {
        if !(b > a) {
            return 0.0;
        }
        self.cells()
            .map(|(lo, hi, v)| {
                let w = hi.min(b) - lo.max(a);
                if w > 0.0 {
                    v * w
                } else {
                    0.0
                }
            })
            .sum()
    }

    /// `∫_a^b f(x) exp(-rate (anchor - x)) dx`, evaluated cell by cell in
    /// closed form. Requires `b <= anchor` so the exponent stays nonpositive.
    pub fn integral_exp_toward(&self, a: f64, b: f64, anchor: f64, rate: f64) -> f64 {
        if !(b > a) {
            return 0.0;
        }
        debug_assert!(b <= anchor + 1e-12);
        self.cells()
            .map(|(lo, hi, v)| {
                let x1 = lo.max(a);
                let x2 = hi.min(b);
                if !(x2 > x1) || v == 0.0 {
                    return 0.0;
                }
                // s = anchor - x runs over [anchor - x2, anchor - x1]
                let s1 = anchor - x2;
                let s2 = anchor - x1;
                v * exp_window(rate, s1, s2)
            })
            .sum()
    }

    pub fn is_nonnegative(&self) -> bool {
        self.values.iter().all(|&v| v >= 0.0)
    }

    pub fn min_value(&self) -> f64 {
        // zero is attained outside the support
        self.values.iter().copied().fold(0.0, f64::min)
    }

    /// `x ↦ f(x - dx)`.
    pub fn shifted(&self, dx: f64) -> Self {
        Self {
            knots: self.knots.iter().map(|k| k + dx).collect(),
            values: self.values.clone(),
        }
    }

    /// `x ↦ f(pivot - x)`.
    pub fn reflected(&self, pivot: f64) -> Self {
        let knots = self.knots.iter().rev().map(|k| pivot - k).collect();
        let values = self.values.iter().rev().copied().collect();
        let mut s = Self { knots, values };
        s.canonicalize();
        s
    }

    pub fn scaled(&self, c: f64) -> Self {
        if c == 0.0 {
            return Self::zero();
        }
        let mut s = Self {
            knots: self.knots.clone(),
            values: self.values.iter().map(|v| v * c).collect(),
        };
        s.canonicalize();
        s
    }

    /// Restriction to `[lo, hi)`.
    pub fn clipped(&self, lo: f64, hi: f64) -> Self {
        let cells = self
            .cells()
            .filter_map(|(a, b, v)| {
                let a = a.max(lo);
                let b = b.min(hi);
                (b > a).then_some((a, b, v))
            })
            .collect();
        Self::from_cells(cells)
    }

    pub fn add(&self, other: &Self) -> Self {
        self.combine(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.combine(other, |a, b| a - b)
    }

    /// Pointwise `op(self, other)` on the common refinement of both knot sets.
    /// `op(0, 0)` must be zero.
    pub fn combine(&self, other: &Self, op: impl Fn(f64, f64) -> f64) -> Self {
        if other.is_zero() {
            return self.map_values(|v| op(v, 0.0));
        }
        if self.is_zero() {
            return other.map_values(|v| op(0.0, v));
        }
        let mut knots: Vec<f64> = Vec::with_capacity(self.knots.len() + other.knots.len());
        let (mut i, mut j) = (0, 0);
        while i < self.knots.len() || j < other.knots.len() {
            let k = match (self.knots.get(i), other.knots.get(j)) {
                (Some(&a), Some(&b)) if a <= b => {
                    i += 1;
                    if a == b {
                        j += 1;
                    }
                    a
                }
                (Some(_), Some(&b)) => {
                    j += 1;
                    b
                }
                (Some(&a), None) => {
                    i += 1;
                    a
                }
                (None, Some(&b)) => {
                    j += 1;
                    b
                }
                (None, None) => unreachable!(),
            };
            knots.push(k);
        }
        let values = knots
            .windows(2)
            .map(|w| op(self.eval(w[0]), other.eval(w[0])))
            .collect();
        let mut s = Self { knots, values };
        s.canonicalize();
        s
    }

    fn map_values(&self, f: impl Fn(f64) -> f64) -> Self {
        let mut s = Self {
            knots: self.knots.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
        };
        s.canonicalize();
        s
    }

    /// Merges equal neighbours and trims zero cells at both ends.
    pub fn canonicalize(&mut self) {
        if self.values.is_empty() {
            self.knots.clear();
            return;
        }
        let mut knots = Vec::with_capacity(self.knots.len());
        let mut values: Vec<f64> = Vec::with_capacity(self.values.len());
        knots.push(self.knots[0]);
        for (i, &v) in self.values.iter().enumerate() {
            let hi = self.knots[i + 1];
            if !(hi > *knots.last().unwrap()) {
                continue;
            }
            match values.last() {
                Some(&prev) if prev == v => {
                    *knots.last_mut().unwrap() = hi;
                }
                _ => {
                    values.push(v);
                    knots.push(hi);
                }
            }
        }
        let first = values.iter().position(|&v| v != 0.0);
        match first {
            None => {
                self.knots.clear();
                self.values.clear();
            }
            Some(first) => {
                let last = values.iter().rposition(|&v| v != 0.0).unwrap();
                self.values = values[first..=last].to_vec();
                self.knots = knots[first..=last + 1].to_vec();
            }
        }
    }
}

/// `∫_{s1}^{s2} exp(-rate s) ds` for `s2 >= s1`; reduces to `s2 - s1` at
/// `rate = 0`.
pub(crate) fn exp_window(rate: f64, s1: f64, s2: f64) -> f64 {
    if rate == 0.0 {
        return s2 - s1;
    }
    // e^{-r s1} (1 - e^{-r (s2 - s1)}) / r, with expm1 for small widths
    (-rate * s1).exp() * (-(-rate * (s2 - s1)).exp_m1()) / rate
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn indicator_integral() {
        let f = Steps::indicator(0.0, 0.5, 2.0);
        assert_eq!(f.integral(), 1.0);
        assert_eq!(f.eval(0.25), 2.0);
        assert_eq!(f.eval(0.5), 0.0);
        assert_eq!(f.eval(-0.1), 0.0);
    }

    #[test]
    fn adjacent_equal_cells_merge() {
        let f = Steps::from_cells(vec![(0.0, 1.0, 1.0), (1.0, 2.0, 1.0), (3.0, 4.0, 1.0)]);
        assert_eq!(f.knots(), &[0.0, 2.0, 3.0, 4.0]);
        assert_eq!(f.values(), &[1.0, 0.0, 1.0]);
    }

    #[test]
    fn canonicalize_is_idempotent() {
        let mut f = Steps::from_cells(vec![(0.0, 1.0, 3.0), (2.0, 2.5, -1.0)]);
        let g = f.clone();
        f.canonicalize();
        assert_eq!(f, g);
    }

    #[test]
    fn sub_of_self_is_zero() {
        let f = Steps::from_cells(vec![(0.0, 1.0, 3.0), (2.0, 2.5, -1.0)]);
        assert!(f.sub(&f).is_zero());
    }

    #[test]
    fn add_refines_knots() {
        let f = Steps::indicator(0.0, 2.0, 1.0);
        let g = Steps::indicator(1.0, 3.0, 1.0);
        let h = f.add(&g);
        assert_eq!(h.knots(), &[0.0, 1.0, 2.0, 3.0]);
        assert_eq!(h.values(), &[1.0, 2.0, 1.0]);
        assert_eq!(h.integral(), 4.0);
    }

    #[test]
    fn reflect_and_clip() {
        let f = Steps::from_cells(vec![(0.0, 1.0, 1.0), (1.0, 2.0, 2.0)]);
        let r = f.reflected(2.0);
        assert_eq!(r.eval(0.5), 2.0);
        assert_eq!(r.eval(1.5), 1.0);
        let c = f.clipped(0.5, 1.5);
        assert_eq!(c.integral(), 0.5 + 1.0);
    }

    #[test]
    fn integral_over_window() {
        let f = Steps::indicator(0.0, 1.0, 1.0);
        assert!((f.integral_over(0.6, 5.0) - 0.4).abs() < 1e-15);
        assert_eq!(f.integral_over(2.0, 1.0), 0.0);
    }

    #[test]
    fn exp_integral_matches_closed_form() {
        // ∫_0^1 e^{-(1 - x)} dx = 1 - e^{-1}
        let f = Steps::indicator(0.0, 1.0, 1.0);
        let v = f.integral_exp_toward(0.0, 1.0, 1.0, 1.0);
        assert!((v - (1.0 - (-1.0f64).exp())).abs() < 1e-15);
        assert_eq!(exp_window(0.0, 0.25, 1.0), 0.75);
    }

    #[test]
    fn from_knots_rejects_unsorted() {
        assert!(Steps::from_knots(vec![0.0, 0.0], vec![1.0]).is_none());
        assert!(Steps::from_knots(vec![0.0, 1.0], vec![1.0, 2.0]).is_none());
        assert!(Steps::from_knots(vec![], vec![]).unwrap().is_zero());
    }
}
