use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::geometry::{IntervalUnion, Location};
use crate::steps::Steps;

/// Exact piecewise-constant density on an interval union.
///
/// Each entry holds the density on `I_k` in absolute coordinates; intervals
/// without an entry carry zero.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PiecewiseDensity {
    parts: BTreeMap<usize, Steps>,
}

/// One serialized row: interval index, breakpoints, values.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityRow {
    pub interval: usize,
    pub breakpoints: Vec<f64>,
    pub values: Vec<f64>,
}

impl PiecewiseDensity {
    pub fn zero() -> Self {
        Self::default()
    }

    /// `value` on `(lo, hi) ⊂ I_k`.
    pub fn indicator(g: &IntervalUnion, k: usize, lo: f64, hi: f64, value: f64) -> Result<Self> {
        Self::from_pieces(g, &[(k, lo, hi, value)])
    }

    /// `χ_{I_k}`.
    pub fn interval_indicator(g: &IntervalUnion, k: usize) -> Result<Self> {
        let (a, b) = g
            .interval(k)
            .ok_or_else(|| Error::InvalidDensity(format!("no interval with index {k}")))?;
        Self::indicator(g, k, a, b, 1.0)
    }

    /// Builds a density from `(k, lo, hi, value)` pieces. Pieces on the same
    /// interval must not overlap.
    pub fn from_pieces(g: &IntervalUnion, pieces: &[(usize, f64, f64, f64)]) -> Result<Self> {
        let mut cells: BTreeMap<usize, Vec<(f64, f64, f64)>> = BTreeMap::new();
        for &(k, lo, hi, v) in pieces {
            let (a, b) = g
                .interval(k)
                .ok_or_else(|| Error::InvalidDensity(format!("no interval with index {k}")))?;
            if !(lo < hi && a <= lo && hi <= b) || !v.is_finite() {
                return Err(Error::InvalidDensity(format!(
                    "piece ({lo}, {hi}) with value {v} does not fit I_{k} = ({a}, {b})"
                )));
            }
            cells.entry(k).or_default().push((lo, hi, v));
        }
        let mut parts = BTreeMap::new();
        for (k, mut list) in cells {
            list.sort_by(|x, y| x.0.total_cmp(&y.0));
            if list.windows(2).any(|w| w[1].0 < w[0].1) {
                return Err(Error::InvalidDensity(format!("overlapping pieces on I_{k}")));
            }
            let s = Steps::from_cells(list);
            if !s.is_zero() {
                parts.insert(k, s);
            }
        }
        Ok(Self { parts })
    }

    /// Builds a density from serialized rows.
    pub fn from_rows(g: &IntervalUnion, rows: &[DensityRow]) -> Result<Self> {
        let mut out = Self::zero();
        for row in rows {
            let s = Steps::from_knots(row.breakpoints.clone(), row.values.clone()).ok_or_else(
                || Error::InvalidDensity(format!("malformed breakpoints on I_{}", row.interval)),
            )?;
            let (a, b) = g.interval(row.interval).ok_or_else(|| {
                Error::InvalidDensity(format!("no interval with index {}", row.interval))
            })?;
            if let Some((lo, hi)) = s.support() {
                if lo < a || hi > b {
                    return Err(Error::InvalidDensity(format!(
                        "breakpoints leave I_{}",
                        row.interval
                    )));
                }
            }
            out.insert(row.interval, s);
        }
        Ok(out)
    }

    pub fn rows(&self) -> Vec<DensityRow> {
        self.parts
            .iter()
            .map(|(&k, s)| DensityRow {
                interval: k,
                breakpoints: s.knots().to_vec(),
                values: s.values().to_vec(),
            })
            .collect()
    }

    /// Replaces the part on `I_k`; the caller keeps it inside `I_k`.
    pub(crate) fn insert(&mut self, k: usize, s: Steps) {
        if s.is_zero() {
            self.parts.remove(&k);
        } else {
            self.parts.insert(k, s);
        }
    }

    pub(crate) fn accumulate(&mut self, k: usize, s: &Steps) {
        if s.is_zero() {
            return;
        }
        let sum = match self.parts.get(&k) {
            Some(old) => old.add(s),
            None => s.clone(),
        };
        self.insert(k, sum);
    }

    pub fn part(&self, k: usize) -> Option<&Steps> {
        self.parts.get(&k)
    }

    pub fn parts(&self) -> impl Iterator<Item = (usize, &Steps)> {
        self.parts.iter().map(|(&k, s)| (k, s))
    }

    pub fn is_zero(&self) -> bool {
        self.parts.is_empty()
    }

    /// Largest interval index carrying mass.
    pub fn max_index(&self) -> Option<usize> {
        self.parts.keys().next_back().copied()
    }

    pub fn min_index(&self) -> Option<usize> {
        self.parts.keys().next().copied()
    }

    pub fn eval(&self, g: &IntervalUnion, x: f64) -> f64 {
        match g.locate(x) {
            Location::Interior(k) | Location::LeftEnd(k) => {
                self.parts.get(&k).map_or(0.0, |s| s.eval(x))
            }
            _ => 0.0,
        }
    }

    /// Signed integral `∫ f`.
    pub fn integral(&self) -> f64 {
        self.parts.values().map(Steps::integral).sum()
    }

    pub fn l1_norm(&self) -> f64 {
        self.parts.values().map(Steps::l1_norm).sum()
    }

    pub fn is_nonnegative(&self) -> bool {
        self.parts.values().all(Steps::is_nonnegative)
    }

    pub fn min_value(&self) -> f64 {
        self.parts.values().map(Steps::min_value).fold(0.0, f64::min)
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (&k, s) in &other.parts {
            out.accumulate(k, s);
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scaled(-1.0))
    }

    pub fn scaled(&self, c: f64) -> Self {
        let mut out = Self::zero();
        for (&k, s) in &self.parts {
            out.insert(k, s.scaled(c));
        }
        out
    }

    /// `f · χ_{I_k}`.
    pub fn restrict(&self, k: usize) -> Self {
        let mut out = Self::zero();
        if let Some(s) = self.parts.get(&k) {
            out.insert(k, s.clone());
        }
        out
    }

    /// `U_0(t) f`: every piece moves right by `t` and whatever passes `b_k`
    /// leaves the interval; `[a_k, a_k + t)` is left empty.
    pub fn free_stream(&self, g: &IntervalUnion, t: f64) -> Self {
        assert!(t >= 0.0, "free streaming needs t >= 0");
        if t == 0.0 {
            return self.clone();
        }
        let mut out = Self::zero();
        for (&k, s) in &self.parts {
            let (_, b) = g.interval(k).expect("stored interval exists");
            out.insert(k, s.shifted(t).clipped(f64::NEG_INFINITY, b));
        }
        out
    }

    /// Whether `self ≤ other + tol` on every piece.
    pub fn dominated_by(&self, other: &Self, tol: f64) -> bool {
        other.sub(self).min_value() >= -tol
    }
}
