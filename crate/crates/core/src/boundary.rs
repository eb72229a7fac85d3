//! Boundary operators `H` on interval unions, the λ-domain operators `M_λ`
//! and `G_λ`, and pointwise evaluation of the resolvent series.

use std::collections::BTreeMap;

use crate::density::PiecewiseDensity;
use crate::error::{Error, Result};
use crate::geometry::{IntervalUnion, Location};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// Left ends `a_k`.
    Incoming,
    /// Right ends `b_k`.
    Outgoing,
}

/// Finitely supported function on `{a_k}` or `{b_k}` with counting measure.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryVector {
    side: Side,
    entries: BTreeMap<usize, f64>,
}

impl BoundaryVector {
    pub fn zero(side: Side) -> Self {
        Self {
            side,
            entries: BTreeMap::new(),
        }
    }

    pub fn outgoing(entries: impl IntoIterator<Item = (usize, f64)>) -> Self {
        Self::from_entries(Side::Outgoing, entries)
    }

    pub fn incoming(entries: impl IntoIterator<Item = (usize, f64)>) -> Self {
        Self::from_entries(Side::Incoming, entries)
    }

    pub fn from_entries(side: Side, entries: impl IntoIterator<Item = (usize, f64)>) -> Self {
        let mut v = Self::zero(side);
        for (k, x) in entries {
            v.add_at(k, x);
        }
        v
    }

    pub fn side(&self) -> Side {
        self.side
    }

    pub fn get(&self, k: usize) -> f64 {
        self.entries.get(&k).copied().unwrap_or(0.0)
    }

    pub fn add_at(&mut self, k: usize, x: f64) {
        if x == 0.0 {
            return;
        }
        let e = self.entries.entry(k).or_insert(0.0);
        *e += x;
        if *e == 0.0 {
            self.entries.remove(&k);
        }
    }

    /// Nonzero entries in index order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.entries.iter().map(|(&k, &x)| (k, x))
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn norm(&self) -> f64 {
        self.entries.values().map(|x| x.abs()).sum()
    }

    /// `Σ_k value_k` with signs.
    pub fn sum(&self) -> f64 {
        self.entries.values().sum()
    }

    pub fn is_nonnegative(&self) -> bool {
        self.entries.values().all(|&x| x >= 0.0)
    }

    pub fn min_index(&self) -> Option<usize> {
        self.entries.keys().next().copied()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum BoundaryKind {
    /// `(Hψ)(a_k) = ψ(b_{k-1})`, `(Hψ)(a_0) = 0`.
    Shift,
    /// `(Hψ)(a_j) = Σ_k P(k→j) ψ(b_k)`; row `k` lists `(j, P(k→j))`.
    /// Missing rows are zero.
    Kernel(BTreeMap<usize, Vec<(usize, f64)>>),
    /// Reflection on a billiard wall, applied inside particle transport.
    Specular,
}

/// `H_r = r H` for a positive `H` of unit norm.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryOperatorSpec {
    kind: BoundaryKind,
    r: f64,
}

impl BoundaryOperatorSpec {
    pub fn shift(r: f64) -> Result<Self> {
        Self::new(BoundaryKind::Shift, r)
    }

    pub fn specular() -> Self {
        Self {
            kind: BoundaryKind::Specular,
            r: 1.0,
        }
    }

    pub fn kernel(rows: BTreeMap<usize, Vec<(usize, f64)>>, r: f64) -> Result<Self> {
        Self::new(BoundaryKind::Kernel(rows), r)
    }

    pub fn new(kind: BoundaryKind, r: f64) -> Result<Self> {
        if !(r > 0.0 && r <= 1.0) {
            return Err(Error::InvalidOperator(format!("scale r = {r} must lie in (0, 1]")));
        }
        if let BoundaryKind::Kernel(rows) = &kind {
            let mut sup: f64 = 0.0;
            for (k, row) in rows {
                let mut sum = 0.0;
                for &(j, p) in row {
                    if !(p >= 0.0 && p.is_finite()) {
                        return Err(Error::InvalidOperator(format!(
                            "kernel entry P({k}→{j}) = {p} must be finite and >= 0"
                        )));
                    }
                    sum += p;
                }
                if sum > 1.0 + 1e-12 {
                    return Err(Error::InvalidOperator(format!(
                        "row {k} sums to {sum} > 1"
                    )));
                }
                sup = sup.max(sum);
            }
            if (sup - 1.0).abs() > 1e-12 {
                return Err(Error::InvalidOperator(format!(
                    "largest row sum is {sup}; the operator must have unit norm"
                )));
            }
        }
        if kind == BoundaryKind::Specular && r != 1.0 {
            return Err(Error::InvalidOperator("specular reflection takes r = 1".into()));
        }
        Ok(Self { kind, r })
    }

    pub fn kind(&self) -> &BoundaryKind {
        &self.kind
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    /// `r'·H_r`, i.e. the scale multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(self.kind.clone(), self.r * factor)
    }

    /// Checks that every kernel target exists in `g`.
    pub fn validate_for(&self, g: &IntervalUnion) -> Result<()> {
        match &self.kind {
            BoundaryKind::Specular => Err(Error::InvalidOperator(
                "specular reflection needs the billiard geometry".into(),
            )),
            BoundaryKind::Shift => Ok(()),
            BoundaryKind::Kernel(rows) => {
                for (k, row) in rows {
                    if !g.contains_index(*k) {
                        return Err(Error::InvalidOperator(format!("row {k} has no b_{k}")));
                    }
                    if let Some((j, _)) = row.iter().find(|(j, _)| !g.contains_index(*j)) {
                        return Err(Error::InvalidOperator(format!("target a_{j} does not exist")));
                    }
                }
                Ok(())
            }
        }
    }

    /// `(j, weight)` pairs with `weight = r·P(k→j)`: where mass leaving
    /// through `b_k` re-enters. Targets missing from `g` are dropped, which
    /// loses that mass.
    pub(crate) fn targets(&self, k: usize, g: &IntervalUnion) -> Vec<(usize, f64)> {
        match &self.kind {
            BoundaryKind::Shift => {
                if g.contains_index(k + 1) {
                    vec![(k + 1, self.r)]
                } else {
                    Vec::new()
                }
            }
            BoundaryKind::Kernel(rows) => rows
                .get(&k)
                .map(|row| {
                    row.iter()
                        .filter(|(j, p)| *p > 0.0 && g.contains_index(*j))
                        .map(|&(j, p)| (j, self.r * p))
                        .collect()
                })
                .unwrap_or_default(),
            BoundaryKind::Specular => Vec::new(),
        }
    }

    /// Whether every re-entry is strictly to the right of the exit, so order
    /// `n` mass never returns to an interval left of its source.
    pub(crate) fn moves_forward(&self) -> bool {
        match &self.kind {
            BoundaryKind::Shift => true,
            BoundaryKind::Kernel(rows) => rows
                .iter()
                .all(|(k, row)| row.iter().all(|&(j, p)| p == 0.0 || j > *k)),
            BoundaryKind::Specular => false,
        }
    }
}

/// `Hψ` for an outgoing `ψ`.
pub fn apply_h(spec: &BoundaryOperatorSpec, psi: &BoundaryVector, g: &IntervalUnion) -> BoundaryVector {
    debug_assert_eq!(psi.side(), Side::Outgoing);
    let mut out = BoundaryVector::zero(Side::Incoming);
    for (k, x) in psi.iter() {
        for (j, w) in spec.targets(k, g) {
            out.add_at(j, w * x);
        }
    }
    out
}

/// `(M_λ u)(b_k) = u(a_k) e^{-λ Δ_k}`.
pub fn m_lambda(u: &BoundaryVector, lambda: f64, g: &IntervalUnion) -> BoundaryVector {
    debug_assert_eq!(u.side(), Side::Incoming);
    BoundaryVector::outgoing(u.iter().map(|(k, x)| (k, x * (-lambda * g.width(k)).exp())))
}

/// `(G_λ f)(b_k) = ∫_0^{Δ_k} f(b_k - s) e^{-λ s} ds`.
pub fn g_lambda(f: &PiecewiseDensity, lambda: f64, g: &IntervalUnion) -> BoundaryVector {
    BoundaryVector::outgoing(f.parts().map(|(k, s)| {
        let (a, b) = g.interval(k).expect("stored interval exists");
        (k, s.integral_exp_toward(a, b, b, lambda))
    }))
}

/// Truncated resolvent series at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct ResolventValue {
    pub value: f64,
    /// `C_λ f(x)`.
    pub free_part: f64,
    /// Contribution of each boundary order `n < n_max`.
    pub terms: Vec<f64>,
    /// `‖(M_λH)^{n_max} G_λ f‖`.
    pub tail_norm: f64,
    /// Set when no order past `n_max` can reach `x`, so the series is exact.
    pub tail_vanishes: bool,
}

impl ResolventValue {
    /// Bound on the omitted part of the series at `x`.
    pub fn truncation_bound(&self) -> f64 {
        if self.tail_vanishes {
            0.0
        } else {
            self.tail_norm
        }
    }
}

/// `[(λ - A)^{-1} f](x) = C_λ f(x) + Σ_n Ξ_λ H (M_λ H)^n G_λ f (x)`, truncated
/// after `n_max` boundary orders.
pub fn resolvent_eval(
    f: &PiecewiseDensity,
    lambda: f64,
    x: f64,
    n_max: usize,
    g: &IntervalUnion,
    spec: &BoundaryOperatorSpec,
) -> Result<ResolventValue> {
    if !(lambda > 0.0) {
        return Err(Error::Precondition(format!("λ = {lambda} must be positive")));
    }
    if spec.kind == BoundaryKind::Specular {
        return Err(Error::Unsupported("resolvent evaluation needs a discrete boundary"));
    }
    let j = match g.locate(x) {
        Location::Interior(j) => j,
        Location::LeftEnd(_) | Location::RightEnd(_) => return Err(Error::BoundaryPoint),
        Location::Outside => return Err(Error::OutsideDomain),
    };
    let a = g.left(j);
    let tau = x - a;
    let decay = (-lambda * tau).exp();
    let free_part = f
        .part(j)
        .map_or(0.0, |s| s.integral_exp_toward(a, x, x, lambda));
    let mut u = g_lambda(f, lambda, g);
    let mut terms = Vec::with_capacity(n_max);
    for _ in 0..n_max {
        let hu = apply_h(spec, &u, g);
        terms.push(hu.get(j) * decay);
        u = m_lambda(&hu, lambda, g);
    }
    let tail_vanishes = u.is_zero() || (spec.moves_forward() && u.min_index().is_some_and(|m| m >= j));
    Ok(ResolventValue {
        value: free_part + terms.iter().sum::<f64>(),
        free_part,
        terms,
        tail_norm: u.norm(),
        tail_vanishes,
    })
}
