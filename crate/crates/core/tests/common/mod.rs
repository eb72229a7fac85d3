//! Oracles written without the library's algorithms, used to freeze the
//! derived reference values.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use transport_honesty::boundary::BoundaryOperatorSpec;
use transport_honesty::density::PiecewiseDensity;
use transport_honesty::geometry::{Geometry, IntervalUnion};

#[derive(Debug, Clone, Copy)]
pub enum Ladder {
    /// `a_k = 2k`, width 1.
    Unit,
    /// `a_k = 3k`, width `2^-k`.
    Geometric,
}

impl Ladder {
    pub fn left(&self, k: u32) -> f64 {
        match self {
            Ladder::Unit => 2.0 * k as f64,
            Ladder::Geometric => 3.0 * k as f64,
        }
    }

    pub fn width(&self, k: u32) -> f64 {
        match self {
            Ladder::Unit => 1.0,
            Ladder::Geometric => 0.5f64.powi(k as i32),
        }
    }

    /// Total crossing time of intervals `k, k+1, ...`.
    pub fn remaining_width(&self, k: u32) -> f64 {
        match self {
            Ladder::Unit => f64::INFINITY,
            Ladder::Geometric => 2.0 * 0.5f64.powi(k as i32),
        }
    }

    pub fn union(&self) -> IntervalUnion {
        match self {
            Ladder::Unit => IntervalUnion::unit_ladder(),
            Ladder::Geometric => IntervalUnion::geometric_ladder(),
        }
    }

    /// `(geometry, shift with gain r, χ_(0,1))`.
    pub fn setup(&self, r: f64) -> (Geometry, BoundaryOperatorSpec, PiecewiseDensity) {
        let gi = self.union();
        let f = PiecewiseDensity::interval_indicator(&gi, 0).unwrap();
        (Geometry::from(gi), BoundaryOperatorSpec::shift(r).unwrap(), f)
    }
}

/// Where a single particle started at `x ∈ I_0` is at time `t`, or `None`
/// once it has been absorbed or has crossed infinitely many intervals.
/// Each crossing of a right end survives with probability `r`.
pub fn particle_at<R: Rng>(ladder: &Ladder, x: f64, t: f64, r: f64, rng: &mut R) -> Option<(u32, f64)> {
    let mut k = 0u32;
    let mut offset = x - ladder.left(0);
    let mut left = t;
    loop {
        let to_exit = ladder.width(k) - offset;
        if left < to_exit {
            return Some((k, offset + left));
        }
        if left >= to_exit + ladder.remaining_width(k + 1) {
            // explosion: every later interval is crossed before t
            return None;
        }
        left -= to_exit;
        if rng.random::<f64>() >= r {
            return None;
        }
        k += 1;
        offset = 0.0;
    }
}

/// Monte Carlo estimate of the mass at `t` for `f = χ_(0,1)`.
pub fn particle_mass(ladder: &Ladder, t: f64, r: f64, n: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut alive = 0usize;
    for _ in 0..n {
        let x: f64 = rng.random();
        if particle_at(ladder, x, t, r, &mut rng).is_some() {
            alive += 1;
        }
    }
    alive as f64 / n as f64
}

/// Adaptive Simpson on `[a, b]`; returns the value and an error estimate.
/// The range is first cut into `panels` equal pieces so that integrands
/// with short support are not missed by the first few nodes.
pub fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, panels: usize, eps: f64, depth: u32) -> (f64, f64) {
    let h = (b - a) / panels as f64;
    (0..panels)
        .map(|i| simpson_panel(f, a + i as f64 * h, a + (i + 1) as f64 * h, eps / panels as f64, depth))
        .fold((0.0, 0.0), |(v, e), (dv, de)| (v + dv, e + de))
}

fn simpson_panel<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, eps: f64, depth: u32) -> (f64, f64) {
    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (f(a), f(m), f(b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_rec(f, a, b, fa, fm, fb, whole, eps, depth)
}

#[allow(clippy::too_many_arguments)]
fn simpson_rec<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    eps: f64,
    depth: u32,
) -> (f64, f64) {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let diff = left + right - whole;
    if depth == 0 || diff.abs() <= 15.0 * eps {
        return (left + right + diff / 15.0, diff.abs() / 15.0);
    }
    let (l, el) = simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * eps, depth - 1);
    let (r, er) = simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * eps, depth - 1);
    (l + r, el + er)
}

/// Exit time from a circle by bisection on `|x + s v| - R`.
pub fn circle_exit_bisect(x: [f64; 2], v: [f64; 2], radius: f64) -> f64 {
    let dist = |s: f64| ((x[0] + s * v[0]).powi(2) + (x[1] + s * v[1]).powi(2)).sqrt() - radius;
    let speed = (v[0] * v[0] + v[1] * v[1]).sqrt();
    let (mut lo, mut hi) = (0.0, 2.0 * radius / speed + 1.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if dist(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Reflections in `(0, t]` of a particle in a disk centred at the origin.
/// The impact parameter `p = |x × v̂|` is conserved, so after the first hit
/// every chord has length `2√(R² - p²)`.
pub fn disk_rebounds(x: [f64; 2], v: [f64; 2], radius: f64, t: f64) -> u32 {
    let speed = (v[0] * v[0] + v[1] * v[1]).sqrt();
    let p = (x[0] * v[1] - x[1] * v[0]).abs() / speed;
    let first = circle_exit_bisect(x, v, radius);
    if first > t {
        return 0;
    }
    let flight = 2.0 * (radius * radius - p * p).sqrt() / speed;
    1 + ((t - first) / flight).floor() as u32
}
