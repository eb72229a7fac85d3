//! Convex billiard tables: a disk or a convex polygon, free flight
//! `(x, v) ↦ (x + v t, v)` inside, specular reflection on the wall.


use nalgebra::Vector2;
use rand::Rng;

use crate::error::{Error, Result};

pub type Vec2 = Vector2<f64>;

/// Hits with `|v·n| / |v|` below this are treated as tangential.
pub const TANGENT_EPS: f64 = 1e-10;

/// Relative tolerance for "this point is on the wall".
const BOUNDARY_EPS: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub enum Domain {
    Disk { center: Vec2, radius: f64 },
    /// Vertices in counter-clockwise order.
    Polygon { vertices: Vec<Vec2> },
}

/// Orthogonally invariant velocity law.
#[derive(Debug, Clone, PartialEq)]
pub enum VelocitySpec {
    /// Speed drawn uniformly from a finite set, direction isotropic.
    Speeds(Vec<f64>),
    /// Uniform on the annulus `min ≤ |v| ≤ max`.
    Annulus { min: f64, max: f64 },
}

impl VelocitySpec {
    pub fn max_speed(&self) -> f64 {
        match self {
            VelocitySpec::Speeds(s) => s.iter().copied().fold(0.0, f64::max),
            VelocitySpec::Annulus { max, .. } => *max,
        }
    }

    pub fn min_speed(&self) -> f64 {
        match self {
            VelocitySpec::Speeds(s) => s.iter().copied().fold(f64::INFINITY, f64::min),
            VelocitySpec::Annulus { min, .. } => *min,
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec2 {
        let speed = match self {
            VelocitySpec::Speeds(s) => s[rng.random_range(0..s.len())],
            VelocitySpec::Annulus { min, max } => {
                let u: f64 = rng.random();
                (min * min + u * (max * max - min * min)).sqrt()
            }
        };
        // the annulus cut keeps the normalisation well conditioned and
        // leaves the direction uniform
        loop {
            let p = unit_disk_point(rng);
            let r2 = p.norm_squared();
            if r2 > 1e-6 {
                return p * (speed / r2.sqrt());
            }
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match self {
            VelocitySpec::Speeds(s) => !s.is_empty() && s.iter().all(|v| *v > 0.0 && v.is_finite()),
            VelocitySpec::Annulus { min, max } => *min > 0.0 && min <= max && max.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidGeometry(
                "velocity law needs finite positive speeds".into(),
            ))
        }
    }
}

/// Uniform point of the open unit disk by rejection from the square.
///
/// Trigonometric sampling is avoided on purpose: libm `sin`/`cos` and the
/// fused `sincos` an optimising build may substitute can differ in the last
/// bit, which would make reports depend on the build profile.
fn unit_disk_point<R: Rng + ?Sized>(rng: &mut R) -> Vec2 {
    loop {
        let p = Vec2::new(
            2.0 * rng.random::<f64>() - 1.0,
            2.0 * rng.random::<f64>() - 1.0,
        );
        if p.norm_squared() < 1.0 {
            return p;
        }
    }
}

/// First wall hit along a ray.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WallHit {
    pub time: f64,
    pub point: Vec2,
    /// Outward unit normal; `None` at a polygon vertex.
    pub normal: Option<Vec2>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rebound {
    pub time: f64,
    pub position: Vec2,
    /// Velocity after reflection.
    pub velocity: Vec2,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ReboundSequence {
    pub rebounds: Vec<Rebound>,
    /// Set when the sequence stopped at a tangential or vertex hit.
    pub degenerate: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvexBilliard {
    domain: Domain,
    velocity: VelocitySpec,
}

impl ConvexBilliard {
    pub fn disk(center: Vec2, radius: f64, velocity: VelocitySpec) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) || !center.iter().all(|c| c.is_finite()) {
            return Err(Error::InvalidGeometry("disk radius must be positive".into()));
        }
        velocity.validate()?;
        Ok(Self {
            domain: Domain::Disk { center, radius },
            velocity,
        })
    }

    pub fn polygon(vertices: Vec<Vec2>, velocity: VelocitySpec) -> Result<Self> {
        let n = vertices.len();
        if n < 3 {
            return Err(Error::InvalidGeometry("polygon needs three vertices".into()));
        }
        for i in 0..n {
            let p = vertices[i];
            let q = vertices[(i + 1) % n];
            let r = vertices[(i + 2) % n];
            let e1 = q - p;
            let e2 = r - q;
            if e1.norm() == 0.0 {
                return Err(Error::InvalidGeometry(format!("repeated vertex {i}")));
            }
            if e1.perp(&e2) <= 0.0 {
                return Err(Error::InvalidGeometry(format!(
                    "polygon is not strictly convex and counter-clockwise at vertex {}",
                    (i + 1) % n
                )));
            }
        }
        velocity.validate()?;
        Ok(Self {
            domain: Domain::Polygon { vertices },
            velocity,
        })
    }

    /// Unit disk centred at the origin with unit speeds.
    pub fn unit_disk() -> Self {
        Self::disk(Vec2::zeros(), 1.0, VelocitySpec::Speeds(vec![1.0])).expect("valid disk")
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn velocity(&self) -> &VelocitySpec {
        &self.velocity
    }

    fn scale(&self) -> f64 {
        match &self.domain {
            Domain::Disk { radius, .. } => *radius,
            Domain::Polygon { vertices } => vertices
                .iter()
                .flat_map(|p| vertices.iter().map(move |q| (p - q).norm()))
                .fold(0.0, f64::max),
        }
    }

    pub fn diameter(&self) -> f64 {
        match &self.domain {
            Domain::Disk { radius, .. } => 2.0 * radius,
            Domain::Polygon { .. } => self.scale(),
        }
    }

    /// Signed distance-like measure: negative inside, zero on the wall.
    fn wall_offset(&self, x: &Vec2) -> f64 {
        match &self.domain {
            Domain::Disk { center, radius } => (x - center).norm() - radius,
            Domain::Polygon { vertices } => edges(vertices)
                .map(|(p, _, n)| n.dot(&(x - p)))
                .fold(f64::NEG_INFINITY, f64::max),
        }
    }

    pub fn is_interior(&self, x: &Vec2) -> bool {
        self.wall_offset(x) < -BOUNDARY_EPS * self.scale()
    }

    pub fn is_on_wall(&self, x: &Vec2) -> bool {
        self.wall_offset(x).abs() <= BOUNDARY_EPS * self.scale()
    }

    /// Outward unit normal at a wall point; `None` at a polygon vertex or off
    /// the wall.
    pub fn outward_normal(&self, x: &Vec2) -> Option<Vec2> {
        if !self.is_on_wall(x) {
            return None;
        }
        match &self.domain {
            Domain::Disk { center, .. } => Some((x - center).normalize()),
            Domain::Polygon { vertices } => {
                let tol = BOUNDARY_EPS * self.scale();
                if vertices.iter().any(|v| (x - v).norm() <= tol) {
                    return None;
                }
                edges(vertices)
                    .find(|(p, _, n)| n.dot(&(x - p)).abs() <= tol)
                    .map(|(_, _, n)| n)
            }
        }
    }

    /// Snaps a point that should lie on the wall back onto it.
    fn project_to_wall(&self, x: Vec2) -> Vec2 {
        match &self.domain {
            Domain::Disk { center, radius } => {
                let d = x - center;
                center + d * (*radius / d.norm())
            }
            Domain::Polygon { .. } => x,
        }
    }

    /// First forward wall hit from `x` (interior or on the wall pointing
    /// inward) moving with velocity `v`.
    pub fn wall_hit(&self, x: &Vec2, v: &Vec2) -> Option<WallHit> {
        if v.norm_squared() == 0.0 {
            return None;
        }
        match &self.domain {
            Domain::Disk { center, radius } => {
                let d = x - center;
                let a = v.norm_squared();
                let b = 2.0 * d.dot(v);
                let dn = d.norm();
                // factored to keep digits near the wall
                let c = (dn - radius) * (dn + radius);
                let disc = (b * b - 4.0 * a * c).max(0.0);
                // stable roots: q/a and c/q; -0.0 counts as b >= 0
                let time = if b >= 0.0 {
                    let q = -0.5 * (b + disc.sqrt());
                    if q != 0.0 {
                        c / q
                    } else {
                        0.0
                    }
                } else {
                    -0.5 * (b - disc.sqrt()) / a
                };
                let time = time.max(0.0);
                let point = self.project_to_wall(x + v * time);
                Some(WallHit {
                    time,
                    point,
                    normal: Some((point - center).normalize()),
                })
            }
            Domain::Polygon { vertices } => {
                let mut best = f64::INFINITY;
                let mut second = f64::INFINITY;
                let mut best_normal = None;
                for (p, _, n) in edges(vertices) {
                    let nv = n.dot(v);
                    if nv <= 0.0 {
                        continue;
                    }
                    let t = (n.dot(&(p - x))).max(0.0) / nv;
                    if t < best {
                        second = best;
                        best = t;
                        best_normal = Some(n);
                    } else if t < second {
                        second = t;
                    }
                }
                if !best.is_finite() {
                    return None;
                }
                let point = x + v * best;
                let tol = BOUNDARY_EPS * self.scale();
                let at_vertex = (second - best) * v.norm() <= tol
                    || vertices.iter().any(|q| (point - q).norm() <= tol);
                Some(WallHit {
                    time: best,
                    point,
                    normal: if at_vertex { None } else { best_normal },
                })
            }
        }
    }

    /// `(τ₋, τ₊)` for an interior phase point.
    pub fn stay_times(&self, x: &Vec2, v: &Vec2) -> Result<(f64, f64)> {
        if !self.is_interior(x) {
            return Err(if self.is_on_wall(x) {
                Error::BoundaryPoint
            } else {
                Error::OutsideDomain
            });
        }
        if v.norm_squared() == 0.0 {
            return Ok((f64::INFINITY, f64::INFINITY));
        }
        let plus = self.wall_hit(x, v).map_or(f64::INFINITY, |h| h.time);
        let minus = self.wall_hit(x, &-v).map_or(f64::INFINITY, |h| h.time);
        Ok((minus, plus))
    }

    /// Forward rebounds with `t_k ≤ t_max`.
    pub fn rebound_sequence(&self, x: &Vec2, v: &Vec2, t_max: f64) -> Result<ReboundSequence> {
        if !self.is_interior(x) {
            return Err(Error::Precondition("starting point must be interior".into()));
        }
        if !(v.norm() > 0.0) {
            return Err(Error::Precondition("speed must be positive".into()));
        }
        if !t_max.is_finite() {
            return Err(Error::Precondition("t_max must be finite".into()));
        }
        let mut seq = ReboundSequence::default();
        let (mut time, mut x, mut v) = (0.0, *x, *v);
        while let Some(hit) = self.wall_hit(&x, &v) {
            let t_hit = time + hit.time;
            if t_hit > t_max {
                break;
            }
            match self.reflect(&v, hit.normal) {
                Some(v_out) => {
                    seq.rebounds.push(Rebound {
                        time: t_hit,
                        position: hit.point,
                        velocity: v_out,
                    });
                    time = t_hit;
                    x = hit.point;
                    v = v_out;
                }
                None => {
                    seq.degenerate = true;
                    break;
                }
            }
        }
        Ok(seq)
    }

    /// `v - 2 (v·n) n`, or `None` for a vertex or tangential hit.
    pub fn reflect(&self, v: &Vec2, normal: Option<Vec2>) -> Option<Vec2> {
        let n = normal?;
        let vn = v.dot(&n);
        if vn.abs() < TANGENT_EPS * v.norm() {
            return None;
        }
        Some(v - n * (2.0 * vn))
    }

    /// Uniform position in the disk `center + radius·B` (which must lie in
    /// the table) or, when `region` is `None`, in the whole table.
    pub fn sample_position<R: Rng + ?Sized>(&self, rng: &mut R, region: Option<(Vec2, f64)>) -> Vec2 {
        let (center, radius) = match (region, &self.domain) {
            (Some(r), _) => r,
            (None, Domain::Disk { center, radius }) => (*center, *radius),
            (None, Domain::Polygon { vertices }) => {
                let lo = vertices.iter().fold(Vec2::repeat(f64::INFINITY), |m, p| m.inf(p));
                let hi = vertices.iter().fold(Vec2::repeat(f64::NEG_INFINITY), |m, p| m.sup(p));
                loop {
                    let p = Vec2::new(
                        lo.x + rng.random::<f64>() * (hi.x - lo.x),
                        lo.y + rng.random::<f64>() * (hi.y - lo.y),
                    );
                    if self.is_interior(&p) {
                        return p;
                    }
                }
            }
        };
        loop {
            let p = center + unit_disk_point(rng) * radius;
            if self.is_interior(&p) {
                return p;
            }
        }
    }

    /// Whether the closed disk `center + radius·B` fits inside the table.
    pub fn contains_disk(&self, center: &Vec2, radius: f64) -> bool {
        match &self.domain {
            Domain::Disk {
                center: c,
                radius: r,
            } => (center - c).norm() + radius <= *r,
            Domain::Polygon { vertices } => {
                edges(vertices).all(|(p, _, n)| n.dot(&(center - p)) + radius <= 0.0)
            }
        }
    }
}

/// `(start, end, outward unit normal)` per edge of a CCW polygon.
fn edges(vertices: &[Vec2]) -> impl Iterator<Item = (Vec2, Vec2, Vec2)> + '_ {
    let n = vertices.len();
    (0..n).map(move |i| {
        let p = vertices[i];
        let q = vertices[(i + 1) % n];
        let e = q - p;
        (p, q, Vec2::new(e.y, -e.x).normalize())
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square() -> ConvexBilliard {
        ConvexBilliard::polygon(
            vec![
                Vec2::new(-1.0, -1.0),
                Vec2::new(1.0, -1.0),
                Vec2::new(1.0, 1.0),
                Vec2::new(-1.0, 1.0),
            ],
            VelocitySpec::Speeds(vec![1.0]),
        )
        .unwrap()
    }

    #[test]
    fn disk_stay_times_from_center() {
        let d = ConvexBilliard::unit_disk();
        let (m, p) = d.stay_times(&Vec2::zeros(), &Vec2::new(1.0, 0.0)).unwrap();
        assert!((m - 1.0).abs() < 1e-15 && (p - 1.0).abs() < 1e-15);
    }

    #[test]
    fn near_wall_exit_is_accurate() {
        // 1 - 1e-9 from the wall: naive quadratic loses digits here
        let d = ConvexBilliard::unit_disk();
        let x = Vec2::new(1.0 - 1e-8, 0.0);
        let (_, p) = d.stay_times(&x, &Vec2::new(1.0, 0.0)).unwrap();
        assert!((p - (1.0 - x.x)).abs() <= 1e-16 * 1e-8);
    }

    #[test]
    fn diameter_bounces() {
        let d = ConvexBilliard::unit_disk();
        let seq = d
            .rebound_sequence(&Vec2::zeros(), &Vec2::new(1.0, 0.0), 5.0)
            .unwrap();
        let times: Vec<f64> = seq.rebounds.iter().map(|r| r.time).collect();
        assert_eq!(times, vec![1.0, 3.0, 5.0]);
        assert!((seq.rebounds[1].position - Vec2::new(-1.0, 0.0)).norm() < 1e-15);
        assert!((seq.rebounds[0].velocity - Vec2::new(-1.0, 0.0)).norm() < 1e-15);
        assert!((seq.rebounds[1].velocity - Vec2::new(1.0, 0.0)).norm() < 1e-15);
        assert!(!seq.degenerate);
    }

    #[test]
    fn empty_sequence_at_zero_horizon() {
        let d = ConvexBilliard::unit_disk();
        let seq = d
            .rebound_sequence(&Vec2::new(0.1, 0.2), &Vec2::new(0.3, 1.0), 0.0)
            .unwrap();
        assert!(seq.rebounds.is_empty());
    }

    #[test]
    fn square_corner_hit_is_degenerate() {
        let s = square();
        let seq = s
            .rebound_sequence(&Vec2::zeros(), &Vec2::new(1.0, 1.0), 10.0)
            .unwrap();
        assert!(seq.degenerate);
        assert!(seq.rebounds.is_empty());
    }

    #[test]
    fn square_reflection() {
        let s = square();
        let seq = s
            .rebound_sequence(&Vec2::new(0.0, 0.5), &Vec2::new(1.0, 0.0), 3.5)
            .unwrap();
        assert_eq!(seq.rebounds.len(), 2);
        assert!((seq.rebounds[0].time - 1.0).abs() < 1e-15);
        assert!((seq.rebounds[0].velocity - Vec2::new(-1.0, 0.0)).norm() < 1e-15);
        assert!((seq.rebounds[1].time - 3.0).abs() < 1e-15);
        assert!((seq.rebounds[1].position - Vec2::new(-1.0, 0.5)).norm() < 1e-15);
    }

    #[test]
    fn rejects_nonconvex_polygon() {
        let r = ConvexBilliard::polygon(
            vec![
                Vec2::new(0.0, 0.0),
                Vec2::new(2.0, 0.0),
                Vec2::new(1.0, 0.2),
                Vec2::new(2.0, 2.0),
                Vec2::new(0.0, 2.0),
            ],
            VelocitySpec::Speeds(vec![1.0]),
        );
        assert!(r.is_err());
        // clockwise order
        let r = ConvexBilliard::polygon(
            vec![Vec2::new(0.0, 0.0), Vec2::new(0.0, 1.0), Vec2::new(1.0, 0.0)],
            VelocitySpec::Speeds(vec![1.0]),
        );
        assert!(r.is_err());
    }

    #[test]
    fn tangential_reflection_refused() {
        let d = ConvexBilliard::unit_disk();
        let n = Some(Vec2::new(1.0, 0.0));
        assert!(d.reflect(&Vec2::new(1e-12, 1.0), n).is_none());
        assert!(d.reflect(&Vec2::new(1e-3, 1.0), n).is_some());
    }

    #[test]
    fn normals() {
        let s = square();
        assert_eq!(s.outward_normal(&Vec2::new(1.0, 0.3)), Some(Vec2::new(1.0, 0.0)));
        assert_eq!(s.outward_normal(&Vec2::new(1.0, 1.0)), None);
        assert_eq!(s.outward_normal(&Vec2::new(0.0, 0.0)), None);
        let d = ConvexBilliard::unit_disk();
        let n = d.outward_normal(&Vec2::new(0.6, 0.8)).unwrap();
        assert!((n.norm() - 1.0).abs() < 1e-15);
    }
}
