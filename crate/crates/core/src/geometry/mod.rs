//! Phase-space geometries and the characteristic flow.

mod billiard;
mod interval;

pub use billiard::{
    ConvexBilliard, Domain, Rebound, ReboundSequence, Vec2, VelocitySpec, WallHit, TANGENT_EPS,
};
pub use interval::{IntervalRule, IntervalUnion, Location};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum Geometry {
    Intervals(IntervalUnion),
    Billiard(ConvexBilliard),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PhasePoint {
    Line(f64),
    Plane { x: Vec2, v: Vec2 },
}

/// A point of `Γ₋` or `Γ₊`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoundaryPoint {
    /// `a_k`.
    Incoming(usize),
    /// `b_k`.
    Outgoing(usize),
    /// Wall point with velocity; outgoing when `v·n > 0`.
    Wall { x: Vec2, v: Vec2 },
}

impl From<IntervalUnion> for Geometry {
    fn from(g: IntervalUnion) -> Self {
        Geometry::Intervals(g)
    }
}

impl From<ConvexBilliard> for Geometry {
    fn from(g: ConvexBilliard) -> Self {
        Geometry::Billiard(g)
    }
}

impl Geometry {
    pub fn as_intervals(&self) -> Result<&IntervalUnion> {
        match self {
            Geometry::Intervals(g) => Ok(g),
            Geometry::Billiard(_) => Err(Error::Unsupported(
                "operation needs the interval-union geometry",
            )),
        }
    }

    pub fn as_billiard(&self) -> Result<&ConvexBilliard> {
        match self {
            Geometry::Billiard(g) => Ok(g),
            Geometry::Intervals(_) => Err(Error::Unsupported(
                "operation needs the billiard geometry",
            )),
        }
    }

    /// `(τ₋(p), τ₊(p))` for an interior point.
    pub fn stay_times(&self, p: &PhasePoint) -> Result<(f64, f64)> {
        match (self, p) {
            (Geometry::Intervals(g), PhasePoint::Line(x)) => match g.locate(*x) {
                Location::Interior(k) => {
                    let (a, b) = g.interval(k).expect("located interval exists");
                    Ok((x - a, b - x))
                }
                Location::LeftEnd(_) | Location::RightEnd(_) => Err(Error::BoundaryPoint),
                Location::Outside => Err(Error::OutsideDomain),
            },
            (Geometry::Billiard(g), PhasePoint::Plane { x, v }) => g.stay_times(x, v),
            _ => Err(Error::Precondition(
                "phase point does not match the geometry".into(),
            )),
        }
    }

    /// `Φ(p, t)`, defined for `-τ₋(p) < t < τ₊(p)`.
    pub fn advect(&self, p: &PhasePoint, t: f64) -> Result<PhasePoint> {
        let (minus, plus) = self.stay_times(p)?;
        if !(t > -minus) {
            return Err(Error::OutsideStayWindow {
                t,
                violated: "tau_minus",
                stay_time: minus,
            });
        }
        if !(t < plus) {
            return Err(Error::OutsideStayWindow {
                t,
                violated: "tau_plus",
                stay_time: plus,
            });
        }
        Ok(match *p {
            PhasePoint::Line(x) => PhasePoint::Line(x + t),
            PhasePoint::Plane { x, v } => PhasePoint::Plane { x: x + v * t, v },
        })
    }

    /// Backward exit of an outgoing point: `(Φ(z, -τ₋(z)), τ₋(z))`.
    pub fn boundary_foot(&self, z: &BoundaryPoint) -> Result<(BoundaryPoint, f64)> {
        match (self, z) {
            (Geometry::Intervals(g), BoundaryPoint::Outgoing(k)) => {
                if !g.contains_index(*k) {
                    return Err(Error::Precondition(format!("no interval with index {k}")));
                }
                Ok((BoundaryPoint::Incoming(*k), g.width(*k)))
            }
            (Geometry::Intervals(_), BoundaryPoint::Incoming(_)) => {
                Err(Error::WrongBoundarySide { expected: "outgoing" })
            }
            (Geometry::Billiard(g), BoundaryPoint::Wall { x, v }) => {
                let n = g.outward_normal(x).ok_or_else(|| {
                    Error::Precondition("wall point without a defined normal".into())
                })?;
                if v.norm_squared() == 0.0 {
                    return Err(Error::NoBackwardExit);
                }
                if !(v.dot(&n) > 0.0) {
                    return Err(Error::WrongBoundarySide { expected: "outgoing" });
                }
                let hit = g.wall_hit(x, &-v).ok_or(Error::NoBackwardExit)?;
                Ok((BoundaryPoint::Wall { x: hit.point, v: *v }, hit.time))
            }
            _ => Err(Error::Precondition(
                "boundary point does not match the geometry".into(),
            )),
        }
    }

    pub fn rebound_sequence(&self, p: &PhasePoint, t_max: f64) -> Result<ReboundSequence> {
        match (self, p) {
            (Geometry::Billiard(g), PhasePoint::Plane { x, v }) => g.rebound_sequence(x, v, t_max),
            _ => Err(Error::Unsupported("rebound sequences need the billiard geometry")),
        }
    }
}
