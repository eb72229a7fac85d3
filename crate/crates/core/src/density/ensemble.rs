use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{ConvexBilliard, Vec2};

#[derive(Debug, Clone, PartialEq)]
pub struct Particle {
    pub x: Vec2,
    pub v: Vec2,
    pub w: f64,
    pub rebounds: u32,
    pub degenerate: bool,
    /// Time of the last reflection, if any.
    pub last_rebound: Option<f64>,
    /// Shortest time between two consecutive reflections seen so far.
    pub min_flight: f64,
}

/// Weighted particle cloud on a billiard table, carrying its own clock.
#[derive(Debug, Clone, PartialEq)]
pub struct ParticleEnsemble {
    pub particles: Vec<Particle>,
    pub seed: u64,
    /// Time elapsed since sampling.
    pub time: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TransportReport {
    /// Particles frozen by a tangential or vertex hit.
    pub degenerate: usize,
    /// Reflections applied during this call.
    pub rebounds: u64,
}

impl ParticleEnsemble {
    /// `n` particles of total weight `mass`. Particle `i` draws from its own
    /// ChaCha stream `(seed, i)`, so the cloud does not depend on thread
    /// count or iteration order.
    pub fn sample(
        g: &ConvexBilliard,
        n: usize,
        mass: f64,
        seed: u64,
        region: Option<(Vec2, f64)>,
    ) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidDensity("ensemble needs at least one particle".into()));
        }
        if !(mass >= 0.0 && mass.is_finite()) {
            return Err(Error::InvalidDensity("ensemble mass must be finite and >= 0".into()));
        }
        if let Some((c, r)) = region {
            if !(r > 0.0) || !g.contains_disk(&c, r) {
                return Err(Error::InvalidDensity(
                    "sampling region must be a disk inside the table".into(),
                ));
            }
        }
        let w = mass / n as f64;
        let particles = (0..n)
            .into_par_iter()
            .map(|i| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(i as u64);
                let x = g.sample_position(&mut rng, region);
                let v = g.velocity().sample(&mut rng);
                Particle {
                    x,
                    v,
                    w,
                    rebounds: 0,
                    degenerate: false,
                    last_rebound: None,
                    min_flight: f64::INFINITY,
                }
            })
            .collect();
        Ok(Self {
            particles,
            seed,
            time: 0.0,
        })
    }

    pub fn from_particles(particles: Vec<Particle>) -> Self {
        Self {
            particles,
            seed: 0,
            time: 0.0,
        }
    }

    pub fn len(&self) -> usize {
        self.particles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.particles.is_empty()
    }

    /// `Σ w`, summed in index order.
    pub fn mass(&self) -> f64 {
        self.particles.iter().map(|p| p.w).sum()
    }

    /// Weight per rebound count: entry `k` samples the mass of `U_k(t) f`.
    pub fn order_weights(&self) -> Vec<f64> {
        let top = self.particles.iter().map(|p| p.rebounds).max().unwrap_or(0) as usize;
        let mut out = vec![0.0; top + 1];
        for p in &self.particles {
            out[p.rebounds as usize] += p.w;
        }
        out
    }

    /// Estimate of the outgoing trace norm of `∫_0^t U_n(s) f ds`: weight of
    /// particles whose `(n+1)`-th reflection happened by now.
    pub fn trace_estimate(&self, n: u32) -> f64 {
        self.particles
            .iter()
            .filter(|p| p.rebounds > n)
            .map(|p| p.w)
            .sum()
    }

    /// Shortest flight between consecutive reflections over the cloud.
    pub fn min_flight(&self) -> f64 {
        self.particles
            .iter()
            .map(|p| p.min_flight)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn max_rebounds(&self) -> u32 {
        self.particles.iter().map(|p| p.rebounds).max().unwrap_or(0)
    }

    pub fn degenerate_count(&self) -> usize {
        self.particles.iter().filter(|p| p.degenerate).count()
    }
}

/// Moves every live particle along the billiard flow for time `t`.
pub fn transport_ensemble(
    e: &ParticleEnsemble,
    t: f64,
    g: &ConvexBilliard,
) -> Result<(ParticleEnsemble, TransportReport)> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::Precondition("transport time must be finite and >= 0".into()));
    }
    let mut out = e.clone();
    out.time = e.time + t;
    if t == 0.0 {
        return Ok((out, TransportReport::default()));
    }
    let start = e.time;
    let rebounds: u64 = out
        .particles
        .par_iter_mut()
        .map(|p| advance(p, start, t, g))
        .sum();
    let report = TransportReport {
        degenerate: out.degenerate_count(),
        rebounds,
    };
    Ok((out, report))
}

fn advance(p: &mut Particle, start: f64, t: f64, g: &ConvexBilliard) -> u64 {
    if p.degenerate {
        return 0;
    }
    let mut now = start;
    let end = start + t;
    let mut count = 0;
    while let Some(hit) = g.wall_hit(&p.x, &p.v) {
        if now + hit.time > end {
            break;
        }
        match g.reflect(&p.v, hit.normal) {
            Some(v) => {
                now += hit.time;
                if let Some(last) = p.last_rebound {
                    p.min_flight = p.min_flight.min(now - last);
                }
                p.last_rebound = Some(now);
                p.x = hit.point;
                p.v = v;
                p.rebounds += 1;
                count += 1;
            }
            None => {
                p.x = hit.point;
                p.degenerate = true;
                return count;
            }
        }
    }
    p.x += p.v * (end - now);
    count
}
