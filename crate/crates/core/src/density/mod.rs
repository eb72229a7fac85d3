//! Phase-space densities: exact piecewise-constant ones on interval unions
//! and weighted particle clouds on billiard tables.

mod ensemble;
mod piecewise;

pub use ensemble::{transport_ensemble, Particle, ParticleEnsemble, TransportReport};
pub use piecewise::{DensityRow, PiecewiseDensity};

/// Total mass `‖f‖` of a nonnegative density.
pub trait Mass {
    fn mass(&self) -> f64;
}

impl Mass for PiecewiseDensity {
    fn mass(&self) -> f64 {
        self.l1_norm()
    }
}

impl Mass for ParticleEnsemble {
    fn mass(&self) -> f64 {
        ParticleEnsemble::mass(self)
    }
}
