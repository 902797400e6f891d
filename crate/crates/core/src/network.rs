//! Poisson deployment of energy receivers on the annulus ξ ≤ d ≤ ρ.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, Poisson};

use crate::error::{check_range, Result};
use crate::params::SystemParams;

/// One draw of the receiver point process.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct NetworkRealization {
    /// Distances to the transmitter (m).
    pub distances: Vec<f64>,
    /// Polar angles (rad). Kept for plotting; no energy formula reads them.
    pub angles: Vec<f64>,
}

impl NetworkRealization {
    /// Receivers at the given distances, all at angle zero.
    pub fn from_distances(params: &SystemParams, distances: Vec<f64>) -> Result<Self> {
        for &d in &distances {
            check_range(
                "distance",
                d,
                params.exclusion_radius(),
                params.cell_radius(),
            )?;
        }
        let angles = vec![0.0; distances.len()];
        Ok(Self { distances, angles })
    }

    pub fn len(&self) -> usize {
        self.distances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.distances.is_empty()
    }

    /// Pins an extra receiver at `distance` as index 0.
    pub fn with_tagged(mut self, distance: f64) -> Self {
        self.distances.insert(0, distance);
        self.angles.insert(0, 0.0);
        self
    }
}

/// Draws K ~ Poisson(λπ(ρ²−ξ²)) and places the points uniformly on the annulus.
pub fn sample_network<R: Rng + ?Sized>(params: &SystemParams, rng: &mut R) -> NetworkRealization {
    let mean = params.mean_count();
    let count = if mean > 0.0 {
        Poisson::new(mean)
            .expect("positive finite mean")
            .sample(rng) as usize
    } else {
        0
    };
    sample_points(params, count, rng)
}

/// Places `count` points i.i.d. uniformly on the annulus.
pub fn sample_points<R: Rng + ?Sized>(
    params: &SystemParams,
    count: usize,
    rng: &mut R,
) -> NetworkRealization {
    let xi2 = params.exclusion_radius().powi(2);
    let span = params.cell_radius().powi(2) - xi2;
    let rho = params.cell_radius();
    let xi = params.exclusion_radius();
    let mut distances = Vec::with_capacity(count);
    let mut angles = Vec::with_capacity(count);
    for _ in 0..count {
        let u: f64 = rng.random();
        // inverse CDF of the radial density 2r/(ρ²−ξ²)
        let d = (xi2 + u * span).sqrt().clamp(xi, rho);
        distances.push(d);
        angles.push(2.0 * PI * rng.random::<f64>());
    }
    NetworkRealization { distances, angles }
}
