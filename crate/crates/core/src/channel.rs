//! Rayleigh block-fading channels between the transmitter array and each receiver.
//!
//! Full mode keeps the M-element vector f_i ~ CN(0, I_M); the downlink
//! equivalent gain is g_i = Σ_m f_{i,m}. Reduced mode draws only |g_i|²,
//! which is exponential with mean M.

use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::network::NetworkRealization;
use crate::params::SystemParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ChannelMode {
    Full,
    Reduced,
}

impl std::fmt::Display for ChannelMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ChannelMode::Full => "full",
            ChannelMode::Reduced => "reduced",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ChannelRealization {
    /// Row-major K×M matrix of channel coefficients.
    Full {
        antennas: usize,
        coefficients: Vec<Complex64>,
    },
    Reduced { gains: Vec<f64> },
}

impl ChannelRealization {
    pub fn reduced(gains: Vec<f64>) -> Self {
        ChannelRealization::Reduced { gains }
    }

    pub fn mode(&self) -> ChannelMode {
        match self {
            ChannelRealization::Full { .. } => ChannelMode::Full,
            ChannelRealization::Reduced { .. } => ChannelMode::Reduced,
        }
    }

    pub fn len(&self) -> usize {
        match self {
            ChannelRealization::Full {
                antennas,
                coefficients,
            } => coefficients.len() / antennas,
            ChannelRealization::Reduced { gains } => gains.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// The channel vector f_i, in full mode only.
    pub fn vector(&self, i: usize) -> Option<&[Complex64]> {
        match self {
            ChannelRealization::Full {
                antennas,
                coefficients,
            } => Some(&coefficients[i * antennas..(i + 1) * antennas]),
            ChannelRealization::Reduced { .. } => None,
        }
    }

    /// Equivalent downlink gain g_i = Σ_m f_{i,m} (full mode only).
    pub fn gain(&self, i: usize) -> Option<Complex64> {
        self.vector(i).map(|f| f.iter().sum())
    }

    /// |g_i|².
    pub fn gain_power(&self, i: usize) -> f64 {
        match self {
            ChannelRealization::Full { .. } => self.gain(i).expect("full mode").norm_sqr(),
            ChannelRealization::Reduced { gains } => gains[i],
        }
    }

    pub fn gain_powers(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.gain_power(i)).collect()
    }
}

/// Standard circularly-symmetric complex Gaussian sample, E|z|² = 1.
pub fn complex_normal<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(re * FRAC_1_SQRT_2, im * FRAC_1_SQRT_2)
}

pub fn draw_channels<R: Rng + ?Sized>(
    params: &SystemParams,
    net: &NetworkRealization,
    mode: ChannelMode,
    rng: &mut R,
) -> ChannelRealization {
    let k = net.len();
    match mode {
        ChannelMode::Full => {
            let m = params.antennas();
            let coefficients = (0..k * m).map(|_| complex_normal(rng)).collect();
            ChannelRealization::Full {
                antennas: m,
                coefficients,
            }
        }
        ChannelMode::Reduced => {
            let mean = params.m();
            let gains = (0..k)
                .map(|_| {
                    let e: f64 = Exp1.sample(rng);
                    mean * e
                })
                .collect();
            ChannelRealization::Reduced { gains }
        }
    }
}
