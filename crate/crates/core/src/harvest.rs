//! Harvested power at each receiver.
//!
//! Two routes are provided. [`harvested_energy_asymptotic`] evaluates the
//! large-array closed form
//!
//! ```text
//! Q_i = ζ P_t d_i^{-α}
//!     + ζ P_t M d_i^{-3α} β_i |g_i|² / ( Σ_k d_k^{-2α} β_k |g_k|² + M σ² / (P_t τ) )
//! ```
//!
//! where the sum runs over every receiver, `i` included. [`simulate_two_phase`]
//! plays out the backscatter pilot and the phase-conjugated energy beam on
//! the full channel vectors and measures ζ|y_i|² directly.

use num_complex::Complex64;
use rand::Rng;

use crate::channel::{complex_normal, ChannelRealization};
use crate::error::{check_range, Error, Result};
use crate::network::NetworkRealization;
use crate::params::SystemParams;

/// Per-receiver reflection coefficients, each in [0, 1].
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ReflectionProfile {
    betas: Vec<f64>,
}

impl ReflectionProfile {
    pub fn new(betas: Vec<f64>) -> Result<Self> {
        for &b in &betas {
            check_range("beta", b, 0.0, 1.0)?;
        }
        Ok(Self { betas })
    }

    pub fn zeros(k: usize) -> Self {
        Self {
            betas: vec![0.0; k],
        }
    }

    pub fn ones(k: usize) -> Self {
        Self {
            betas: vec![1.0; k],
        }
    }

    pub fn betas(&self) -> &[f64] {
        &self.betas
    }

    pub fn len(&self) -> usize {
        self.betas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.betas.is_empty()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.betas
    }
}

/// Omnidirectional, retrodirective and total harvested power per receiver (W).
#[derive(Debug, Clone, PartialEq, Default)]
pub struct HarvestReport {
    pub q_om: Vec<f64>,
    pub q_re: Vec<f64>,
    pub q_total: Vec<f64>,
}

impl HarvestReport {
    pub fn len(&self) -> usize {
        self.q_total.len()
    }

    pub fn is_empty(&self) -> bool {
        self.q_total.is_empty()
    }
}

fn check_lengths(
    net: &NetworkRealization,
    channels: &ChannelRealization,
    profile: &ReflectionProfile,
) -> Result<()> {
    let k = net.len();
    if channels.len() != k {
        return Err(Error::LengthMismatch {
            what: "channels",
            got: channels.len(),
            expected: k,
        });
    }
    if profile.len() != k {
        return Err(Error::LengthMismatch {
            what: "reflection profile",
            got: profile.len(),
            expected: k,
        });
    }
    Ok(())
}

/// Retrodirective component for every receiver given distances, |g|² and β.
///
/// Shared by the closed form and the HTB iteration, which re-evaluates it at
/// every step with frozen channels.
pub fn retro_powers(params: &SystemParams, distances: &[f64], gains: &[f64], betas: &[f64]) -> Vec<f64> {
    let alpha = params.alpha();
    let scale = params.efficiency() * params.transmit_power() * params.m();
    let loss: Vec<f64> = distances.iter().map(|d| d.powf(-alpha)).collect();
    let reflected: f64 = loss
        .iter()
        .zip(gains)
        .zip(betas)
        .map(|((l, g), b)| l * l * b * g)
        .sum();
    let denom = reflected + params.noise_term();
    loss.iter()
        .zip(gains)
        .zip(betas)
        .map(|((l, g), b)| {
            let num = scale * l * l * l * b * g;
            // silent and noiseless: nothing reflected, nothing beamed back
            if num == 0.0 {
                0.0
            } else {
                num / denom
            }
        })
        .collect()
}

pub fn harvested_energy_asymptotic(
    params: &SystemParams,
    net: &NetworkRealization,
    channels: &ChannelRealization,
    profile: &ReflectionProfile,
) -> Result<HarvestReport> {
    check_lengths(net, channels, profile)?;
    let q_om: Vec<f64> = net.distances.iter().map(|&d| params.omni_power(d)).collect();
    let q_re = retro_powers(params, &net.distances, &channels.gain_powers(), profile.betas());
    let q_total = q_om.iter().zip(&q_re).map(|(a, b)| a + b).collect();
    Ok(HarvestReport { q_om, q_re, q_total })
}

/// Unit-norm energy beam formed from the backscattered pilot.
///
/// The array observes `Σ_k sqrt(β_k P_t/M) d_k^{-α} g_k f_k` plus matched-filter
/// noise of variance σ²/τ per antenna; the beam is the normalized conjugate.
/// When nothing is received (no reflection, no noise) the transmitter has no
/// direction to follow and radiates an isotropically random unit vector.
pub fn energy_beam<R: Rng + ?Sized>(
    params: &SystemParams,
    net: &NetworkRealization,
    channels: &ChannelRealization,
    profile: &ReflectionProfile,
    rng: &mut R,
) -> Result<Vec<Complex64>> {
    check_lengths(net, channels, profile)?;
    let ChannelRealization::Full { antennas: m, .. } = channels else {
        return Err(Error::ReducedChannels);
    };
    let m = *m;
    let per_antenna = params.transmit_power() / params.m();
    let mut beam = vec![Complex64::new(0.0, 0.0); m];
    for (k, (&d, &beta)) in net.distances.iter().zip(profile.betas()).enumerate() {
        if beta == 0.0 {
            continue;
        }
        let f = channels.vector(k).expect("full mode");
        let g: Complex64 = f.iter().sum();
        let amp = (beta * per_antenna).sqrt() * d.powf(-params.alpha());
        let coef = g.conj() * amp;
        for (b, fk) in beam.iter_mut().zip(f) {
            *b += coef * fk.conj();
        }
    }
    let noise_std = (params.noise_power() / params.waveform_duration()).sqrt();
    if noise_std > 0.0 {
        for b in beam.iter_mut() {
            *b += complex_normal(rng) * noise_std;
        }
    }
    let mut norm = beam.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if norm == 0.0 {
        for b in beam.iter_mut() {
            *b = complex_normal(rng);
        }
        norm = beam.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    }
    for b in beam.iter_mut() {
        *b /= norm;
    }
    Ok(beam)
}

/// Exact two-phase evaluation on full channel vectors.
///
/// Only the total is physical here; `q_om` carries the analytic ζP_t d^{-α}
/// and `q_re = q_total − q_om`, which can be slightly negative at finite M.
pub fn simulate_two_phase<R: Rng + ?Sized>(
    params: &SystemParams,
    net: &NetworkRealization,
    channels: &ChannelRealization,
    profile: &ReflectionProfile,
    rng: &mut R,
) -> Result<HarvestReport> {
    let beam = energy_beam(params, net, channels, profile, rng)?;
    let mut report = HarvestReport::default();
    for (i, &d) in net.distances.iter().enumerate() {
        let f = channels.vector(i).expect("full mode");
        let inner: Complex64 = beam.iter().zip(f).map(|(x, fi)| x * fi).sum();
        let received = params.transmit_power() * d.powf(-params.alpha()) * inner.norm_sqr();
        let total = params.efficiency() * received;
        let om = params.omni_power(d);
        report.q_om.push(om);
        report.q_re.push(total - om);
        report.q_total.push(total);
    }
    Ok(report)
}
