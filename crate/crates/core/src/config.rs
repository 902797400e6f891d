//! JSON run configuration.
//!
//! Powers are given in dBm and lengths in metres; [`SystemConfig::to_params`]
//! converts to SI and validates. Every field is optional and falls back to the
//! built-in defaults, so `{}` is a complete config.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::channel::ChannelMode;
use crate::error::{Error, Result};
use crate::params::{dbm_to_watts, RawParams, SystemParams};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SystemConfig {
    pub antennas: usize,
    /// Receivers per m².
    pub density: f64,
    pub exclusion_radius_m: f64,
    pub cell_radius_m: f64,
    pub path_loss_exponent: f64,
    pub transmit_power_dbm: f64,
    /// Noise power in dBm; ignored when `noise_power_w` is set.
    pub noise_power_dbm: f64,
    /// Noise power in watts, for values (such as zero) that dBm cannot express.
    pub noise_power_w: Option<f64>,
    pub waveform_duration_s: f64,
    pub efficiency: f64,
    pub carrier_frequency_hz: f64,
}

impl Default for SystemConfig {
    fn default() -> Self {
        Self {
            antennas: 500,
            density: 0.01,
            exclusion_radius_m: 2.0,
            cell_radius_m: 30.0,
            path_loss_exponent: 3.0,
            transmit_power_dbm: 30.0,
            noise_power_dbm: -150.0,
            noise_power_w: None,
            waveform_duration_s: 1e-8,
            efficiency: 1.0,
            carrier_frequency_hz: 900e6,
        }
    }
}

impl SystemConfig {
    pub fn to_raw(&self) -> RawParams {
        RawParams {
            antennas: self.antennas,
            density: self.density,
            exclusion_radius: self.exclusion_radius_m,
            cell_radius: self.cell_radius_m,
            path_loss_exponent: self.path_loss_exponent,
            transmit_power: dbm_to_watts(self.transmit_power_dbm),
            noise_power: self.noise_power_w.unwrap_or_else(|| dbm_to_watts(self.noise_power_dbm)),
            waveform_duration: self.waveform_duration_s,
            efficiency: self.efficiency,
            carrier_frequency: self.carrier_frequency_hz,
        }
    }

    pub fn to_params(&self) -> Result<SystemParams> {
        self.to_raw().validate()
    }

    pub fn with_transmit_dbm(&self, dbm: f64) -> Self {
        Self {
            transmit_power_dbm: dbm,
            ..self.clone()
        }
    }

    pub fn with_density(&self, density: f64) -> Self {
        Self {
            density,
            ..self.clone()
        }
    }
}

/// Grids for the figure sweeps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    /// Transmit powers for the energy and satisfaction sweeps (dBm).
    pub transmit_power_dbm: Vec<f64>,
    /// Common retro-power targets for the satisfaction sweep (W).
    pub targets_w: Vec<f64>,
    /// Densities for the satisfaction sweep (per m²).
    pub densities: Vec<f64>,
    pub htb_max_iter: usize,
    /// Exclusion radius used by the threshold and probability sweeps (m).
    pub tagged_exclusion_radius_m: f64,
    /// Transmit power used by the threshold and probability sweeps (dBm).
    pub tagged_transmit_power_dbm: f64,
    /// Number of evenly spaced thresholds on [ξ, ρ].
    pub delta_points: usize,
    /// Number of evenly spaced probabilities on [0, 1].
    pub probability_points: usize,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            transmit_power_dbm: (0..=13).map(|i| 20.0 + 2.0 * i as f64).collect(),
            targets_w: vec![1e-3, 1e-2],
            densities: vec![0.01, 0.02],
            htb_max_iter: crate::montecarlo::HTB_MAX_ITER,
            tagged_exclusion_radius_m: 8.0,
            tagged_transmit_power_dbm: 40.0,
            delta_points: 12,
            probability_points: 11,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub system: SystemConfig,
    pub seed: u64,
    pub trials: usize,
    pub channel_mode: ChannelMode,
    pub threads: Option<usize>,
    pub sweep: SweepConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            system: SystemConfig::default(),
            seed: 1,
            trials: 2_000,
            channel_mode: ChannelMode::Reduced,
            threads: None,
            sweep: SweepConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.check()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    /// Validates everything that can be checked without running anything.
    pub fn check(&self) -> Result<()> {
        self.system.to_params()?;
        if self.trials == 0 {
            return Err(Error::InvalidParam {
                name: "trials",
                reason: "need at least one trial".into(),
            });
        }
        if self.threads == Some(0) {
            return Err(Error::InvalidParam {
                name: "threads",
                reason: "need at least one worker".into(),
            });
        }
        let s = &self.sweep;
        if s.transmit_power_dbm.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidParam {
                name: "sweep.transmit_power_dbm",
                reason: "entries must be finite".into(),
            });
        }
        if s.targets_w.iter().any(|g| !(g.is_finite() && *g >= 0.0)) {
            return Err(Error::InvalidParam {
                name: "sweep.targets_w",
                reason: "targets must be finite and nonnegative".into(),
            });
        }
        for &d in &s.densities {
            self.system.with_density(d).to_params()?;
        }
        self.tagged_system().to_params()?;
        if s.delta_points < 2 || s.probability_points < 2 {
            return Err(Error::InvalidParam {
                name: "sweep",
                reason: "threshold and probability grids need at least two points".into(),
            });
        }
        Ok(())
    }

    /// System used by the threshold and probability sweeps.
    pub fn tagged_system(&self) -> SystemConfig {
        SystemConfig {
            exclusion_radius_m: self.sweep.tagged_exclusion_radius_m,
            transmit_power_dbm: self.sweep.tagged_transmit_power_dbm,
            ..self.system.clone()
        }
    }
}
