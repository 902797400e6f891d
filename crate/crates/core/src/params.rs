//! Physical parameters of the single-cell network.
//!
//! All quantities are SI (W, m, s, Hz). Decibel inputs are converted at the
//! boundary with [`dbm_to_watts`].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Speed of light in vacuum (m/s).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

pub fn watts_to_dbm(watts: f64) -> f64 {
    10.0 * watts.log10() + 30.0
}

/// Unvalidated parameter set. Edit the fields freely, then call
/// [`RawParams::validate`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawParams {
    /// Transmit antennas at the energy transmitter.
    pub antennas: usize,
    /// Receiver density (per m²).
    pub density: f64,
    /// Exclusion radius (m).
    pub exclusion_radius: f64,
    /// Cell radius (m).
    pub cell_radius: f64,
    pub path_loss_exponent: f64,
    /// Transmit power (W).
    pub transmit_power: f64,
    /// Noise power (W).
    pub noise_power: f64,
    /// Pilot waveform duration (s).
    pub waveform_duration: f64,
    /// RF-to-DC conversion efficiency.
    pub efficiency: f64,
    /// Carrier frequency (Hz). Recorded only; the model is baseband.
    pub carrier_frequency: f64,
}

impl RawParams {
    /// Numerical-results defaults: M=500, λ=0.01, ξ=2 m, ρ=30 m, α=3,
    /// σ²=-150 dBm, τ=10 ns, ζ=1, f_c=900 MHz and P_t = 30 dBm (1 W).
    pub fn baseline() -> Self {
        Self {
            antennas: 500,
            density: 0.01,
            exclusion_radius: 2.0,
            cell_radius: 30.0,
            path_loss_exponent: 3.0,
            transmit_power: 1.0,
            noise_power: dbm_to_watts(-150.0),
            waveform_duration: 1e-8,
            efficiency: 1.0,
            carrier_frequency: 900e6,
        }
    }

    pub fn validate(self) -> Result<SystemParams> {
        fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
            Error::InvalidParam {
                name,
                reason: reason.into(),
            }
        }
        let finite = [
            ("density", self.density),
            ("exclusion_radius", self.exclusion_radius),
            ("cell_radius", self.cell_radius),
            ("path_loss_exponent", self.path_loss_exponent),
            ("transmit_power", self.transmit_power),
            ("noise_power", self.noise_power),
            ("waveform_duration", self.waveform_duration),
            ("efficiency", self.efficiency),
            ("carrier_frequency", self.carrier_frequency),
        ];
        for (name, v) in finite {
            if !v.is_finite() {
                return Err(invalid(name, format!("{v} is not finite")));
            }
        }
        if self.antennas < 1 {
            return Err(invalid("antennas", "must be at least 1"));
        }
        if self.density < 0.0 {
            return Err(invalid("density", "must be non-negative"));
        }
        if self.path_loss_exponent <= 2.0 {
            return Err(invalid("path_loss_exponent", "must exceed 2"));
        }
        if self.exclusion_radius <= 1.0 {
            return Err(invalid("exclusion_radius", "must exceed 1 m"));
        }
        if self.cell_radius <= self.exclusion_radius {
            return Err(invalid(
                "cell_radius",
                "must exceed the exclusion radius",
            ));
        }
        if !(self.efficiency > 0.0 && self.efficiency <= 1.0) {
            return Err(invalid("efficiency", "must lie in (0, 1]"));
        }
        if self.transmit_power <= 0.0 {
            return Err(invalid("transmit_power", "must be positive"));
        }
        if self.waveform_duration <= 0.0 {
            return Err(invalid("waveform_duration", "must be positive"));
        }
        if self.noise_power < 0.0 {
            return Err(invalid("noise_power", "must be non-negative"));
        }
        if self.carrier_frequency <= 0.0 {
            return Err(invalid("carrier_frequency", "must be positive"));
        }
        let params = SystemParams { raw: self };
        for w in params.warnings() {
            log::warn!("{w}");
        }
        Ok(params)
    }
}

impl Default for RawParams {
    fn default() -> Self {
        Self::baseline()
    }
}

/// Non-fatal findings about a valid parameter set.
#[derive(Debug, Clone, PartialEq)]
pub enum ParamWarning {
    /// The pilot outlasts the shortest round trip, so the pilot and the
    /// retrodirective phase overlap at the nearest receivers.
    PilotOverlapsRoundTrip { duration: f64, round_trip: f64 },
}

impl std::fmt::Display for ParamWarning {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ParamWarning::PilotOverlapsRoundTrip {
                duration,
                round_trip,
            } => write!(
                f,
                "waveform duration {duration:e} s is not shorter than the minimum round-trip delay {round_trip:e} s"
            ),
        }
    }
}

/// Validated parameter set.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct SystemParams {
    raw: RawParams,
}

impl SystemParams {
    pub fn baseline() -> Self {
        RawParams::baseline()
            .validate()
            .expect("defaults are valid")
    }

    pub fn to_raw(&self) -> RawParams {
        self.raw.clone()
    }

    pub fn antennas(&self) -> usize {
        self.raw.antennas
    }
    pub fn m(&self) -> f64 {
        self.raw.antennas as f64
    }
    pub fn density(&self) -> f64 {
        self.raw.density
    }
    pub fn exclusion_radius(&self) -> f64 {
        self.raw.exclusion_radius
    }
    pub fn cell_radius(&self) -> f64 {
        self.raw.cell_radius
    }
    pub fn alpha(&self) -> f64 {
        self.raw.path_loss_exponent
    }
    pub fn transmit_power(&self) -> f64 {
        self.raw.transmit_power
    }
    pub fn noise_power(&self) -> f64 {
        self.raw.noise_power
    }
    pub fn waveform_duration(&self) -> f64 {
        self.raw.waveform_duration
    }
    pub fn efficiency(&self) -> f64 {
        self.raw.efficiency
    }
    pub fn carrier_frequency(&self) -> f64 {
        self.raw.carrier_frequency
    }

    pub fn warnings(&self) -> Vec<ParamWarning> {
        let round_trip = 2.0 * self.raw.exclusion_radius / SPEED_OF_LIGHT;
        let mut out = Vec::new();
        if self.raw.waveform_duration >= round_trip {
            out.push(ParamWarning::PilotOverlapsRoundTrip {
                duration: self.raw.waveform_duration,
                round_trip,
            });
        }
        out
    }

    /// Area of the annulus between the exclusion zone and the cell edge.
    pub fn annulus_area(&self) -> f64 {
        let (xi, rho) = (self.raw.exclusion_radius, self.raw.cell_radius);
        std::f64::consts::PI * (rho * rho - xi * xi)
    }

    /// Mean receiver count λπ(ρ²−ξ²).
    pub fn mean_count(&self) -> f64 {
        self.raw.density * self.annulus_area()
    }

    /// Omnidirectional harvested power ζ P_t d^{-α}.
    pub fn omni_power(&self, distance: f64) -> f64 {
        self.raw.efficiency * self.raw.transmit_power * distance.powf(-self.raw.path_loss_exponent)
    }

    /// Noise term M σ² / (P_t τ) of the retrodirective denominator.
    pub fn noise_term(&self) -> f64 {
        self.m() * self.raw.noise_power / (self.raw.transmit_power * self.raw.waveform_duration)
    }
}
