//! Retrodirective large-array energy beamforming towards backscattering
//! energy receivers.
//!
//! The crate samples Poisson networks of receivers on an annulus, evaluates the
//! harvested power under several reflection policies, computes the matching
//! stochastic-geometry averages by quadrature and drives seeded Monte Carlo
//! experiments whose results are written as CSV tables.

pub mod analysis;
pub mod channel;
pub mod cli;
pub mod config;
pub mod error;
pub mod figures;
pub mod harvest;
pub mod manifest;
pub mod montecarlo;
pub mod network;
pub mod optimize;
pub mod params;
pub mod policies;
pub mod quadrature;
pub mod rng;
pub mod stats;

pub use analysis::{Analysis, AnnulusSpec, CcdfQuery};
pub use channel::{draw_channels, ChannelMode, ChannelRealization};
pub use config::{RunConfig, SweepConfig, SystemConfig};
pub use error::{Error, Result};
pub use harvest::{harvested_energy_asymptotic, simulate_two_phase, HarvestReport, ReflectionProfile};
pub use montecarlo::{run_policy_experiment, satisfaction_fraction, ExperimentConfig, ExperimentOutcome, Policy};
pub use network::{sample_network, NetworkRealization};
pub use optimize::{delta_star, p_star, OptResult, OptimizeOptions};
pub use params::{RawParams, SystemParams};
pub use stats::EstimateWithCI;
