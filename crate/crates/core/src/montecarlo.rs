//! Seeded Monte Carlo engine.
//!
//! Each trial draws a fresh network and channel realization from its own RNG
//! streams (see [`crate::rng`]), applies a reflection policy and records the
//! harvested power. Trials run in parallel; results are gathered in trial
//! order and reduced sequentially, so the output is identical for any worker
//! count.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{draw_channels, ChannelMode};
use crate::error::{Error, Result};
use crate::harvest::{harvested_energy_asymptotic, retro_powers, simulate_two_phase, ReflectionProfile};
use crate::network::{sample_network, NetworkRealization};
use crate::params::SystemParams;
use crate::policies::{
    dbb_profile, dib_profile, fb_profile, htb_iterate, pbb_profile, satisfied_flags, HtbTargets, HTB_TOL,
};
use crate::rng::{stream, Purpose};
use crate::stats::EstimateWithCI;

/// Iteration cap used for HTB throughout the numerical results.
pub const HTB_MAX_ITER: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Policy {
    /// Nobody reflects: omnidirectional transmission only.
    None,
    Dib,
    Fb,
    Dbb { delta: f64 },
    Pbb { p: f64 },
    Htb { gamma: f64, max_iter: usize },
    /// Full-CSI benchmark: every receiver gets a dedicated beam, ζP_tM d^{-α}.
    PerfectBf,
}

impl Policy {
    pub fn label(&self) -> &'static str {
        match self {
            Policy::None => "NONE",
            Policy::Dib => "DIB",
            Policy::Fb => "FB",
            Policy::Dbb { .. } => "DBB",
            Policy::Pbb { .. } => "PBB",
            Policy::Htb { .. } => "HTB",
            Policy::PerfectBf => "PERFECT_BF",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub params: SystemParams,
    pub policy: Policy,
    pub trials: usize,
    pub seed: u64,
    pub channel_mode: ChannelMode,
    /// Pin an extra receiver at this distance and report only its power.
    pub tagged_er: Option<f64>,
    /// Worker threads; `None` uses the global pool.
    #[serde(skip)]
    pub threads: Option<usize>,
    /// Return the raw samples alongside the estimate.
    #[serde(skip)]
    pub keep_samples: bool,
}

impl ExperimentConfig {
    pub fn new(params: SystemParams, policy: Policy, trials: usize, seed: u64) -> Self {
        Self {
            params,
            policy,
            trials,
            seed,
            channel_mode: ChannelMode::Reduced,
            tagged_er: None,
            threads: None,
            keep_samples: false,
        }
    }

    pub fn tagged(mut self, distance: f64) -> Self {
        self.tagged_er = Some(distance);
        self
    }

    pub fn channel_mode(mut self, mode: ChannelMode) -> Self {
        self.channel_mode = mode;
        self
    }

    pub fn threads(mut self, threads: usize) -> Self {
        self.threads = Some(threads);
        self
    }

    pub fn keep_samples(mut self) -> Self {
        self.keep_samples = true;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.trials < 1 {
            return Err(Error::InvalidParam {
                name: "trials",
                reason: "need at least one trial".into(),
            });
        }
        if let Some(d) = self.tagged_er {
            crate::error::check_range(
                "tagged_er",
                d,
                self.params.exclusion_radius(),
                self.params.cell_radius(),
            )?;
        }
        if let Policy::Htb { gamma, .. } = self.policy {
            HtbTargets::common(gamma, 1)?;
        }
        Ok(())
    }
}

/// Which population an estimate describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimatorKind {
    /// Per-receiver samples pooled across trials (a typical receiver).
    Population,
    /// The pinned receiver, one sample per trial.
    Tagged,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentOutcome {
    pub estimator: EstimatorKind,
    pub estimate: EstimateWithCI,
    pub trials: usize,
    /// Trials that produced no receiver and hence no sample.
    pub empty_trials: usize,
    /// Samples in trial order, when requested.
    #[serde(skip)]
    pub samples: Option<Vec<f64>>,
}

struct Trial {
    sum: f64,
    count: usize,
    samples: Vec<f64>,
}

pub(crate) fn with_workers<T: Send>(threads: Option<usize>, job: impl FnOnce() -> T + Send) -> Result<T> {
    match threads {
        None => Ok(job()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::Workers(e.to_string()))?;
            Ok(pool.install(job))
        }
    }
}

/// Network for trial `trial`, with the pinned receiver (if any) at index 0.
pub fn trial_network(params: &SystemParams, seed: u64, trial: u64, tagged: Option<f64>) -> NetworkRealization {
    let net = sample_network(params, &mut stream(seed, trial, Purpose::Network));
    match tagged {
        Some(d) => net.with_tagged(d),
        None => net,
    }
}

fn build_profile(config: &ExperimentConfig, net: &NetworkRealization, trial: u64, channels: &crate::ChannelRealization) -> Result<ReflectionProfile> {
    let params = &config.params;
    Ok(match config.policy {
        Policy::None | Policy::PerfectBf => ReflectionProfile::zeros(net.len()),
        Policy::Dib => dib_profile(params, net),
        Policy::Fb => fb_profile(net),
        Policy::Dbb { delta } => dbb_profile(params, net, delta)?,
        Policy::Pbb { p } => pbb_profile(net, p, &mut stream(config.seed, trial, Purpose::Policy))?,
        Policy::Htb { gamma, max_iter } => {
            let targets = HtbTargets::common(gamma, net.len())?;
            htb_iterate(params, net, channels, &targets, max_iter, HTB_TOL)?.profile
        }
    })
}

fn run_trial(config: &ExperimentConfig, trial: u64) -> Result<Trial> {
    let params = &config.params;
    let net = trial_network(params, config.seed, trial, config.tagged_er);
    if net.is_empty() {
        return Ok(Trial {
            sum: 0.0,
            count: 0,
            samples: Vec::new(),
        });
    }
    let q_total = if config.policy == Policy::PerfectBf {
        net.distances
            .iter()
            .map(|&d| params.m() * params.omni_power(d))
            .collect()
    } else {
        let channels = draw_channels(
            params,
            &net,
            config.channel_mode,
            &mut stream(config.seed, trial, Purpose::Channel),
        );
        let profile = build_profile(config, &net, trial, &channels)?;
        match config.channel_mode {
            ChannelMode::Reduced => harvested_energy_asymptotic(params, &net, &channels, &profile)?.q_total,
            ChannelMode::Full => {
                let mut rng = stream(config.seed, trial, Purpose::Noise);
                simulate_two_phase(params, &net, &channels, &profile, &mut rng)?.q_total
            }
        }
    };
    let samples: Vec<f64> = if config.tagged_er.is_some() {
        vec![q_total[0]]
    } else {
        q_total
    };
    Ok(Trial {
        sum: crate::stats::compensated_sum(samples.iter().copied()),
        count: samples.len(),
        samples,
    })
}

/// Runs `config.trials` independent trials and estimates the mean harvested
/// power: pooled over all receivers, or of the pinned receiver when
/// `tagged_er` is set.
pub fn run_policy_experiment(config: &ExperimentConfig) -> Result<ExperimentOutcome> {
    config.validate()?;
    let trials: Vec<Trial> = with_workers(config.threads, || {
        (0..config.trials as u64)
            .into_par_iter()
            .map(|t| run_trial(config, t))
            .collect::<Result<Vec<_>>>()
    })??;
    let sums: Vec<f64> = trials.iter().map(|t| t.sum).collect();
    let counts: Vec<usize> = trials.iter().map(|t| t.count).collect();
    let empty_trials = counts.iter().filter(|&&c| c == 0).count();
    let (estimator, estimate) = if config.tagged_er.is_some() {
        (EstimatorKind::Tagged, EstimateWithCI::from_samples(&sums))
    } else {
        (EstimatorKind::Population, EstimateWithCI::from_clusters(&sums, &counts))
    };
    let samples = config
        .keep_samples
        .then(|| trials.into_iter().flat_map(|t| t.samples).collect());
    Ok(ExperimentOutcome {
        estimator,
        estimate,
        trials: config.trials,
        empty_trials,
        samples,
    })
}

/// Share of receivers meeting a common retrodirective target, under HTB and
/// under full backscattering on the same realizations.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SatisfactionResult {
    pub htb: EstimateWithCI,
    pub fb: EstimateWithCI,
    pub receivers: usize,
    pub trials: usize,
    pub empty_trials: usize,
}

pub fn satisfaction_fraction(config: &ExperimentConfig) -> Result<SatisfactionResult> {
    config.validate()?;
    let Policy::Htb { gamma, max_iter } = config.policy else {
        return Err(Error::Unsupported(format!(
            "satisfaction fraction needs the HTB policy, got {}",
            config.policy.label()
        )));
    };
    let params = &config.params;
    let per_trial: Vec<(usize, usize, usize)> = with_workers(config.threads, || {
        (0..config.trials as u64)
            .into_par_iter()
            .map(|t| {
                let net = trial_network(params, config.seed, t, config.tagged_er);
                if net.is_empty() {
                    return Ok((0, 0, 0));
                }
                let channels = draw_channels(params, &net, config.channel_mode, &mut stream(config.seed, t, Purpose::Channel));
                let targets = HtbTargets::common(gamma, net.len())?;
                let htb = htb_iterate(params, &net, &channels, &targets, max_iter, HTB_TOL)?;
                let fb_retro = retro_powers(params, &net.distances, &channels.gain_powers(), fb_profile(&net).betas());
                let fb_ok = satisfied_flags(&fb_retro, &targets).iter().filter(|&&s| s).count();
                Ok((net.len(), htb.satisfied_count(), fb_ok))
            })
            .collect::<Result<Vec<_>>>()
    })??;
    let counts: Vec<usize> = per_trial.iter().map(|t| t.0).collect();
    let htb: Vec<f64> = per_trial.iter().map(|t| t.1 as f64).collect();
    let fb: Vec<f64> = per_trial.iter().map(|t| t.2 as f64).collect();
    Ok(SatisfactionResult {
        htb: EstimateWithCI::from_clusters(&htb, &counts),
        fb: EstimateWithCI::from_clusters(&fb, &counts),
        receivers: counts.iter().sum(),
        trials: config.trials,
        empty_trials: counts.iter().filter(|&&c| c == 0).count(),
    })
}
