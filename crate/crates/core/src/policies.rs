//! Reflection policies: how each receiver sets its backscatter coefficient.

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::channel::ChannelRealization;
use crate::error::{check_range, Error, Result};
use crate::harvest::{retro_powers, ReflectionProfile};
use crate::network::NetworkRealization;
use crate::params::SystemParams;

/// Default stopping tolerance on max |Δβ| for the HTB iteration.
pub const HTB_TOL: f64 = 1e-10;
/// Relative slack when checking Q_RE ≥ Γ.
pub const SATISFIED_REL_TOL: f64 = 1e-9;

/// Distance-inversion: β_i = (d_i/ρ)^{2α}, equalizing d^{-2α}β across receivers.
pub fn dib_profile(params: &SystemParams, net: &NetworkRealization) -> ReflectionProfile {
    let rho = params.cell_radius();
    let two_alpha = 2.0 * params.alpha();
    let betas = net
        .distances
        .iter()
        .map(|&d| (d / rho).powf(two_alpha).min(1.0))
        .collect();
    ReflectionProfile::new(betas).expect("distances lie inside the cell")
}

/// Full backscattering.
pub fn fb_profile(net: &NetworkRealization) -> ReflectionProfile {
    ReflectionProfile::ones(net.len())
}

/// Distance-based binary: reflect iff farther than `delta`.
pub fn dbb_profile(params: &SystemParams, net: &NetworkRealization, delta: f64) -> Result<ReflectionProfile> {
    check_range("delta", delta, params.exclusion_radius(), params.cell_radius())?;
    Ok(ReflectionProfile::new(
        net.distances
            .iter()
            .map(|&d| if d > delta { 1.0 } else { 0.0 })
            .collect(),
    )
    .expect("binary"))
}

/// Probabilistic binary: each receiver reflects independently with probability `p`.
pub fn pbb_profile<R: Rng + ?Sized>(net: &NetworkRealization, p: f64, rng: &mut R) -> Result<ReflectionProfile> {
    check_range("p", p, 0.0, 1.0)?;
    Ok(ReflectionProfile::new(
        (0..net.len())
            .map(|_| if rng.random::<f64>() < p { 1.0 } else { 0.0 })
            .collect(),
    )
    .expect("binary"))
}

/// Per-receiver retrodirective harvesting targets Γ_i ≥ 0 (W).
#[derive(Debug, Clone, PartialEq)]
pub struct HtbTargets(Vec<f64>);

impl HtbTargets {
    pub fn new(gammas: Vec<f64>) -> Result<Self> {
        for &g in &gammas {
            if !(g.is_finite() && g >= 0.0) {
                return Err(Error::InvalidParam {
                    name: "gamma",
                    reason: format!("{g} is not a finite non-negative power"),
                });
            }
        }
        Ok(Self(gammas))
    }

    pub fn common(gamma: f64, k: usize) -> Result<Self> {
        Self::new(vec![gamma; k])
    }

    pub fn gammas(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HtbOutcome {
    pub profile: ReflectionProfile,
    pub converged: bool,
    pub iterations: usize,
    /// Q_RE,i ≥ Γ_i(1 − 1e-9) at the final profile.
    pub satisfied: Vec<bool>,
    /// Retrodirective power at the final profile (W).
    pub retro: Vec<f64>,
}

impl HtbOutcome {
    pub fn satisfied_count(&self) -> usize {
        self.satisfied.iter().filter(|&&s| s).count()
    }
}

fn check_htb_inputs(net: &NetworkRealization, channels: &ChannelRealization, targets: &HtbTargets) -> Result<()> {
    if channels.len() != net.len() {
        return Err(Error::LengthMismatch {
            what: "channels",
            got: channels.len(),
            expected: net.len(),
        });
    }
    if targets.len() != net.len() {
        return Err(Error::LengthMismatch {
            what: "targets",
            got: targets.len(),
            expected: net.len(),
        });
    }
    Ok(())
}

pub fn satisfied_flags(retro: &[f64], targets: &HtbTargets) -> Vec<bool> {
    retro
        .iter()
        .zip(targets.gammas())
        .map(|(&q, &g)| q >= g * (1.0 - SATISFIED_REL_TOL))
        .collect()
}

/// Harvesting-target backscattering by synchronous fixed-point iteration
///
/// ```text
/// β_i(l+1) = min(1, Γ_i / Q_RE,i(β(l)) · β_i(l)),   β(0) = 1
/// ```
///
/// with channels frozen across iterations. A zero target silences the
/// receiver; a zero Q_RE with a positive target reads Γ/0 = ∞ and saturates
/// β at 1.
pub fn htb_iterate(
    params: &SystemParams,
    net: &NetworkRealization,
    channels: &ChannelRealization,
    targets: &HtbTargets,
    max_iter: usize,
    tol: f64,
) -> Result<HtbOutcome> {
    check_htb_inputs(net, channels, targets)?;
    let gains = channels.gain_powers();
    let mut betas = vec![1.0; net.len()];
    let mut iterations = 0;
    let mut converged = false;
    while iterations < max_iter {
        let retro = retro_powers(params, &net.distances, &gains, &betas);
        let next: Vec<f64> = betas
            .iter()
            .zip(&retro)
            .zip(targets.gammas())
            .map(|((&b, &q), &g)| {
                if g == 0.0 {
                    0.0
                } else if q == 0.0 {
                    1.0
                } else {
                    (g / q * b).min(1.0)
                }
            })
            .collect();
        let step = betas
            .iter()
            .zip(&next)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        betas = next;
        iterations += 1;
        if step < tol {
            converged = true;
            break;
        }
    }
    let retro = retro_powers(params, &net.distances, &gains, &betas);
    let satisfied = satisfied_flags(&retro, targets);
    Ok(HtbOutcome {
        profile: ReflectionProfile::new(betas).expect("iterates stay in [0, 1]"),
        converged,
        iterations,
        satisfied,
        retro,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub enum Infeasibility {
    /// I − F is numerically singular.
    Singular,
    /// Solved, but some coefficient falls outside (0, 1].
    OutOfRange { solution: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq)]
pub enum HtbSolution {
    Feasible(ReflectionProfile),
    Infeasible(Infeasibility),
}

impl HtbSolution {
    pub fn feasible(&self) -> Option<&ReflectionProfile> {
        match self {
            HtbSolution::Feasible(p) => Some(p),
            HtbSolution::Infeasible(_) => None,
        }
    }
}

/// Coefficients that meet every target with equality.
///
/// Setting Q_RE,i(β) = Γ_i gives, with a_i = ζP_tM d_i^{-3α}|g_i|²,
/// b_j = d_j^{-2α}|g_j|² and N = Mσ²/(P_tτ),
///
/// ```text
/// (I − F) β = u,   F_ij = Γ_i b_j / a_i,   u_i = Γ_i N / a_i.
/// ```
///
/// The self term j = i stays in F because the retrodirective denominator
/// includes the receiver's own reflection.
pub fn htb_closed_form(
    params: &SystemParams,
    net: &NetworkRealization,
    channels: &ChannelRealization,
    targets: &HtbTargets,
) -> Result<HtbSolution> {
    check_htb_inputs(net, channels, targets)?;
    let k = net.len();
    if k == 0 {
        return Err(Error::Unsupported(
            "closed-form HTB needs at least one receiver".into(),
        ));
    }
    let gains = channels.gain_powers();
    let alpha = params.alpha();
    let scale = params.efficiency() * params.transmit_power() * params.m();
    let loss: Vec<f64> = net.distances.iter().map(|d| d.powf(-alpha)).collect();
    let a: Vec<f64> = loss.iter().zip(&gains).map(|(l, g)| scale * l * l * l * g).collect();
    let b: Vec<f64> = loss.iter().zip(&gains).map(|(l, g)| l * l * g).collect();
    let noise = params.noise_term();
    let gammas = targets.gammas();

    if a.iter().zip(gammas).any(|(&ai, &g)| ai == 0.0 && g > 0.0) {
        return Ok(HtbSolution::Infeasible(Infeasibility::Singular));
    }
    let coupling = |i: usize| if gammas[i] == 0.0 { 0.0 } else { gammas[i] / a[i] };
    let system = DMatrix::from_fn(k, k, |i, j| {
        let f = coupling(i) * b[j];
        if i == j {
            1.0 - f
        } else {
            -f
        }
    });
    let rhs = DVector::from_fn(k, |i, _| coupling(i) * noise);
    let lu = system.clone().lu();
    let Some(mut beta) = lu.solve(&rhs) else {
        return Ok(HtbSolution::Infeasible(Infeasibility::Singular));
    };
    if beta.iter().any(|x| !x.is_finite()) {
        return Ok(HtbSolution::Infeasible(Infeasibility::Singular));
    }
    // one step of iterative refinement
    let residual = &rhs - &system * &beta;
    if let Some(correction) = lu.solve(&residual) {
        beta += correction;
    }
    let solution: Vec<f64> = beta.iter().copied().collect();
    let feasible = solution.iter().zip(gammas).all(|(&x, &g)| {
        if g == 0.0 {
            x.abs() <= f64::EPSILON
        } else {
            x > 0.0 && x <= 1.0
        }
    });
    if !feasible {
        return Ok(HtbSolution::Infeasible(Infeasibility::OutOfRange { solution }));
    }
    let betas = solution
        .iter()
        .zip(gammas)
        .map(|(&x, &g)| if g == 0.0 { 0.0 } else { x })
        .collect();
    Ok(HtbSolution::Feasible(ReflectionProfile::new(betas)?))
}
