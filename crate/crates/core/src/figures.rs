//! Sweeps behind the published figures, written as CSV tables.
//!
//! Every sweep point reuses the run seed, so policies and grid points are
//! compared on common random numbers.

use std::fs::File;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::analysis::Analysis;
use crate::config::RunConfig;
use crate::error::Result;
use crate::montecarlo::{run_policy_experiment, satisfaction_fraction, ExperimentConfig, ExperimentOutcome, Policy};
use crate::optimize::{delta_star, p_star, pbb_edge_objective, OptResult, OptimizeOptions};
use crate::params::SystemParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Figure {
    Fig1,
    Fig2a,
    Fig2b,
    Fig3,
    All,
}

impl Figure {
    pub fn expand(self) -> Vec<Figure> {
        match self {
            Figure::All => vec![Figure::Fig1, Figure::Fig2a, Figure::Fig2b, Figure::Fig3],
            f => vec![f],
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Figure::Fig1 => "fig1",
            Figure::Fig2a => "fig2a",
            Figure::Fig2b => "fig2b",
            Figure::Fig3 => "fig3",
            Figure::All => "all",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnergyRow {
    pub pt_dbm: f64,
    pub policy: &'static str,
    pub mean_w: f64,
    pub stderr_w: f64,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThresholdRow {
    pub delta_m: f64,
    pub location: &'static str,
    pub distance_m: f64,
    pub analytic_w: f64,
    pub mean_w: f64,
    pub stderr_w: f64,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbabilityRow {
    pub p: f64,
    pub location: &'static str,
    pub distance_m: f64,
    pub analytic_w: f64,
    pub mean_w: f64,
    pub stderr_w: f64,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SatisfactionRow {
    pub pt_dbm: f64,
    pub density: f64,
    pub gamma_w: f64,
    pub policy: &'static str,
    pub fraction: f64,
    pub stderr: f64,
    pub n: usize,
}

/// Optimum sidecar written next to the threshold and probability tables.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OptimumRecord {
    pub quantity: &'static str,
    #[serde(flatten)]
    pub result: OptResult,
    /// Mean power of the inner and edge receivers at the optimum (W).
    pub inner_w: f64,
    pub edge_w: f64,
}

/// `n` evenly spaced points covering `[a, b]`.
pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![a],
        _ => (0..n)
            .map(|i| if i == n - 1 { b } else { a + (b - a) * i as f64 / (n - 1) as f64 })
            .collect(),
    }
}

fn experiment(cfg: &RunConfig, params: SystemParams, policy: Policy) -> ExperimentConfig {
    let mut e = ExperimentConfig::new(params, policy, cfg.trials, cfg.seed).channel_mode(cfg.channel_mode);
    e.threads = cfg.threads;
    e
}

fn tagged_run(cfg: &RunConfig, params: &SystemParams, policy: Policy, d: f64) -> Result<ExperimentOutcome> {
    run_policy_experiment(&experiment(cfg, params.clone(), policy).tagged(d))
}

pub fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_writer(File::create(path)?);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

/// Mean total power per receiver against transmit power for the silent,
/// distance-inverse, full and perfect-CSI benchmarks.
pub fn fig1_rows(cfg: &RunConfig) -> Result<Vec<EnergyRow>> {
    let mut rows = Vec::new();
    for &pt in &cfg.sweep.transmit_power_dbm {
        let params = cfg.system.with_transmit_dbm(pt).to_params()?;
        for policy in [Policy::None, Policy::Dib, Policy::Fb, Policy::PerfectBf] {
            let out = run_policy_experiment(&experiment(cfg, params.clone(), policy))?;
            log::info!("fig1 {pt} dBm {}: {:.4e}", policy.label(), out.estimate.mean);
            rows.push(EnergyRow {
                pt_dbm: pt,
                policy: policy.label(),
                mean_w: out.estimate.mean,
                stderr_w: out.estimate.stderr,
                n: out.estimate.n,
            });
        }
    }
    Ok(rows)
}

/// Inner and edge receiver power against the DBB threshold.
pub fn fig2a_rows(cfg: &RunConfig) -> Result<(Vec<ThresholdRow>, OptimumRecord)> {
    let params = cfg.tagged_system().to_params()?;
    let analysis = Analysis::new(&params);
    let (xi, rho) = (params.exclusion_radius(), params.cell_radius());
    let mut rows = Vec::new();
    for delta in linspace(xi, rho, cfg.sweep.delta_points) {
        for (location, d) in [("inner", xi), ("edge", rho)] {
            let out = tagged_run(cfg, &params, Policy::Dbb { delta }, d)?;
            rows.push(ThresholdRow {
                delta_m: delta,
                location,
                distance_m: d,
                analytic_w: analysis.dbb_tagged(d, delta)?,
                mean_w: out.estimate.mean,
                stderr_w: out.estimate.stderr,
                n: out.estimate.n,
            });
        }
        log::info!("fig2a delta {delta:.3} m done");
    }
    let result = delta_star(&params, &OptimizeOptions::default())?;
    let optimum = OptimumRecord {
        quantity: "delta_m",
        inner_w: analysis.dbb_tagged(xi, result.argument)?,
        edge_w: analysis.dbb_tagged(rho, result.argument)?,
        result,
    };
    Ok((rows, optimum))
}

/// Inner and edge receiver power against the PBB reflection probability.
pub fn fig2b_rows(cfg: &RunConfig) -> Result<(Vec<ProbabilityRow>, OptimumRecord)> {
    let params = cfg.tagged_system().to_params()?;
    let analysis = Analysis::new(&params);
    let (xi, rho) = (params.exclusion_radius(), params.cell_radius());
    let mut rows = Vec::new();
    for p in linspace(0.0, 1.0, cfg.sweep.probability_points) {
        for (location, d) in [("inner", xi), ("edge", rho)] {
            let out = tagged_run(cfg, &params, Policy::Pbb { p }, d)?;
            rows.push(ProbabilityRow {
                p,
                location,
                distance_m: d,
                analytic_w: analysis.pbb_tagged(d, p)?,
                mean_w: out.estimate.mean,
                stderr_w: out.estimate.stderr,
                n: out.estimate.n,
            });
        }
        log::info!("fig2b p {p:.3} done");
    }
    let opts = OptimizeOptions::default();
    let result = p_star(&params, &opts)?;
    debug_assert!(
        (pbb_edge_objective(&analysis, result.argument, opts.weight_by_own_reflection)? - result.objective).abs()
            <= 1e-12 * result.objective.abs()
    );
    let optimum = OptimumRecord {
        quantity: "p",
        inner_w: analysis.pbb_tagged(xi, result.argument)?,
        edge_w: analysis.pbb_tagged(rho, result.argument)?,
        result,
    };
    Ok((rows, optimum))
}

/// Share of receivers meeting a common target under HTB and FB.
pub fn fig3_rows(cfg: &RunConfig) -> Result<Vec<SatisfactionRow>> {
    let mut rows = Vec::new();
    for &density in &cfg.sweep.densities {
        for &gamma in &cfg.sweep.targets_w {
            for &pt in &cfg.sweep.transmit_power_dbm {
                let params = cfg.system.with_density(density).with_transmit_dbm(pt).to_params()?;
                let policy = Policy::Htb {
                    gamma,
                    max_iter: cfg.sweep.htb_max_iter,
                };
                let res = satisfaction_fraction(&experiment(cfg, params, policy))?;
                for (label, est) in [("HTB", res.htb), ("FB", res.fb)] {
                    rows.push(SatisfactionRow {
                        pt_dbm: pt,
                        density,
                        gamma_w: gamma,
                        policy: label,
                        fraction: est.mean,
                        stderr: est.stderr,
                        n: est.n,
                    });
                }
            }
            log::info!("fig3 density {density} target {gamma} W done");
        }
    }
    Ok(rows)
}

/// Runs one figure sweep and writes its files into `dir`. Returns the paths written.
pub fn reproduce(figure: Figure, cfg: &RunConfig, dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    for fig in figure.expand() {
        let csv_path = dir.join(format!("{}.csv", fig.name()));
        match fig {
            Figure::Fig1 => write_csv(&csv_path, &fig1_rows(cfg)?)?,
            Figure::Fig2a => {
                let (rows, optimum) = fig2a_rows(cfg)?;
                write_csv(&csv_path, &rows)?;
                let side = dir.join("fig2a_optimum.json");
                write_json(&side, &optimum)?;
                written.push(side);
            }
            Figure::Fig2b => {
                let (rows, optimum) = fig2b_rows(cfg)?;
                write_csv(&csv_path, &rows)?;
                let side = dir.join("fig2b_optimum.json");
                write_json(&side, &optimum)?;
                written.push(side);
            }
            Figure::Fig3 => write_csv(&csv_path, &fig3_rows(cfg)?)?,
            Figure::All => unreachable!("expanded above"),
        }
        written.push(csv_path);
    }
    written.sort();
    Ok(written)
}
