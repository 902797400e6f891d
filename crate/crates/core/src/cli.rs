//! Command-line front end.
//!
//! Exit codes: 0 on success, 1 for bad arguments or configuration, 2 when a
//! run fails after the configuration was accepted.

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::analysis::Analysis;
use crate::channel::ChannelMode;
use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::figures::{reproduce, write_csv, Figure};
use crate::manifest::RunManifest;
use crate::montecarlo::{run_policy_experiment, ExperimentConfig, Policy, HTB_MAX_ITER};
use crate::optimize::{delta_star, p_star, OptimizeOptions};

pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_RUNTIME: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "retrobeam", version, about = "Retrodirective energy beamforming simulator")]
pub struct Cli {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// JSON configuration file; flags override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub trials: Option<usize>,
    /// Output directory.
    #[arg(long, global = true, default_value = "results")]
    pub out: PathBuf,
    /// Worker threads for the trial loop.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[arg(long, global = true, value_enum)]
    pub channel_mode: Option<ChannelMode>,
    /// Transmit power override (dBm).
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub pt_dbm: Option<f64>,
    /// Receiver density override (per m²).
    #[arg(long, global = true)]
    pub density: Option<f64>,
    #[arg(long, global = true)]
    pub antennas: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one Monte Carlo experiment.
    Simulate(SimulateArgs),
    /// Evaluate the analytic averages over the transmit-power and density grids.
    Analyze,
    /// Compute the DBB threshold or the PBB probability.
    Optimize(OptimizeArgs),
    /// Run a figure sweep and write its CSV.
    Reproduce {
        #[arg(value_enum)]
        figure: Figure,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PolicyKind {
    None,
    Dib,
    Fb,
    Dbb,
    Pbb,
    Htb,
    PerfectBf,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long, value_enum, default_value = "fb")]
    pub policy: PolicyKind,
    /// DBB distance threshold (m).
    #[arg(long)]
    pub delta: Option<f64>,
    /// PBB reflection probability.
    #[arg(long)]
    pub p: Option<f64>,
    /// HTB common target (W).
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long, default_value_t = HTB_MAX_ITER)]
    pub max_iter: usize,
    /// Pin a receiver at this distance (m) and report its power only.
    #[arg(long)]
    pub tagged: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OptTarget {
    Delta,
    P,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Settings {
    /// The threshold/probability sweep settings (sweep.tagged_*).
    Tagged,
    /// The base system settings.
    Base,
}

#[derive(Debug, Args)]
pub struct OptimizeArgs {
    #[arg(value_enum)]
    pub target: OptTarget,
    #[arg(long, value_enum, default_value = "tagged")]
    pub settings: Settings,
    /// Drop the edge receiver's own reflection probability from the p objective.
    #[arg(long)]
    pub unweighted: bool,
}

/// Fully resolved configuration, or the reason it was rejected.
pub fn resolve_config(common: &CommonArgs) -> Result<RunConfig> {
    let mut cfg = match &common.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    if let Some(trials) = common.trials {
        cfg.trials = trials;
    }
    if let Some(threads) = common.threads {
        cfg.threads = Some(threads);
    }
    if let Some(mode) = common.channel_mode {
        cfg.channel_mode = mode;
    }
    if let Some(pt) = common.pt_dbm {
        cfg.system.transmit_power_dbm = pt;
        cfg.sweep.tagged_transmit_power_dbm = pt;
    }
    if let Some(density) = common.density {
        cfg.system.density = density;
    }
    if let Some(m) = common.antennas {
        cfg.system.antennas = m;
    }
    cfg.check()?;
    Ok(cfg)
}

fn policy_from(args: &SimulateArgs) -> Result<Policy> {
    fn need(v: Option<f64>, name: &'static str) -> Result<f64> {
        v.ok_or_else(|| Error::InvalidParam {
            name,
            reason: "required by the chosen policy".into(),
        })
    }
    Ok(match args.policy {
        PolicyKind::None => Policy::None,
        PolicyKind::Dib => Policy::Dib,
        PolicyKind::Fb => Policy::Fb,
        PolicyKind::Dbb => Policy::Dbb {
            delta: need(args.delta, "delta")?,
        },
        PolicyKind::Pbb => Policy::Pbb { p: need(args.p, "p")? },
        PolicyKind::Htb => Policy::Htb {
            gamma: need(args.gamma, "gamma")?,
            max_iter: args.max_iter,
        },
        PolicyKind::PerfectBf => Policy::PerfectBf,
    })
}

#[derive(Serialize)]
struct SimulateRow {
    policy: &'static str,
    estimator: &'static str,
    mean_w: f64,
    stderr_w: f64,
    ci_low_w: f64,
    ci_high_w: f64,
    n: usize,
    trials: usize,
    empty_trials: usize,
}

#[derive(Serialize)]
struct AnalysisRow {
    pt_dbm: f64,
    density: f64,
    none_w: f64,
    dib_w: Option<f64>,
    fb_w: f64,
    perfect_bf_w: f64,
}

struct Finished {
    outputs: Vec<PathBuf>,
    estimator: String,
}

fn simulate(cfg: &RunConfig, args: &SimulateArgs, out: &Path) -> Result<Finished> {
    let policy = policy_from(args)?;
    let mut exp = ExperimentConfig::new(cfg.system.to_params()?, policy, cfg.trials, cfg.seed)
        .channel_mode(cfg.channel_mode);
    exp.tagged_er = args.tagged;
    exp.threads = cfg.threads;
    let res = run_policy_experiment(&exp)?;
    let estimator = if args.tagged.is_some() { "tagged" } else { "population" };
    let e = res.estimate;
    println!(
        "{} ({estimator}): mean {:.6e} W, stderr {:.3e} W, n {}",
        policy.label(),
        e.mean,
        e.stderr,
        e.n
    );
    let path = out.join("simulate.csv");
    write_csv(
        &path,
        &[SimulateRow {
            policy: policy.label(),
            estimator,
            mean_w: e.mean,
            stderr_w: e.stderr,
            ci_low_w: e.ci95.0,
            ci_high_w: e.ci95.1,
            n: e.n,
            trials: res.trials,
            empty_trials: res.empty_trials,
        }],
    )?;
    Ok(Finished {
        outputs: vec![path],
        estimator: estimator.into(),
    })
}

fn analyze(cfg: &RunConfig, out: &Path) -> Result<Finished> {
    let mut densities = cfg.sweep.densities.clone();
    if !densities.contains(&cfg.system.density) {
        densities.insert(0, cfg.system.density);
    }
    let mut rows = Vec::new();
    for &density in &densities {
        for &pt in &cfg.sweep.transmit_power_dbm {
            let params = cfg.system.with_density(density).with_transmit_dbm(pt).to_params()?;
            let a = Analysis::new(&params);
            let none = a.lambda_cell();
            rows.push(AnalysisRow {
                pt_dbm: pt,
                density,
                none_w: none,
                dib_w: a.q_dib().ok(),
                fb_w: a.q_fb_total()?,
                perfect_bf_w: params.m() * none,
            });
        }
    }
    let path = out.join("analysis.csv");
    write_csv(&path, &rows)?;
    println!("wrote {} rows to {}", rows.len(), path.display());
    Ok(Finished {
        outputs: vec![path],
        estimator: "analytic population mean".into(),
    })
}

fn optimize(cfg: &RunConfig, args: &OptimizeArgs, out: &Path) -> Result<Finished> {
    let system = match args.settings {
        Settings::Tagged => cfg.tagged_system(),
        Settings::Base => cfg.system.clone(),
    };
    let params = system.to_params()?;
    let opts = OptimizeOptions {
        weight_by_own_reflection: !args.unweighted,
        ..Default::default()
    };
    let (name, result) = match args.target {
        OptTarget::Delta => ("delta", delta_star(&params, &opts)?),
        OptTarget::P => ("p", p_star(&params, &opts)?),
    };
    match (args.target, result.branch) {
        (OptTarget::Delta, Some(branch)) => println!("delta* = {:.9} m (branch {branch})", result.argument),
        _ => println!("p* = {:.9}", result.argument),
    }
    println!("objective = {:.9e} W", result.objective);
    if let Some(d) = &result.diagnostic {
        eprintln!("warning: {d}");
    }
    let path = out.join(format!("optimize_{name}.json"));
    let mut text = serde_json::to_string_pretty(&result)?;
    text.push('\n');
    std::fs::write(&path, text)?;
    Ok(Finished {
        outputs: vec![path],
        estimator: "analytic".into(),
    })
}

fn execute(cli: &Cli, cfg: &RunConfig, command_line: &str) -> Result<()> {
    let out = &cli.common.out;
    std::fs::create_dir_all(out)?;
    let start = Instant::now();
    let finished = match &cli.command {
        Command::Simulate(args) => simulate(cfg, args, out)?,
        Command::Analyze => analyze(cfg, out)?,
        Command::Optimize(args) => optimize(cfg, args, out)?,
        Command::Reproduce { figure } => {
            let outputs = reproduce(*figure, cfg, out)?;
            for p in &outputs {
                println!("wrote {}", p.display());
            }
            Finished {
                outputs,
                estimator: "fig1: population mean per receiver; fig2a/fig2b: tagged receiver; fig3: per-receiver satisfaction pooled over trials".into(),
            }
        }
    };
    let mut manifest = RunManifest::new(command_line, cfg, finished.estimator);
    manifest.finish(&finished.outputs, start.elapsed().as_secs_f64())?;
    manifest.write(&out.join("manifest.json"))?;
    Ok(())
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let cfg = match resolve_config(&cli.common) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("error: invalid configuration: {e}");
            return EXIT_CONFIG;
        }
    };
    if let Command::Simulate(args) = &cli.command {
        if let Err(e) = policy_from(args) {
            eprintln!("error: invalid configuration: {e}");
            return EXIT_CONFIG;
        }
    }
    let command_line = args
        .iter()
        .skip(1)
        .map(|a| a.to_string_lossy().into_owned())
        .collect::<Vec<_>>()
        .join(" ");
    match execute(&cli, &cfg, &command_line) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_RUNTIME
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }

    #[test]
    fn flags_override_config() {
        let cli = Cli::try_parse_from(["retrobeam", "--seed", "5", "--pt-dbm", "40", "analyze"]).unwrap();
        let cfg = resolve_config(&cli.common).unwrap();
        assert_eq!(cfg.seed, 5);
        assert_eq!(cfg.system.transmit_power_dbm, 40.0);
    }

    #[test]
    fn exit_codes() {
        assert_eq!(run(["retrobeam", "--trials", "0", "analyze"]), EXIT_CONFIG);
        assert_eq!(run(["retrobeam", "bogus"]), EXIT_CONFIG);
        assert_eq!(run(["retrobeam", "simulate", "--policy", "dbb"]), EXIT_CONFIG);
    }
}
