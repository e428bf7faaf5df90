//! `astfalsify`: run falsification experiments against the reference trajectory
//! predictor and replay their records.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use astfalsify_core::baselines::RouteDatabase;
use astfalsify_core::environment::EnvConfig;
use astfalsify_core::harness::{
    derive_seed, replay, run_experiment, run_trials, write_run, Experiment, ExperimentConfig,
    SYNTHETIC_ROUTES, SYNTHETIC_ROUTES_SEED,
};
use astfalsify_core::Algorithm;
use clap::{Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "astfalsify", version, about = "Search for rare failures of a lateral trajectory predictor")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment (or several trials) and write its records.
    Run(RunArgs),
    /// Re-evaluate the episodes of a records file.
    Replay {
        #[arg(long)]
        records: PathBuf,
        /// Override the recorded defect setting.
        #[arg(long)]
        defect: Option<Switch>,
    },
    /// Write the built-in synthetic route database as JSON.
    Navdb {
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(clap::Args)]
struct RunArgs {
    #[arg(long, value_enum, default_value_t = Algo::Mcts)]
    algo: Algo,
    #[arg(long, default_value_t = 5000)]
    episodes: usize,
    #[arg(long, default_value_t = 12)]
    depth: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = Switch::On)]
    defect: Switch,
    /// Environment distribution (TOML with `mu`, `sigma`, `origin`).
    #[arg(long)]
    env: Option<PathBuf>,
    /// Route database for the navdb baseline (JSON).
    #[arg(long)]
    navdb: Option<PathBuf>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Independent repetitions run concurrently; only summaries are written.
    #[arg(long, default_value_t = 1)]
    trials: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum Algo {
    Mcts,
    Mc,
    Cem,
    Navdb,
}

impl From<Algo> for Algorithm {
    fn from(a: Algo) -> Self {
        match a {
            Algo::Mcts => Algorithm::Mcts,
            Algo::Mc => Algorithm::Mc,
            Algo::Cem => Algorithm::Cem,
            Algo::Navdb => Algorithm::Navdb,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Switch {
    On,
    Off,
}

impl Switch {
    fn enabled(self) -> bool {
        matches!(self, Switch::On)
    }
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn dispatch(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Run(args) => run(args).map(|()| ExitCode::SUCCESS),
        Command::Replay { records, defect } => {
            let report = replay(&records, defect.map(Switch::enabled))
                .with_context(|| format!("replaying {}", records.display()))?;
            for m in &report.mismatches {
                println!("mismatch {m}");
            }
            println!(
                "replayed {} episodes, {} mismatches",
                report.results.len(),
                report.mismatches.len()
            );
            Ok(if report.mismatches.is_empty() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(2)
            })
        }
        Command::Navdb { out } => {
            let origin = EnvConfig::default().environment()?.origin;
            RouteDatabase::synthetic(SYNTHETIC_ROUTES, origin, SYNTHETIC_ROUTES_SEED)
                .save(&out)
                .with_context(|| format!("writing {}", out.display()))?;
            println!("wrote {} routes to {}", SYNTHETIC_ROUTES, out.display());
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn config(args: &RunArgs) -> Result<ExperimentConfig> {
    if args.trials == 0 {
        bail!("--trials must be at least 1");
    }
    let mut cfg = ExperimentConfig::new(args.algo.into());
    cfg.episodes = args.episodes;
    cfg.depth = args.depth;
    cfg.master_seed = args.seed;
    cfg.defect.enabled = args.defect.enabled();
    if let Some(p) = &args.env {
        cfg.env = EnvConfig::load(p)?;
    }
    cfg.navdb = args.navdb.clone();
    Ok(cfg)
}

/// Direct Monte Carlo under the same configuration, for rel-log.
fn with_baseline(mut exp: Experiment, cfg: &ExperimentConfig) -> Result<(Experiment, Option<f64>)> {
    let mc = if cfg.algo == Algorithm::Mc {
        exp.records.clone()
    } else {
        let mut c = cfg.clone();
        c.algo = Algorithm::Mc;
        run_experiment(&c)?.records
    };
    let mc_mean = astfalsify_core::Metrics::from_records(&mc).mean_failure_logp;
    exp.metrics = exp.metrics.with_rel_log(&exp.records, &mc);
    Ok((exp, mc_mean))
}

fn run(args: RunArgs) -> Result<()> {
    let cfg = config(&args)?;
    fs::create_dir_all(&args.out).with_context(|| format!("creating {}", args.out.display()))?;
    if args.trials == 1 {
        let (exp, mc_mean) = with_baseline(run_experiment(&cfg)?, &cfg)?;
        write_run(&exp, &args.out)?;
        let m = &exp.metrics;
        println!(
            "{} episodes={} N_E={} i_FF={} miss={:.3}±{:.3} min_miss={:.3} failure_logp={} mc_failure_logp={} rel_log={}",
            cfg.algo,
            m.episodes,
            m.n_events,
            opt(m.first_failure),
            m.mean_miss,
            m.std_miss,
            m.min_miss,
            opt(m.mean_failure_logp),
            opt(mc_mean),
            opt(m.rel_log),
        );
        println!("wrote {}", args.out.display());
        return Ok(());
    }

    let exps = run_trials(&cfg, args.trials)?;
    let path = args.out.join("trials.csv");
    let mut w = csv::Writer::from_path(&path).with_context(|| format!("writing {}", path.display()))?;
    w.write_record(["trial", "master_seed", "n_events", "first_failure", "mean_miss", "min_miss", "mean_failure_logp"])?;
    for (t, exp) in exps.iter().enumerate() {
        let m = &exp.metrics;
        w.write_record([
            (t + 1).to_string(),
            derive_seed(cfg.master_seed, t as u64).to_string(),
            m.n_events.to_string(),
            opt(m.first_failure),
            m.mean_miss.to_string(),
            m.min_miss.to_string(),
            opt(m.mean_failure_logp),
        ])?;
    }
    w.flush()?;
    let mut n: Vec<usize> = exps.iter().map(|e| e.metrics.n_events).collect();
    n.sort_unstable();
    println!(
        "{} trials={} median N_E={} min={} max={}",
        cfg.algo,
        args.trials,
        n[n.len() / 2],
        n[0],
        n[n.len() - 1]
    );
    println!("wrote {}", path.display());
    Ok(())
}

fn opt<T: ToString>(x: Option<T>) -> String {
    x.map_or_else(|| "-".to_string(), |v| v.to_string())
}
