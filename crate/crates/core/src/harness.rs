//! Experiment orchestration: run an algorithm under a shared evaluation
//! budget, summarize the episodes, export CSV and plot series, and replay
//! exported runs.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use crate::blackbox::EpisodeRecord;
use crate::baselines::{
    cem_search, direct_monte_carlo, evaluate_route, evaluate_under_proposal, navdb_sample,
    CemConfig, ReferenceMdp, RouteDatabase,
};
use crate::blackbox::{EvalResult, Simulation};
use crate::environment::{EnvConfig, EnvDistribution, Seed, SeedPath};
use crate::error::{AstError, Result};
use crate::mcts::{Mcts, SearchConfig};
use crate::mdp::{AstMdp, RewardConfig};
use crate::trajectory::{DefectConfig, TrajectoryPredictor};

/// Number of routes in the built-in synthetic route database.
pub const SYNTHETIC_ROUTES: usize = 200;
/// Generator seed of the built-in synthetic route database.
pub const SYNTHETIC_ROUTES_SEED: u64 = 2020;
/// Histogram resolution of the plot exports.
pub const HISTOGRAM_BINS: usize = 50;

pub const RECORDS_FILE: &str = "records.csv";
pub const MANIFEST_FILE: &str = "manifest.json";
pub const METRICS_FILE: &str = "metrics.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Mcts,
    Mc,
    Cem,
    Navdb,
}

impl Algorithm {
    pub const ALL: [Algorithm; 4] = [Algorithm::Mcts, Algorithm::Mc, Algorithm::Cem, Algorithm::Navdb];

    pub fn as_str(self) -> &'static str {
        match self {
            Algorithm::Mcts => "mcts",
            Algorithm::Mc => "mc",
            Algorithm::Cem => "cem",
            Algorithm::Navdb => "navdb",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Algorithm {
    type Err = AstError;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| AstError::InvalidConfig(format!("unknown algorithm '{s}'")))
    }
}

// ---------------------------------------------------------------------------
// Configuration

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub algo: Algorithm,
    pub episodes: usize,
    pub depth: usize,
    pub master_seed: u64,
    pub defect: DefectConfig,
    pub env: EnvConfig,
    pub reward: RewardConfig,
    pub exploration_c: f64,
    pub pw_k: f64,
    pub pw_alpha: f64,
    /// Overrides the budget-derived CEM settings.
    pub cem: Option<CemConfig>,
    /// Route database file; the built-in synthetic database when absent.
    pub navdb: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn new(algo: Algorithm) -> Self {
        let s = SearchConfig::default();
        ExperimentConfig {
            algo,
            episodes: s.episodes,
            depth: s.d_max,
            master_seed: 0,
            defect: DefectConfig::default(),
            env: EnvConfig::default(),
            reward: RewardConfig::episodic(),
            exploration_c: s.exploration_c,
            pw_k: s.pw_k,
            pw_alpha: s.pw_alpha,
            cem: None,
            navdb: None,
        }
    }

    pub fn search_config(&self) -> SearchConfig {
        SearchConfig {
            episodes: self.episodes,
            d_max: self.depth,
            exploration_c: self.exploration_c,
            pw_k: self.pw_k,
            pw_alpha: self.pw_alpha,
            gamma: self.reward.gamma,
        }
    }

    pub fn cem_config(&self) -> CemConfig {
        self.cem.unwrap_or_else(|| CemConfig::for_budget(self.episodes))
    }

    pub fn build_mdp(&self) -> Result<ReferenceMdp> {
        self.defect.validate()?;
        let env = self.env.environment()?;
        let sim = Simulation::new(env, TrajectoryPredictor::new(self.defect), self.depth)?;
        AstMdp::new(sim, self.reward)
    }

    pub fn route_database(&self) -> Result<RouteDatabase> {
        match &self.navdb {
            Some(p) => RouteDatabase::load(p),
            None => Ok(RouteDatabase::synthetic(
                SYNTHETIC_ROUTES,
                self.env.environment()?.origin,
                SYNTHETIC_ROUTES_SEED,
            )),
        }
    }
}

/// Everything needed to replay a run from its records.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub config: ExperimentConfig,
    /// Proposal used by each CEM iteration.
    #[serde(default)]
    pub cem_population: Option<usize>,
    #[serde(default)]
    pub cem_proposals: Vec<EnvDistribution>,
}

#[derive(Debug, Clone)]
pub struct Experiment {
    pub records: Vec<EpisodeRecord>,
    pub metrics: Metrics,
    pub evaluations: u64,
    pub manifest: Manifest,
    /// Mean miss of each CEM iteration.
    pub cem_iteration_mean_miss: Vec<f64>,
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Experiment> {
    let mut mdp = cfg.build_mdp()?;
    let mut manifest = Manifest {
        config: cfg.clone(),
        cem_population: None,
        cem_proposals: Vec::new(),
    };
    let mut cem_means = Vec::new();
    let mut rng = algorithm_rng(cfg.master_seed, cfg.algo);
    let records = match cfg.algo {
        Algorithm::Mcts => Mcts::with_rng(&mut mdp, cfg.search_config(), rng)?
            .search()?
            .records,
        Algorithm::Mc => direct_monte_carlo(&mut mdp, cfg.episodes, &mut rng)?,
        Algorithm::Cem => {
            let cem = cfg.cem_config();
            let out = cem_search(&mut mdp, &cem, &mut rng)?;
            manifest.cem_population = Some(cem.population);
            manifest.cem_proposals = out.proposals;
            cem_means = out.iteration_mean_miss;
            out.records
        }
        Algorithm::Navdb => {
            let db = cfg.route_database()?;
            navdb_sample(&db, cfg.episodes, &mut mdp, &mut rng)?
        }
    };
    Ok(Experiment {
        metrics: Metrics::from_records(&records),
        evaluations: mdp.sim.evaluations(),
        records,
        manifest,
        cem_iteration_mean_miss: cem_means,
    })
}

/// The generator an algorithm draws its action seeds from: the master seed
/// selects the key, the algorithm selects one of its independent streams.
pub fn algorithm_rng(master_seed: u64, algo: Algorithm) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(algo as u64);
    rng
}

/// Independent master seed for trial `trial` (splitmix64 of the pair).
pub fn derive_seed(master: u64, trial: u64) -> u64 {
    let mut z = master
        .wrapping_add(0x9E37_79B9_7F4A_7C15u64.wrapping_mul(trial.wrapping_add(1)));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Run `trials` repetitions concurrently, each with a derived master seed.
pub fn run_trials(cfg: &ExperimentConfig, trials: usize) -> Result<Vec<Experiment>> {
    std::thread::scope(|scope| {
        let handles: Vec<_> = (0..trials)
            .map(|t| {
                let mut c = cfg.clone();
                c.master_seed = derive_seed(cfg.master_seed, t as u64);
                scope.spawn(move || run_experiment(&c))
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("trial thread panicked"))
            .collect()
    })
}

// ---------------------------------------------------------------------------
// Metrics

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub episodes: usize,
    /// N_E.
    pub n_events: usize,
    /// i_FF, 1-based.
    pub first_failure: Option<usize>,
    pub mean_miss: f64,
    pub std_miss: f64,
    pub min_miss: f64,
    /// Mean log-likelihood of the failures that carry one.
    pub mean_failure_logp: Option<f64>,
    pub rel_log: Option<f64>,
}

impl Metrics {
    pub fn from_records(records: &[EpisodeRecord]) -> Self {
        let n = records.len();
        let misses: Vec<f64> = records.iter().map(|r| r.miss).collect();
        let mean = if n == 0 { f64::NAN } else { misses.iter().sum::<f64>() / n as f64 };
        let std = if n < 2 {
            0.0
        } else {
            (misses.iter().map(|m| (m - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
        };
        let failure_logps = failure_logps(records);
        Metrics {
            episodes: n,
            n_events: records.iter().filter(|r| r.event).count(),
            first_failure: records.iter().find(|r| r.event).map(|r| r.index),
            mean_miss: mean,
            std_miss: std,
            min_miss: misses.iter().copied().fold(f64::INFINITY, f64::min),
            mean_failure_logp: mean_of(&failure_logps),
            rel_log: None,
        }
    }

    /// Attach rel-log against a direct Monte Carlo run.
    pub fn with_rel_log(mut self, alg: &[EpisodeRecord], mc: &[EpisodeRecord]) -> Self {
        self.rel_log = rel_log(&failure_logps(alg), &failure_logps(mc));
        self
    }
}

pub fn failure_logps(records: &[EpisodeRecord]) -> Vec<f64> {
    records
        .iter()
        .filter(|r| r.event)
        .filter_map(|r| r.logp)
        .collect()
}

fn mean_of(xs: &[f64]) -> Option<f64> {
    (!xs.is_empty()).then(|| xs.iter().sum::<f64>() / xs.len() as f64)
}

/// mean(alg) / mean(mc); absent if either is empty or the MC mean is zero.
pub fn rel_log(failure_logps_alg: &[f64], failure_logps_mc: &[f64]) -> Option<f64> {
    let a = mean_of(failure_logps_alg)?;
    let m = mean_of(failure_logps_mc)?;
    (m != 0.0).then(|| a / m)
}

// ---------------------------------------------------------------------------
// CSV export

const HEADER: [&str; 6] = ["episode", "event", "miss", "logp", "reward", "seeds"];

pub fn fmt_float(x: f64) -> String {
    format!("{x:.8e}")
}

fn record_row(r: &EpisodeRecord) -> [String; 6] {
    [
        r.index.to_string(),
        u8::from(r.event).to_string(),
        fmt_float(r.miss),
        r.logp.map(fmt_float).unwrap_or_default(),
        fmt_float(r.reward),
        r.seeds
            .iter()
            .map(|s| s.to_string())
            .collect::<Vec<_>>()
            .join(";"),
    ]
}

pub fn export_records(records: &[EpisodeRecord], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let io = |e: csv::Error| AstError::parse(path, e);
    let mut w = csv::Writer::from_path(path).map_err(io)?;
    w.write_record(HEADER).map_err(io)?;
    for r in records {
        w.write_record(record_row(r)).map_err(io)?;
    }
    w.flush().map_err(|e| AstError::io(path, e))
}

pub fn import_records(path: impl AsRef<Path>) -> Result<Vec<EpisodeRecord>> {
    let path = path.as_ref();
    let mut rdr = csv::Reader::from_path(path).map_err(|e| AstError::parse(path, e))?;
    let header = rdr.headers().map_err(|e| AstError::parse(path, e))?.clone();
    if header.iter().ne(HEADER) {
        return Err(AstError::parse(path, format!("unexpected header {header:?}")));
    }
    let mut out = Vec::new();
    for (line, row) in rdr.records().enumerate() {
        let row = row.map_err(|e| AstError::parse(path, e))?;
        let bad = |what: &str| AstError::parse(path, format!("row {}: bad {what}", line + 2));
        let float = |i: usize, what: &str| row[i].parse::<f64>().map_err(|_| bad(what));
        let seeds = if row[5].is_empty() {
            Vec::new()
        } else {
            row[5]
                .split(';')
                .map(|s| s.parse::<Seed>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| bad("seeds"))?
        };
        out.push(EpisodeRecord {
            index: row[0].parse().map_err(|_| bad("episode"))?,
            event: match &row[1] {
                "0" => false,
                "1" => true,
                _ => return Err(bad("event")),
            },
            miss: float(2, "miss")?,
            logp: if row[3].is_empty() { None } else { Some(float(3, "logp")?) },
            reward: float(4, "reward")?,
            seeds,
        });
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Plot data

#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    pub lo: f64,
    pub hi: f64,
    pub counts: Vec<usize>,
}

impl Histogram {
    /// Uniform bins spanning [min, max] of the data.
    pub fn new(values: &[f64], bins: usize) -> Self {
        let finite: Vec<f64> = values.iter().copied().filter(|v| v.is_finite()).collect();
        let mut counts = vec![0; bins];
        if finite.is_empty() || bins == 0 {
            return Histogram { lo: 0.0, hi: 0.0, counts };
        }
        let lo = finite.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = finite.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let width = (hi - lo) / bins as f64;
        for v in finite {
            let k = if width > 0.0 {
                (((v - lo) / width) as usize).min(bins - 1)
            } else {
                0
            };
            counts[k] += 1;
        }
        Histogram { lo, hi, counts }
    }

    pub fn edges(&self, k: usize) -> (f64, f64) {
        let w = (self.hi - self.lo) / self.counts.len() as f64;
        (self.lo + w * k as f64, self.lo + w * (k + 1) as f64)
    }
}

pub fn running_mean(xs: &[f64]) -> Vec<f64> {
    let mut sum = 0.0;
    xs.iter()
        .enumerate()
        .map(|(i, x)| {
            sum += x;
            sum / (i + 1) as f64
        })
        .collect()
}

pub fn running_min(xs: &[f64]) -> Vec<f64> {
    let mut m = f64::INFINITY;
    xs.iter()
        .map(|&x| {
            m = m.min(x);
            m
        })
        .collect()
}

pub fn cumulative_events(records: &[EpisodeRecord]) -> Vec<usize> {
    let mut n = 0;
    records
        .iter()
        .map(|r| {
            n += usize::from(r.event);
            n
        })
        .collect()
}

fn write_series<T: ToString>(
    path: &Path,
    records: &[EpisodeRecord],
    values: impl IntoIterator<Item = T>,
) -> Result<()> {
    let io = |e: csv::Error| AstError::parse(path, e);
    let mut w = csv::Writer::from_path(path).map_err(io)?;
    w.write_record(["episode", "value"]).map_err(io)?;
    for (r, v) in records.iter().zip(values) {
        w.write_record([r.index.to_string(), v.to_string()]).map_err(io)?;
    }
    w.flush().map_err(|e| AstError::io(path, e))
}

fn write_histogram(path: &Path, h: &Histogram) -> Result<()> {
    let io = |e: csv::Error| AstError::parse(path, e);
    let mut w = csv::Writer::from_path(path).map_err(io)?;
    w.write_record(["bin_start", "bin_end", "count"]).map_err(io)?;
    if h.counts.iter().any(|&c| c > 0) {
        for (k, c) in h.counts.iter().enumerate() {
            let (a, b) = h.edges(k);
            w.write_record([fmt_float(a), fmt_float(b), c.to_string()])
                .map_err(io)?;
        }
    }
    w.flush().map_err(|e| AstError::io(path, e))
}

/// Write running mean/min miss, cumulative events and the two histograms.
pub fn export_plot_data(records: &[EpisodeRecord], out_dir: impl AsRef<Path>) -> Result<()> {
    let dir = out_dir.as_ref();
    if records.is_empty() {
        return Err(AstError::InvalidConfig("no records to plot".into()));
    }
    fs::create_dir_all(dir).map_err(|e| AstError::io(dir, e))?;
    let misses: Vec<f64> = records.iter().map(|r| r.miss).collect();
    write_series(
        &dir.join("running_mean_miss.csv"),
        records,
        running_mean(&misses).into_iter().map(fmt_float),
    )?;
    write_series(
        &dir.join("running_min_miss.csv"),
        records,
        running_min(&misses).into_iter().map(fmt_float),
    )?;
    write_series(&dir.join("cumulative_events.csv"), records, cumulative_events(records))?;
    let neg: Vec<f64> = misses.iter().map(|m| -m).collect();
    write_histogram(&dir.join("hist_neg_miss.csv"), &Histogram::new(&neg, HISTOGRAM_BINS))?;
    write_histogram(
        &dir.join("hist_failure_logp.csv"),
        &Histogram::new(&failure_logps(records), HISTOGRAM_BINS),
    )?;
    Ok(())
}

/// Write records, manifest, metrics and plot series into `out_dir`.
pub fn write_run(exp: &Experiment, out_dir: impl AsRef<Path>) -> Result<()> {
    let dir = out_dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| AstError::io(dir, e))?;
    export_records(&exp.records, dir.join(RECORDS_FILE))?;
    write_json(&dir.join(MANIFEST_FILE), &exp.manifest)?;
    write_json(&dir.join(METRICS_FILE), &exp.metrics)?;
    if !exp.records.is_empty() {
        export_plot_data(&exp.records, dir.join("plots"))?;
    }
    Ok(())
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| AstError::parse(path, e))?;
    fs::write(path, text + "\n").map_err(|e| AstError::io(path, e))
}

pub fn read_manifest(path: impl AsRef<Path>) -> Result<Manifest> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| AstError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| AstError::parse(path, e))
}

// ---------------------------------------------------------------------------
// Replay

#[derive(Debug, Clone, PartialEq)]
pub struct Mismatch {
    pub index: usize,
    pub recorded_miss: f64,
    pub replayed_miss: f64,
    pub recorded_event: bool,
    pub replayed_event: bool,
}

impl fmt::Display for Mismatch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "episode {}: recorded miss {} event {}, replayed miss {} event {}",
            self.index,
            fmt_float(self.recorded_miss),
            self.recorded_event,
            fmt_float(self.replayed_miss),
            self.replayed_event
        )
    }
}

#[derive(Debug, Clone)]
pub struct ReplayReport {
    pub results: Vec<(usize, EvalResult)>,
    pub mismatches: Vec<Mismatch>,
}

/// Re-evaluate every recorded episode under the manifest's configuration,
/// optionally with the defect switched. Miss values are compared at the
/// precision they were exported with.
pub fn replay_records(
    records: &[EpisodeRecord],
    manifest: &Manifest,
    defect_enabled: Option<bool>,
) -> Result<ReplayReport> {
    let mut cfg = manifest.config.clone();
    if let Some(on) = defect_enabled {
        cfg.defect.enabled = on;
    }
    let mut mdp = cfg.build_mdp()?;
    let db = match cfg.algo {
        Algorithm::Navdb => Some(cfg.route_database()?),
        _ => None,
    };
    let mut results = Vec::with_capacity(records.len());
    let mut mismatches = Vec::new();
    for r in records {
        let eval = match cfg.algo {
            Algorithm::Mcts | Algorithm::Mc => {
                let path = SeedPath::from_seeds(mdp.sim.env.origin, r.seeds.clone());
                mdp.sim.initialize();
                mdp.sim.evaluate(&path)?
            }
            Algorithm::Cem => {
                let pop = manifest.cem_population.ok_or_else(|| {
                    AstError::InvalidConfig("manifest lacks the CEM population".into())
                })?;
                let proposal = manifest
                    .cem_proposals
                    .get((r.index.max(1) - 1) / pop)
                    .ok_or_else(|| {
                        AstError::InvalidConfig(format!("no CEM proposal for episode {}", r.index))
                    })?;
                evaluate_under_proposal(&mut mdp, &r.seeds, proposal)?.1
            }
            Algorithm::Navdb => {
                let db = db.as_ref().expect("loaded above");
                let route = r
                    .seeds
                    .first()
                    .and_then(|&k| db.routes.get(k as usize))
                    .ok_or_else(|| {
                        AstError::InvalidConfig(format!("episode {}: unknown route", r.index))
                    })?;
                evaluate_route(&mut mdp, &route.plan()?)?
            }
        };
        if eval.event != r.event || fmt_float(eval.miss) != fmt_float(r.miss) {
            mismatches.push(Mismatch {
                index: r.index,
                recorded_miss: r.miss,
                replayed_miss: eval.miss,
                recorded_event: r.event,
                replayed_event: eval.event,
            });
        }
        results.push((r.index, eval));
    }
    Ok(ReplayReport { results, mismatches })
}

/// Replay a `records.csv` using the manifest stored next to it.
pub fn replay(records_csv: impl AsRef<Path>, defect_enabled: Option<bool>) -> Result<ReplayReport> {
    let path = records_csv.as_ref();
    let manifest_path = path
        .parent()
        .unwrap_or_else(|| Path::new("."))
        .join(MANIFEST_FILE);
    let manifest = read_manifest(&manifest_path)?;
    let records = import_records(path)?;
    replay_records(&records, &manifest, defect_enabled)
}
