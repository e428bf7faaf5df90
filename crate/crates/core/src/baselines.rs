//! Baseline falsifiers: direct Monte Carlo, the cross-entropy method with
//! likelihood-ratio reweighting, and uniform sampling of a route database.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::blackbox::{EpisodeRecord, SimEnvironment, SystemUnderTest};
use crate::environment::{
    disturbances_log_likelihood, plan_from_disturbances, sample_disturbance, Disturbance,
    EnvDistribution, FlightEnvironment, Seed,
};
use crate::error::{AstError, Result};
use crate::geometry::Point;
use crate::mdp::AstMdp;
use crate::trajectory::{FlightPlan, TrajectoryPredictor};

pub type ReferenceMdp = AstMdp<FlightEnvironment, TrajectoryPredictor>;

// ---------------------------------------------------------------------------
// Direct Monte Carlo

/// `n` independent uniform-seed rollouts to full depth, no action feeding.
pub fn direct_monte_carlo<E, S>(
    mdp: &mut AstMdp<E, S>,
    n: usize,
    rng: &mut impl Rng,
) -> Result<Vec<EpisodeRecord>>
where
    E: SimEnvironment,
    S: SystemUnderTest<Input = E::Input>,
{
    let gamma = mdp.reward.gamma;
    let mut records = Vec::with_capacity(n);
    for i in 0..n {
        let mut state = mdp.root();
        let mut total = 0.0;
        let mut discount = 1.0;
        let mut last = None;
        while !mdp.is_terminal(&state) {
            let t = mdp.transition(&state, rng.random())?;
            total += discount * t.reward;
            discount *= gamma;
            last = t.eval;
            state = t.state;
        }
        let eval = last.expect("terminal transition evaluates");
        records.push(EpisodeRecord {
            index: i + 1,
            seeds: state.path.seeds,
            logp: Some(eval.logp),
            miss: eval.miss,
            event: eval.event,
            reward: total,
        });
    }
    Ok(records)
}

// ---------------------------------------------------------------------------
// Cross-entropy method

/// How elite samples are weighted when the proposal is refit.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CemRefit {
    /// Plain maximum likelihood over the elites.
    #[default]
    Elite,
    /// Each elite waypoint weighted by f(x)/g(x), true over proposal density.
    LikelihoodRatio,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CemConfig {
    pub population: usize,
    pub elite_count: usize,
    pub iterations: usize,
    /// Initial proposal.
    pub proposal: EnvDistribution,
    pub sigma_floor: f64,
    #[serde(default)]
    pub refit: CemRefit,
}

impl Default for CemConfig {
    fn default() -> Self {
        let mut proposal = EnvDistribution::default();
        proposal.mu[1] = 1.0;
        proposal.sigma[1] = 3.0;
        CemConfig {
            population: 100,
            elite_count: 10,
            iterations: 50,
            proposal,
            sigma_floor: 1e-3,
            refit: CemRefit::Elite,
        }
    }
}

impl CemConfig {
    /// Default settings spread over a total budget of `episodes`.
    pub fn for_budget(episodes: usize) -> Self {
        let base = CemConfig::default();
        let episodes = episodes.max(1);
        // Largest population not above the default that divides the budget.
        let population = (1..=base.population.min(episodes))
            .rev()
            .find(|p| episodes.is_multiple_of(*p))
            .unwrap_or(1);
        CemConfig {
            population,
            elite_count: base.elite_count.min(population),
            iterations: episodes / population,
            ..base
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.population == 0 || self.iterations == 0 {
            return Err(AstError::InvalidConfig(
                "population and iterations must be positive".into(),
            ));
        }
        if self.elite_count == 0 || self.elite_count > self.population {
            return Err(AstError::InvalidConfig(format!(
                "elite count {} must be in 1..={}",
                self.elite_count, self.population
            )));
        }
        if !(self.sigma_floor > 0.0) {
            return Err(AstError::InvalidConfig("sigma floor must be positive".into()));
        }
        self.proposal.validate()
    }
}

/// f(x)/g(x) for one raw sample.
pub fn likelihood_ratio(x: &[f64; 4], truth: &EnvDistribution, proposal: &EnvDistribution) -> f64 {
    (truth.log_density_raw(x) - proposal.log_density_raw(x)).exp()
}

#[derive(Debug, Clone)]
pub struct CemOutcome {
    pub records: Vec<EpisodeRecord>,
    /// Proposal used by each iteration.
    pub proposals: Vec<EnvDistribution>,
    pub final_proposal: EnvDistribution,
    /// Mean miss distance of each iteration's population.
    pub iteration_mean_miss: Vec<f64>,
}

/// Weighted MLE of independent normals over pooled samples. `log_weights`
/// are unnormalized; they are shifted by their maximum before use.
pub fn weighted_refit(
    samples: &[[f64; 4]],
    log_weights: &[f64],
    sigma_floor: f64,
) -> Option<EnvDistribution> {
    let max = log_weights
        .iter()
        .copied()
        .filter(|w| w.is_finite())
        .fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return None;
    }
    let w: Vec<f64> = log_weights
        .iter()
        .map(|&lw| if lw.is_finite() { (lw - max).exp() } else { 0.0 })
        .collect();
    let total: f64 = w.iter().sum();
    if !(total > 0.0) {
        return None;
    }
    let mut mu = [0.0; 4];
    let mut sigma = [0.0; 4];
    for j in 0..4 {
        mu[j] = samples.iter().zip(&w).map(|(x, wi)| wi * x[j]).sum::<f64>() / total;
        let var = samples
            .iter()
            .zip(&w)
            .map(|(x, wi)| wi * (x[j] - mu[j]).powi(2))
            .sum::<f64>()
            / total;
        sigma[j] = var.sqrt().max(sigma_floor);
    }
    Some(EnvDistribution { mu, sigma })
}

/// Realize a seed path under `proposal` and evaluate it on the reference SUT.
/// The recorded log-likelihood is under the true distribution.
pub fn evaluate_under_proposal(
    mdp: &mut ReferenceMdp,
    seeds: &[Seed],
    proposal: &EnvDistribution,
) -> Result<(Vec<Disturbance>, crate::blackbox::EvalResult, f64)> {
    let truth = mdp.sim.env.dist;
    let ws: Vec<Disturbance> = seeds.iter().map(|&s| sample_disturbance(s, proposal)).collect();
    let plan = plan_from_disturbances(mdp.sim.env.origin, &ws)?;
    let logp = disturbances_log_likelihood(&ws, &truth);
    mdp.sim.initialize();
    let eval = mdp.sim.evaluate_input(&plan, logp)?;
    let step_logps: Vec<f64> = ws.iter().map(|w| truth.log_density_raw(&w.raw)).collect();
    let reward = mdp.reward.episode_return(&step_logps, &eval);
    Ok((ws, eval, reward))
}

pub fn cem_search(mdp: &mut ReferenceMdp, cfg: &CemConfig, rng: &mut impl Rng) -> Result<CemOutcome> {
    cfg.validate()?;
    let truth = mdp.sim.env.dist;
    let depth = mdp.d_max();
    let mut proposal = cfg.proposal;
    let mut records = Vec::with_capacity(cfg.population * cfg.iterations);
    let mut proposals = Vec::with_capacity(cfg.iterations);
    let mut iteration_mean_miss = Vec::with_capacity(cfg.iterations);

    for it in 0..cfg.iterations {
        proposals.push(proposal);
        let mut batch: Vec<(f64, Vec<Disturbance>)> = Vec::with_capacity(cfg.population);
        let mut miss_sum = 0.0;
        for _ in 0..cfg.population {
            let seeds: Vec<Seed> = (0..depth).map(|_| rng.random()).collect();
            let (ws, eval, reward) = evaluate_under_proposal(mdp, &seeds, &proposal)?;
            miss_sum += eval.miss;
            records.push(EpisodeRecord {
                index: records.len() + 1,
                seeds,
                logp: Some(eval.logp),
                miss: eval.miss,
                event: eval.event,
                reward,
            });
            batch.push((eval.miss, ws));
        }
        iteration_mean_miss.push(miss_sum / cfg.population as f64);

        // Stable sort keeps sampling order among equal misses.
        let mut order: Vec<usize> = (0..batch.len()).collect();
        order.sort_by(|&a, &b| batch[a].0.total_cmp(&batch[b].0));
        let mut samples = Vec::with_capacity(cfg.elite_count * depth);
        let mut log_weights = Vec::with_capacity(cfg.elite_count * depth);
        for &i in order.iter().take(cfg.elite_count) {
            for w in &batch[i].1 {
                samples.push(w.raw);
                log_weights.push(match cfg.refit {
                    CemRefit::Elite => 0.0,
                    CemRefit::LikelihoodRatio => {
                        truth.log_density_raw(&w.raw) - proposal.log_density_raw(&w.raw)
                    }
                });
            }
        }
        proposal = weighted_refit(&samples, &log_weights, cfg.sigma_floor)
            .ok_or(AstError::ProposalCollapse(it + 1))?;
    }

    Ok(CemOutcome {
        records,
        proposals,
        final_proposal: proposal,
        iteration_mean_miss,
    })
}

// ---------------------------------------------------------------------------
// Route database

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Route {
    pub name: String,
    pub waypoints: Vec<[f64; 2]>,
}

impl Route {
    pub fn plan(&self) -> Result<FlightPlan> {
        FlightPlan::calm(self.waypoints.iter().map(|&[x, y]| Point::new(x, y)).collect())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RouteDatabase {
    pub routes: Vec<Route>,
}

impl RouteDatabase {
    pub fn validate(&self) -> Result<()> {
        if self.routes.is_empty() {
            return Err(AstError::EmptyDatabase);
        }
        for r in &self.routes {
            if r.waypoints.len() < 2 {
                return Err(AstError::InvalidConfig(format!(
                    "route '{}' has {} waypoints",
                    r.name,
                    r.waypoints.len()
                )));
            }
        }
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| AstError::io(path, e))?;
        let db: RouteDatabase =
            serde_json::from_str(&text).map_err(|e| AstError::parse(path, e))?;
        db.validate().map_err(|e| AstError::parse(path, e))?;
        Ok(db)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let text = serde_json::to_string_pretty(self).map_err(|e| AstError::parse(path, e))?;
        std::fs::write(path, text + "\n").map_err(|e| AstError::io(path, e))
    }

    /// Deterministic synthetic routes: legs in [5, 60] nmi, heading changes
    /// within ±120°, 3 to 12 legs each, starting at `origin`.
    pub fn synthetic(count: usize, origin: Point, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let routes = (0..count)
            .map(|i| {
                let legs = rng.random_range(3..=12);
                let mut heading: f64 = rng.random_range(0.0..360.0);
                let mut p = origin;
                let mut wps = vec![[p.x, p.y]];
                for leg in 0..legs {
                    if leg > 0 {
                        heading += rng.random_range(-120.0..=120.0);
                    }
                    let len = rng.random_range(5.0..=60.0);
                    p = p.displaced(heading.to_radians(), len);
                    wps.push([p.x, p.y]);
                }
                Route {
                    name: format!("R{:03}", i + 1),
                    waypoints: wps,
                }
            })
            .collect();
        RouteDatabase { routes }
    }
}

/// Evaluate `n` routes drawn uniformly with replacement. Records carry the
/// route index as their single seed and no log-likelihood.
pub fn navdb_sample(
    db: &RouteDatabase,
    n: usize,
    mdp: &mut ReferenceMdp,
    rng: &mut impl Rng,
) -> Result<Vec<EpisodeRecord>> {
    db.validate()?;
    let plans: Vec<FlightPlan> = db.routes.iter().map(Route::plan).collect::<Result<_>>()?;
    let mut records = Vec::with_capacity(n);
    for i in 0..n {
        let k = rng.random_range(0..plans.len());
        let eval = evaluate_route(mdp, &plans[k])?;
        records.push(EpisodeRecord {
            index: i + 1,
            seeds: vec![k as Seed],
            logp: None,
            miss: eval.miss,
            event: eval.event,
            reward: mdp.reward.terminal_reward(&eval),
        });
    }
    Ok(records)
}

/// Evaluate one route plan. The route is not a distribution sample, so the
/// reward sees a log-likelihood of zero.
pub fn evaluate_route(mdp: &mut ReferenceMdp, plan: &FlightPlan) -> Result<crate::blackbox::EvalResult> {
    mdp.sim.initialize();
    mdp.sim.evaluate_input(plan, 0.0)
}
