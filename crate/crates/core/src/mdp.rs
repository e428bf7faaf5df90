//! The AST Markov decision process: states are seed paths, actions are seeds,
//! and the SUT is only evaluated once the path reaches full depth.

use serde::{Deserialize, Serialize};

use crate::blackbox::{EvalResult, SimEnvironment, Simulation, SystemUnderTest};
use crate::environment::{Seed, SeedPath};
use crate::error::{AstError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RewardMode {
    /// Per-step log-likelihood, terminal bonus or penalty.
    Standard,
    /// Everything delivered at the end of the episode.
    Episodic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RewardConfig {
    /// R_E.
    pub event_bonus: f64,
    pub gamma: f64,
    pub mode: RewardMode,
}

impl Default for RewardConfig {
    fn default() -> Self {
        RewardConfig::episodic()
    }
}

impl RewardConfig {
    pub fn episodic() -> Self {
        RewardConfig {
            event_bonus: 100.0,
            gamma: 1.0,
            mode: RewardMode::Episodic,
        }
    }

    pub fn standard() -> Self {
        RewardConfig {
            event_bonus: 0.0,
            gamma: 1.0,
            mode: RewardMode::Standard,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.event_bonus >= 0.0) {
            return Err(AstError::InvalidConfig("event bonus must be >= 0".into()));
        }
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return Err(AstError::InvalidConfig("gamma must be in (0, 1]".into()));
        }
        Ok(())
    }

    pub fn reward(&self, logp: f64, event: bool, miss: f64, terminal: bool) -> f64 {
        match self.mode {
            RewardMode::Standard => reward_standard(logp, event, miss, terminal, self),
            RewardMode::Episodic => reward_episodic(logp, event, miss, terminal, self),
        }
    }

    pub fn terminal_reward(&self, r: &EvalResult) -> f64 {
        self.reward(r.logp, r.event, r.miss, true)
    }

    /// Reward of a non-terminal step whose action has log-likelihood `step_logp`.
    pub fn step_reward(&self, step_logp: f64) -> f64 {
        self.reward(step_logp, false, 0.0, false)
    }

    /// Discounted return of a whole episode, given every step's log-likelihood
    /// and the terminal evaluation.
    pub fn episode_return(&self, step_logps: &[f64], eval: &EvalResult) -> f64 {
        let n = step_logps.len();
        let mut total = 0.0;
        let mut discount = 1.0;
        for &lp in step_logps.iter().take(n.saturating_sub(1)) {
            total += discount * self.step_reward(lp);
            discount *= self.gamma;
        }
        total + discount * self.terminal_reward(eval)
    }
}

/// R_E if τ∧e; −d if τ∧¬e; log p otherwise.
pub fn reward_standard(logp: f64, event: bool, miss: f64, terminal: bool, cfg: &RewardConfig) -> f64 {
    match (terminal, event) {
        (true, true) => cfg.event_bonus,
        (true, false) => -miss,
        (false, _) => logp,
    }
}

/// (log p − d)·R_E if τ∧e; log p − d if τ∧¬e; 0 otherwise.
pub fn reward_episodic(logp: f64, event: bool, miss: f64, terminal: bool, cfg: &RewardConfig) -> f64 {
    match (terminal, event) {
        (true, true) => (logp - miss) * cfg.event_bonus,
        (true, false) => logp - miss,
        (false, _) => 0.0,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AstState {
    pub path: SeedPath,
}

impl AstState {
    pub fn new(path: SeedPath) -> Self {
        AstState { path }
    }

    pub fn depth(&self) -> usize {
        self.path.len()
    }

    pub fn seeds(&self) -> &[Seed] {
        &self.path.seeds
    }
}

/// Outcome of taking one action.
#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub state: AstState,
    pub reward: f64,
    /// Set when the action completed the episode.
    pub eval: Option<EvalResult>,
}

pub struct AstMdp<E, S> {
    pub sim: Simulation<E, S>,
    pub reward: RewardConfig,
}

impl<E, S> AstMdp<E, S>
where
    E: SimEnvironment,
    S: SystemUnderTest<Input = E::Input>,
{
    pub fn new(sim: Simulation<E, S>, reward: RewardConfig) -> Result<Self> {
        reward.validate()?;
        Ok(AstMdp { sim, reward })
    }

    pub fn d_max(&self) -> usize {
        self.sim.d_max()
    }

    pub fn root(&self) -> AstState {
        AstState::new(self.sim.env.root())
    }

    pub fn is_terminal(&self, state: &AstState) -> bool {
        state.depth() >= self.d_max()
    }

    /// Append a seed. No SUT evaluation.
    pub fn step(&self, state: &AstState, seed: Seed) -> Result<AstState> {
        if state.depth() >= self.d_max() {
            return Err(AstError::DepthExceeded(self.d_max()));
        }
        Ok(AstState::new(state.path.pushed(seed)))
    }

    pub fn evaluate_terminal(&mut self, state: &AstState) -> Result<EvalResult> {
        if state.depth() != self.d_max() {
            return Err(AstError::InvalidConfig(format!(
                "terminal evaluation at depth {} (expected {})",
                state.depth(),
                self.d_max()
            )));
        }
        self.sim.initialize();
        self.sim.evaluate(&state.path)
    }

    /// Step, and evaluate the SUT when the new state is terminal.
    pub fn transition(&mut self, state: &AstState, seed: Seed) -> Result<Transition> {
        let next = self.step(state, seed)?;
        if self.is_terminal(&next) {
            let eval = self.evaluate_terminal(&next)?;
            Ok(Transition {
                reward: self.reward.terminal_reward(&eval),
                state: next,
                eval: Some(eval),
            })
        } else {
            let reward = match self.reward.mode {
                RewardMode::Episodic => 0.0,
                RewardMode::Standard => self
                    .reward
                    .step_reward(self.sim.env.step_log_likelihood(seed)),
            };
            Ok(Transition {
                state: next,
                reward,
                eval: None,
            })
        }
    }

    /// Step-by-step log-likelihoods of a path (for returns computed outside a rollout).
    pub fn step_log_likelihoods(&self, seeds: &[Seed]) -> Vec<f64> {
        seeds
            .iter()
            .map(|&s| self.sim.env.step_log_likelihood(s))
            .collect()
    }
}
