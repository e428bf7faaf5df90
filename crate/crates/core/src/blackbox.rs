//! The black-box simulation contract and the shared result types.
//!
//! A simulation pairs an environment (seed path → SUT input, plus the path's
//! log-likelihood) with a system under test that only exposes a miss distance
//! and an event flag after execution. [`Simulation`] owns the evaluation
//! counter so every search algorithm is budgeted the same way.

use serde::{Deserialize, Serialize};

use crate::environment::{
    build_flight_plan, log_density, path_log_likelihood, sample_disturbance, FlightEnvironment,
    Seed, SeedPath,
};
use crate::error::{AstError, Result};
use crate::trajectory::FlightPlan;

/// ⟨p, e, d, τ⟩ handed to the reward function.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalResult {
    /// Log-likelihood of the disturbance path (natural log).
    pub logp: f64,
    pub event: bool,
    pub miss: f64,
    pub terminal: bool,
}

/// One completed episode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeRecord {
    /// 1-based episode number.
    pub index: usize,
    pub seeds: Vec<Seed>,
    /// Absent when the episode was not a distribution sample (route database).
    pub logp: Option<f64>,
    pub miss: f64,
    pub event: bool,
    pub reward: f64,
}

/// Environment side of the contract.
pub trait SimEnvironment {
    type Input;

    /// The empty seed path every episode starts from.
    fn root(&self) -> SeedPath;

    /// Log-likelihood of the whole path.
    fn transition(&self, path: &SeedPath) -> Result<f64>;

    /// Log-likelihood contributed by a single action.
    fn step_log_likelihood(&self, seed: Seed) -> f64;

    /// Build the SUT input a path deterministically leads to.
    fn realize(&self, path: &SeedPath) -> Result<Self::Input>;
}

/// System-under-test side of the contract.
pub trait SystemUnderTest {
    type Input;

    /// Reset to the constructed state.
    fn initialize(&mut self);

    fn execute(&mut self, input: &Self::Input) -> Result<()>;

    /// Miss distance of the last execution; non-positive means event.
    fn miss_distance(&self) -> f64;

    fn is_event(&self) -> bool;
}

impl SimEnvironment for FlightEnvironment {
    type Input = FlightPlan;

    fn root(&self) -> SeedPath {
        SeedPath::new(self.origin)
    }

    fn transition(&self, path: &SeedPath) -> Result<f64> {
        path_log_likelihood(path, &self.dist)
    }

    fn step_log_likelihood(&self, seed: Seed) -> f64 {
        log_density(&sample_disturbance(seed, &self.dist), &self.dist)
    }

    fn realize(&self, path: &SeedPath) -> Result<FlightPlan> {
        build_flight_plan(path, &self.dist)
    }
}

/// Environment + SUT + evaluation counter.
#[derive(Debug, Clone)]
pub struct Simulation<E, S> {
    pub env: E,
    pub sut: S,
    d_max: usize,
    evaluations: u64,
}

impl<E, S> Simulation<E, S>
where
    E: SimEnvironment,
    S: SystemUnderTest<Input = E::Input>,
{
    pub fn new(env: E, sut: S, d_max: usize) -> Result<Self> {
        if d_max == 0 {
            return Err(AstError::InvalidConfig("maximum depth must be positive".into()));
        }
        Ok(Simulation {
            env,
            sut,
            d_max,
            evaluations: 0,
        })
    }

    pub fn d_max(&self) -> usize {
        self.d_max
    }

    /// SUT evaluations so far. Never reset.
    pub fn evaluations(&self) -> u64 {
        self.evaluations
    }

    pub fn initialize(&mut self) {
        self.sut.initialize();
    }

    pub fn is_terminal(&self, path: &SeedPath) -> bool {
        path.len() >= self.d_max
    }

    pub fn transition(&self, path: &SeedPath) -> Result<f64> {
        self.env.transition(path)
    }

    /// Run the SUT on the plan a seed path leads to. Counts one evaluation.
    pub fn evaluate(&mut self, path: &SeedPath) -> Result<EvalResult> {
        self.evaluations += 1;
        if path.is_empty() {
            return Err(AstError::EmptyPath);
        }
        let logp = self.env.transition(path)?;
        let input = self.env.realize(path)?;
        let mut r = self.run(&input, logp)?;
        r.terminal = self.is_terminal(path);
        Ok(r)
    }

    /// Run the SUT on an input built elsewhere, with its log-likelihood
    /// supplied by the caller. Counts one evaluation; always terminal.
    pub fn evaluate_input(&mut self, input: &E::Input, logp: f64) -> Result<EvalResult> {
        self.evaluations += 1;
        self.run(input, logp)
    }

    fn run(&mut self, input: &E::Input, logp: f64) -> Result<EvalResult> {
        self.sut.initialize();
        self.sut.execute(input)?;
        Ok(EvalResult {
            logp,
            event: self.sut.is_event(),
            miss: self.sut.miss_distance(),
            terminal: true,
        })
    }
}
