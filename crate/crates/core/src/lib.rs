//! Adaptive stress testing (AST) for black-box systems with episodic reward.
//!
//! The search treats the system under test as a black box driven by a
//! seeded simulation environment. Each action is a random seed; a sequence of
//! seeds deterministically reproduces a full episode, so any failure found can
//! be replayed bit-for-bit from its seed path.
//!
//! ## Layout
//!
//! - [`blackbox`]: the simulation contract and evaluation budget counter.
//! - [`environment`]: seeded Gaussian disturbances, log-likelihoods, flight plans.
//! - [`trajectory`]: the reference lateral trajectory predictor and its arc-length check.
//! - [`mdp`]: the AST Markov decision process and both reward functions.
//! - [`mcts`]: Monte Carlo tree search with progressive widening.
//! - [`baselines`]: direct Monte Carlo, cross-entropy method, route database sampling.
//! - [`harness`]: experiment orchestration, metrics, CSV export and replay.

// `!(x > 0.0)` rejects NaN along with non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod baselines;
pub mod blackbox;
pub mod environment;
pub mod error;
pub mod geometry;
pub mod harness;
pub mod mcts;
pub mod mdp;
pub mod trajectory;

pub use blackbox::{EpisodeRecord, EvalResult, SimEnvironment, Simulation, SystemUnderTest};
pub use environment::{Disturbance, EnvDistribution, FlightEnvironment, Seed, SeedPath};
pub use error::{AstError, Result};
pub use geometry::Point;
pub use harness::{Algorithm, Metrics};
pub use mdp::{AstMdp, AstState, RewardConfig, RewardMode};
pub use trajectory::{DefectConfig, FlightPlan, LateralPacket, TrajectoryPredictor};

/// The simulation used throughout the toolkit: Gaussian waypoint environment
/// driving the reference trajectory predictor.
pub type ReferenceSimulation = Simulation<FlightEnvironment, TrajectoryPredictor>;
