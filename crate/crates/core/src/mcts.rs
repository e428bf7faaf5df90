//! Monte Carlo tree search with progressive widening over seed actions.
//!
//! Modifications for the episodic setting:
//!
//! - every action has exactly one cached successor state;
//! - the SUT is evaluated only when a path reaches full depth, whether that
//!   happens inside the tree or at the end of a rollout;
//! - rollouts replay the best-known action at remaining depth `⌊d_max/2⌋`.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::blackbox::{EpisodeRecord, EvalResult, SimEnvironment, SystemUnderTest};
use crate::environment::Seed;
use crate::error::{AstError, Result};
use crate::mdp::{AstMdp, AstState, Transition};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    pub episodes: usize,
    pub d_max: usize,
    pub exploration_c: f64,
    pub pw_k: f64,
    pub pw_alpha: f64,
    pub gamma: f64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            episodes: 5000,
            d_max: 12,
            exploration_c: 10.0,
            pw_k: 10.0,
            pw_alpha: 0.3,
            gamma: 1.0,
        }
    }
}

impl SearchConfig {
    pub fn validate(&self) -> Result<()> {
        if self.episodes == 0 {
            return Err(AstError::InvalidConfig("episodes must be positive".into()));
        }
        if self.d_max == 0 {
            return Err(AstError::InvalidConfig("d_max must be positive".into()));
        }
        if !(self.pw_alpha > 0.0 && self.pw_alpha < 1.0) {
            return Err(AstError::InvalidConfig("pw_alpha must be in (0, 1)".into()));
        }
        if !(self.pw_k >= 1.0) {
            return Err(AstError::InvalidConfig("pw_k must be >= 1".into()));
        }
        if !(self.exploration_c >= 0.0) {
            return Err(AstError::InvalidConfig("exploration_c must be >= 0".into()));
        }
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return Err(AstError::InvalidConfig("gamma must be in (0, 1]".into()));
        }
        Ok(())
    }
}

pub type NodeId = usize;

#[derive(Debug, Clone, PartialEq)]
pub struct CachedStep {
    pub state: AstState,
    pub reward: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ActionNode {
    pub visits: u64,
    pub q: f64,
    pub cached: Option<CachedStep>,
    /// Tree node of the cached successor, once it has been added.
    pub child: Option<NodeId>,
}

impl ActionNode {
    /// Incremental mean backup.
    pub fn update(&mut self, q: f64) {
        self.visits += 1;
        self.q += (q - self.q) / self.visits as f64;
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct StateNode {
    pub visits: u64,
    pub children: BTreeMap<Seed, ActionNode>,
}

/// k·N^α.
pub fn widening_bound(k: f64, alpha: f64, visits: u64) -> f64 {
    k * (visits as f64).powf(alpha)
}

/// Q + c·sqrt(ln N(s) / N(s,a)); unvisited actions score +∞.
pub fn ucb_score(q: f64, n_s: u64, n_sa: u64, c: f64) -> f64 {
    if n_sa == 0 {
        return f64::INFINITY;
    }
    q + c * ((n_s as f64).ln() / n_sa as f64).sqrt()
}

/// Argmax of the UCB score; ties go to the lowest seed.
pub fn ucb_argmax(node: &StateNode, c: f64) -> Option<Seed> {
    let mut best: Option<(Seed, f64)> = None;
    for (&seed, a) in &node.children {
        let score = ucb_score(a.q, node.visits, a.visits, c);
        if best.is_none_or(|(_, b)| score > b) {
            best = Some((seed, score));
        }
    }
    best.map(|(s, _)| s)
}

/// Best seed and its return for each absolute depth index.
#[derive(Debug, Clone, PartialEq)]
pub struct BestActionStore {
    slots: Vec<Option<(Seed, f64)>>,
}

impl BestActionStore {
    pub fn new(d_max: usize) -> Self {
        BestActionStore {
            slots: vec![None; d_max],
        }
    }

    pub fn get(&self, depth: usize) -> Option<(Seed, f64)> {
        self.slots.get(depth).copied().flatten()
    }

    /// Keep, per depth, the seed of the highest-return episode seen.
    pub fn update(&mut self, seeds: &[Seed], ret: f64) {
        for (slot, &seed) in self.slots.iter_mut().zip(seeds) {
            if slot.is_none_or(|(_, r)| ret > r) {
                *slot = Some((seed, ret));
            }
        }
    }
}

pub fn update_best_action(store: &mut BestActionStore, episode: &EpisodeRecord) {
    store.update(&episode.seeds, episode.reward);
}

#[derive(Debug, Clone)]
pub struct SearchOutcome {
    /// argmax over root actions of Q.
    pub best_action: Option<Seed>,
    pub records: Vec<EpisodeRecord>,
}

/// One search instance: tree, best-action store and master generator.
pub struct Mcts<'a, E, S> {
    mdp: &'a mut AstMdp<E, S>,
    cfg: SearchConfig,
    rng: ChaCha8Rng,
    nodes: Vec<StateNode>,
    root: Option<NodeId>,
    store: BestActionStore,
    feed_replays: u64,
    pending: Option<(AstState, EvalResult)>,
    episodes_done: usize,
}

impl<'a, E, S> Mcts<'a, E, S>
where
    E: SimEnvironment,
    S: SystemUnderTest<Input = E::Input>,
{
    pub fn new(mdp: &'a mut AstMdp<E, S>, cfg: SearchConfig, master_seed: u64) -> Result<Self> {
        Mcts::with_rng(mdp, cfg, ChaCha8Rng::seed_from_u64(master_seed))
    }

    /// Use an existing generator for fresh action seeds.
    pub fn with_rng(mdp: &'a mut AstMdp<E, S>, cfg: SearchConfig, rng: ChaCha8Rng) -> Result<Self> {
        cfg.validate()?;
        if cfg.d_max != mdp.d_max() {
            return Err(AstError::InvalidConfig(format!(
                "search depth {} does not match simulation depth {}",
                cfg.d_max,
                mdp.d_max()
            )));
        }
        Ok(Mcts {
            mdp,
            cfg,
            rng,
            nodes: Vec::new(),
            root: None,
            store: BestActionStore::new(cfg.d_max),
            feed_replays: 0,
            pending: None,
            episodes_done: 0,
        })
    }

    pub fn nodes(&self) -> &[StateNode] {
        &self.nodes
    }

    pub fn root_node(&self) -> Option<&StateNode> {
        self.root.map(|id| &self.nodes[id])
    }

    pub fn store(&self) -> &BestActionStore {
        &self.store
    }

    /// How many rollouts replayed the stored best action.
    pub fn feed_replays(&self) -> u64 {
        self.feed_replays
    }

    /// Run `cfg.episodes` episodes, collecting one record per SUT evaluation.
    pub fn search(&mut self) -> Result<SearchOutcome> {
        let mut records = Vec::with_capacity(self.cfg.episodes);
        self.run(&mut |r| records.push(r))?;
        Ok(SearchOutcome {
            best_action: self.best_root_action(),
            records,
        })
    }

    /// Like [`Mcts::search`] but streams records to a sink.
    pub fn run(&mut self, sink: &mut dyn FnMut(EpisodeRecord)) -> Result<()> {
        for _ in 0..self.cfg.episodes {
            let rec = self.episode()?;
            sink(rec);
        }
        Ok(())
    }

    pub fn best_root_action(&self) -> Option<Seed> {
        let root = self.root_node()?;
        let mut best: Option<(Seed, f64)> = None;
        for (&seed, a) in &root.children {
            if best.is_none_or(|(_, q)| a.q > q) {
                best = Some((seed, a.q));
            }
        }
        best.map(|(s, _)| s)
    }

    fn episode(&mut self) -> Result<EpisodeRecord> {
        let s0 = self.mdp.root();
        let d = self.cfg.d_max;
        self.pending = None;
        let ret = match self.root {
            None => {
                self.root = Some(self.new_node());
                self.rollout(s0, d)?
            }
            Some(id) => self.simulate(id, &s0, d)?,
        };
        let (state, eval) = self
            .pending
            .take()
            .expect("every episode ends in a terminal evaluation");
        self.episodes_done += 1;
        let rec = EpisodeRecord {
            index: self.episodes_done,
            seeds: state.path.seeds,
            logp: Some(eval.logp),
            miss: eval.miss,
            event: eval.event,
            reward: ret,
        };
        update_best_action(&mut self.store, &rec);
        Ok(rec)
    }

    fn new_node(&mut self) -> NodeId {
        self.nodes.push(StateNode::default());
        self.nodes.len() - 1
    }

    /// Simulate from a state already in the tree.
    fn simulate(&mut self, id: NodeId, state: &AstState, d: usize) -> Result<f64> {
        if d == 0 {
            return Ok(0.0);
        }
        self.nodes[id].visits += 1;
        let a = self.select_action(id);
        let (next, r) = self.deterministic_step(id, a, state)?;
        let q = if d == 1 {
            r
        } else {
            match self.nodes[id].children[&a].child {
                Some(c) => r + self.cfg.gamma * self.simulate(c, &next, d - 1)?,
                None => {
                    let c = self.new_node();
                    self.child_mut(id, a).child = Some(c);
                    r + self.cfg.gamma * self.rollout(next, d - 1)?
                }
            }
        };
        self.child_mut(id, a).update(q);
        Ok(q)
    }

    fn child_mut(&mut self, id: NodeId, a: Seed) -> &mut ActionNode {
        self.nodes[id]
            .children
            .get_mut(&a)
            .expect("selected action exists")
    }

    /// Widen with a fresh seed while |A(s)| ≤ k·N(s)^α, otherwise UCB.
    fn select_action(&mut self, id: NodeId) -> Seed {
        let node = &self.nodes[id];
        let bound = widening_bound(self.cfg.pw_k, self.cfg.pw_alpha, node.visits);
        if (node.children.len() as f64) <= bound {
            let seed = loop {
                let s: Seed = self.rng.random();
                if !node.children.contains_key(&s) {
                    break s;
                }
            };
            self.nodes[id].children.insert(seed, ActionNode::default());
            seed
        } else {
            ucb_argmax(node, self.cfg.exploration_c).expect("node has children")
        }
    }

    /// Generate (s', r) once and cache it. Terminal transitions still run the
    /// SUT on every call so each episode costs exactly one evaluation.
    fn deterministic_step(&mut self, id: NodeId, a: Seed, parent: &AstState) -> Result<(AstState, f64)> {
        let cached = self.nodes[id].children[&a].cached.clone();
        match cached {
            Some(c) if !self.mdp.is_terminal(&c.state) => Ok((c.state, c.reward)),
            Some(c) => {
                let t = self.take(parent, a)?;
                debug_assert_eq!(t.state, c.state);
                Ok((c.state, c.reward))
            }
            None => {
                let t = self.take(parent, a)?;
                self.child_mut(id, a).cached = Some(CachedStep {
                    state: t.state.clone(),
                    reward: t.reward,
                });
                Ok((t.state, t.reward))
            }
        }
    }

    fn rollout(&mut self, mut state: AstState, d: usize) -> Result<f64> {
        let feed_depth = self.cfg.d_max / 2;
        let mut total = 0.0;
        let mut discount = 1.0;
        for remaining in (1..=d).rev() {
            let stored = (remaining == feed_depth)
                .then(|| self.store.get(state.depth()))
                .flatten();
            let a = match stored {
                Some((seed, _)) => {
                    self.feed_replays += 1;
                    seed
                }
                None => self.rng.random(),
            };
            let t = self.take(&state, a)?;
            total += discount * t.reward;
            discount *= self.cfg.gamma;
            state = t.state;
        }
        Ok(total)
    }

    fn take(&mut self, state: &AstState, a: Seed) -> Result<Transition> {
        let t = self.mdp.transition(state, a)?;
        if let Some(eval) = t.eval {
            self.pending = Some((t.state.clone(), eval));
        }
        Ok(t)
    }
}

/// Convenience wrapper: build a search and run it.
pub fn search<E, S>(
    mdp: &mut AstMdp<E, S>,
    cfg: SearchConfig,
    master_seed: u64,
) -> Result<SearchOutcome>
where
    E: SimEnvironment,
    S: SystemUnderTest<Input = E::Input>,
{
    Mcts::new(mdp, cfg, master_seed)?.search()
}
