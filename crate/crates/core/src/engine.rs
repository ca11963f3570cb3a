//! Metropolis–Hastings chains over (hierarchical) colorations: single steps,
//! static runs and online runs over an edit stream.
//!
//! The flat proposal families run on a one-level [`HierarchyState`], so a single
//! state type serves every configuration. The chain keeps the flattened
//! modularity up to date incrementally and resynchronizes it from scratch
//! every [`RESYNC_PERIOD`] steps.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Graph, GraphEdit};
use crate::hierarchy::HierarchyState;
use crate::modularity::{delta_hier, modularity};
use crate::partition::Coloration;
use crate::proposals::{
    sample_basic, sample_hierarchical, sample_improved, DeltaMode, FrontierMode, MixtureParams, Move,
    ProposalFamily,
};

/// Steps between exact recomputations of degrees and modularity.
pub const RESYNC_PERIOD: u64 = 10_000;

/// Geometric schedule `λ_k = λ_0 γ^⌊k / period⌋`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Annealing {
    pub gamma: f64,
    pub period: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EngineConfig {
    /// Inverse temperature.
    pub lambda: f64,
    pub alpha: f64,
    /// Level weights; uniform when absent.
    pub level_weights: Option<Vec<f64>>,
    /// Hierarchy depth used by the hierarchical family. Flat families use one level.
    pub levels: usize,
    /// Static budget; `20 |E|` when absent.
    pub iterations: Option<u64>,
    /// Online budget per time step; `20 |E(t)|` when absent.
    pub budget_per_step: Option<u64>,
    pub seed: u64,
    pub proposal: ProposalFamily,
    pub delta_mode: DeltaMode,
    pub frontier_mode: FrontierMode,
    pub annealing: Option<Annealing>,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            lambda: 50.0,
            alpha: 0.5,
            level_weights: None,
            levels: 3,
            iterations: None,
            budget_per_step: None,
            seed: 0,
            proposal: ProposalFamily::Hierarchical,
            delta_mode: DeltaMode::TopLevel,
            frontier_mode: FrontierMode::Lagged,
            annealing: None,
        }
    }
}

impl EngineConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.lambda.is_finite() && self.lambda >= 0.0) {
            return Err(Error::Input(format!("lambda must be finite and non-negative, got {}", self.lambda)));
        }
        if self.levels == 0 {
            return Err(Error::Input("levels must be at least 1".into()));
        }
        if let Some(a) = self.annealing {
            if !(a.gamma.is_finite() && a.gamma > 0.0) || a.period == 0 {
                return Err(Error::Input("annealing needs gamma > 0 and period > 0".into()));
            }
        }
        self.mixture().map(|_| ())
    }

    /// Levels actually used for the configured proposal family.
    pub fn effective_levels(&self) -> usize {
        match self.proposal {
            ProposalFamily::Hierarchical => self.levels,
            _ => 1,
        }
    }

    pub fn mixture(&self) -> Result<MixtureParams> {
        let levels = self.effective_levels();
        match (&self.level_weights, self.proposal) {
            (Some(w), ProposalFamily::Hierarchical) => MixtureParams::new(self.alpha, w.clone()),
            _ => MixtureParams::uniform(self.alpha, levels),
        }
    }

    fn lambda_at(&self, k: u64) -> f64 {
        match self.annealing {
            Some(a) => self.lambda * a.gamma.powf((k / a.period) as f64),
            None => self.lambda,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunStats {
    pub iterations: u64,
    pub accepted: u64,
    pub acceptance_rate: f64,
    /// Recomputed from scratch for the best coloration.
    pub best_modularity: f64,
    pub current_modularity: f64,
    /// Communities of the best coloration.
    pub communities: usize,
    /// Iteration (within the run or time step) at which the best coloration was found.
    pub best_at_iteration: u64,
    /// Largest gap seen between the running and the recomputed modularity.
    pub max_drift: f64,
    pub wall_ms: f64,
}

/// One Metropolis–Hastings step on `state`. Returns whether the move was
/// accepted, the move itself and the change of the flattened modularity.
pub fn mh_step<R: Rng + ?Sized>(
    state: &mut HierarchyState,
    config: &EngineConfig,
    params: &MixtureParams,
    lambda: f64,
    rng: &mut R,
) -> Result<(bool, Move, f64)> {
    let mv = match config.proposal {
        ProposalFamily::Basic => {
            let base = &state.levels()[0];
            sample_basic(&base.graph, &base.coloration, rng)?
        }
        ProposalFamily::Improved => {
            let base = &state.levels()[0];
            sample_improved(&base.graph, &base.coloration, params.alpha, config.frontier_mode, rng)?
        }
        ProposalFamily::Hierarchical => {
            sample_hierarchical(state, params, config.frontier_mode, config.delta_mode, rng)?
        }
    };
    let flat_delta = if state.level_count() == 1
        || (config.proposal == ProposalFamily::Hierarchical && config.delta_mode == DeltaMode::TopLevel)
    {
        mv.delta_q
    } else {
        delta_hier(state, mv.level, mv.node, mv.target)?
    };
    let accepted = accept(mv.hastings_ratio, lambda * mv.delta_q, rng);
    if accepted {
        state.apply_move(mv.level, mv.node, mv.target)?;
    }
    Ok((accepted, mv, flat_delta))
}

/// `log U < log r + λΔQ`, short-circuiting when the right side is non-negative.
fn accept<R: Rng + ?Sized>(ratio: f64, scaled_delta: f64, rng: &mut R) -> bool {
    if ratio <= 0.0 {
        return false;
    }
    let threshold = ratio.ln() + scaled_delta;
    if threshold >= 0.0 {
        return true;
    }
    let u: f64 = rng.gen();
    u.ln() < threshold
}

/// A running chain: state, RNG, running modularity and best coloration seen.
#[derive(Debug, Clone)]
pub struct Chain {
    state: HierarchyState,
    config: EngineConfig,
    params: MixtureParams,
    rng: ChaCha8Rng,
    current_q: f64,
    best_q: f64,
    best: Coloration,
    best_at: u64,
    /// Iterations since the chain started; drives annealing.
    total_steps: u64,
    /// Counters of the current run or time step.
    iterations: u64,
    accepted: u64,
    since_resync: u64,
    max_drift: f64,
    wall_ms: f64,
}

impl Chain {
    /// Chain started from singletons at every level.
    pub fn new(graph: Graph, config: &EngineConfig) -> Result<Self> {
        config.validate()?;
        let state = HierarchyState::cold_start(graph, config.effective_levels())?;
        let params = config.mixture()?;
        let mut chain = Chain {
            best: state.flatten(),
            state,
            config: config.clone(),
            params,
            rng: ChaCha8Rng::seed_from_u64(config.seed),
            current_q: 0.0,
            best_q: 0.0,
            best_at: 0,
            total_steps: 0,
            iterations: 0,
            accepted: 0,
            since_resync: 0,
            max_drift: 0.0,
            wall_ms: 0.0,
        };
        chain.restart_run();
        Ok(chain)
    }

    pub fn state(&self) -> &HierarchyState {
        &self.state
    }

    pub fn best(&self) -> &Coloration {
        &self.best
    }

    pub fn best_modularity(&self) -> f64 {
        self.best_q
    }

    pub fn current_modularity(&self) -> f64 {
        self.current_q
    }

    pub fn config(&self) -> &EngineConfig {
        &self.config
    }

    /// Whether a proposal can be drawn on the current graph.
    pub fn can_step(&self) -> bool {
        let g = self.state.base_graph();
        g.total_weight() > 0.0
            && g.node_count() >= 2
            && (self.config.proposal != ProposalFamily::Basic || g.linked_node_count() > 0)
    }

    fn exact_modularity(&self) -> f64 {
        modularity(self.state.base_graph(), &self.state.flatten()).unwrap_or(0.0)
    }

    /// Resets per-run counters and makes the current state the best one.
    fn restart_run(&mut self) {
        self.state.recompute_degrees();
        self.current_q = self.exact_modularity();
        self.best_q = self.current_q;
        self.best = self.state.flatten();
        self.best_at = 0;
        self.iterations = 0;
        self.accepted = 0;
        self.since_resync = 0;
        self.max_drift = 0.0;
        self.wall_ms = 0.0;
    }

    fn resync(&mut self) {
        self.state.recompute_degrees();
        let exact = self.exact_modularity();
        self.max_drift = self.max_drift.max((exact - self.current_q).abs());
        self.current_q = exact;
        self.since_resync = 0;
    }

    /// One step. Returns whether the proposed move was accepted.
    pub fn step(&mut self) -> Result<bool> {
        let lambda = self.config.lambda_at(self.total_steps);
        let (accepted, _, flat_delta) =
            mh_step(&mut self.state, &self.config, &self.params, lambda, &mut self.rng)?;
        self.total_steps += 1;
        self.iterations += 1;
        self.since_resync += 1;
        if accepted {
            self.accepted += 1;
            self.current_q += flat_delta;
            if self.current_q > self.best_q + 1e-12 {
                self.best_q = self.current_q;
                self.best = self.state.flatten();
                self.best_at = self.iterations;
            }
        }
        if self.since_resync >= RESYNC_PERIOD {
            self.resync();
        }
        Ok(accepted)
    }

    /// Runs `steps` steps, or none when no proposal is possible.
    pub fn run(&mut self, steps: u64) -> Result<()> {
        let start = Instant::now();
        if self.can_step() {
            for _ in 0..steps {
                self.step()?;
            }
        }
        self.wall_ms += start.elapsed().as_secs_f64() * 1e3;
        Ok(())
    }

    /// Applies a batch of edits and starts a new run from the resulting state.
    pub fn apply_edits(&mut self, events: &[Event]) -> Result<()> {
        for ev in events {
            self.state.propagate_edit(&ev.edit).map_err(|e| Error::Stream {
                line: ev.line,
                message: e.to_string(),
            })?;
        }
        self.restart_run();
        Ok(())
    }

    /// Budget of one online time step.
    pub fn step_budget(&self) -> u64 {
        self.config
            .budget_per_step
            .unwrap_or_else(|| default_budget(self.state.base_graph()))
    }

    pub fn stats(&self) -> RunStats {
        RunStats {
            iterations: self.iterations,
            accepted: self.accepted,
            acceptance_rate: if self.iterations == 0 {
                0.0
            } else {
                self.accepted as f64 / self.iterations as f64
            },
            best_modularity: modularity(self.state.base_graph(), &self.best).unwrap_or(0.0),
            current_modularity: self.current_q,
            communities: self.best.community_count(),
            best_at_iteration: self.best_at,
            max_drift: self.max_drift,
            wall_ms: self.wall_ms,
        }
    }
}

/// `20 |E|`.
pub fn default_budget(graph: &Graph) -> u64 {
    20 * graph.edge_count() as u64
}

/// Runs the chain from singletons for the configured budget and returns the
/// best flattened coloration seen.
pub fn run_static(graph: Graph, config: &EngineConfig) -> Result<(Coloration, RunStats)> {
    if graph.total_weight() <= 0.0 {
        return Err(Error::Domain("cannot detect communities in a graph without edges".into()));
    }
    let budget = config.iterations.unwrap_or_else(|| default_budget(&graph));
    let mut chain = Chain::new(graph, config)?;
    chain.run(budget)?;
    Ok((chain.best().clone(), chain.stats()))
}

/// One edit of an event stream with the line it came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub line: usize,
    pub edit: GraphEdit,
}

/// All events sharing one time step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventBatch {
    pub t: u64,
    pub events: Vec<Event>,
}

#[derive(Debug, Clone)]
pub struct OnlineStep {
    /// `None` for the run on the initial graph.
    pub t: Option<u64>,
    pub coloration: Coloration,
    pub stats: RunStats,
}

/// Runs the static budget on the initial graph (skipped when it has no edges),
/// then for each time step applies its edits and continues the same chain for
/// the step budget.
pub fn run_online(graph: Graph, batches: &[EventBatch], config: &EngineConfig) -> Result<Vec<OnlineStep>> {
    check_batches(batches)?;
    let initial_budget = config.iterations.unwrap_or_else(|| default_budget(&graph));
    let has_edges = graph.total_weight() > 0.0;
    if !has_edges && batches.is_empty() {
        return Err(Error::Domain("cannot detect communities in a graph without edges".into()));
    }
    let mut chain = Chain::new(graph, config)?;
    let mut out = Vec::with_capacity(batches.len() + 1);
    if has_edges {
        chain.run(initial_budget)?;
        out.push(OnlineStep {
            t: None,
            coloration: chain.best().clone(),
            stats: chain.stats(),
        });
    }
    for batch in batches {
        chain.apply_edits(&batch.events)?;
        let budget = chain.step_budget();
        chain.run(budget)?;
        out.push(OnlineStep {
            t: Some(batch.t),
            coloration: chain.best().clone(),
            stats: chain.stats(),
        });
    }
    Ok(out)
}

fn check_batches(batches: &[EventBatch]) -> Result<()> {
    for pair in batches.windows(2) {
        if pair[1].t <= pair[0].t {
            let line = pair[1].events.first().map_or(0, |e| e.line);
            return Err(Error::Stream {
                line,
                message: format!("time step {} follows {}", pair[1].t, pair[0].t),
            });
        }
    }
    Ok(())
}
