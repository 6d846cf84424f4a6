//! The search loop: initial layer, then repeated root widening, UCT descent
//! with progressive widening, expansion and backpropagation until the
//! evaluation budget is spent. Runs are checkpointed at iteration boundaries.

mod artifacts;
mod checkpoint;
mod config;
mod report;

use std::path::{Path, PathBuf};

use heurtree_llm::{Gateway, GatewayError};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use artifacts::{curve_csv, parse_curve_csv, tree_dot, BestRecord};
pub use checkpoint::{config_hash, Checkpoint};
pub use config::{BackendConfig, ExecutorConfig, RunConfig};
pub use report::{bench_baselines, evaluate_final, BaselineRow, FinalReport};

use crate::actions::{
    collect_path_candidates, context_of, parse_generation, render_alignment_prompt, render_prompt,
    sample_subtree_representatives, ActionError, PromptSpec,
};
use crate::evaluator::{EvalStatus, Evaluator};
use crate::problems::Dataset;
use crate::search::{decay_lambda, select_child, should_widen, ConfigError, EvolutionConfig, ExportMeta, SearchError};
use crate::{ActionKind, Bounds, Candidate, Elite, Export, NodeId, Tree};

/// File names written into a run's output directory.
pub const TREE_FILE: &str = "tree.json";
pub const DOT_FILE: &str = "tree.dot";
pub const CURVE_FILE: &str = "curve.csv";
pub const BEST_FILE: &str = "best.json";
pub const CHECKPOINT_FILE: &str = "checkpoint.json";

#[derive(Debug, thiserror::Error)]
pub enum EngineError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("could not build {needed} valid initial heuristics within {attempts} attempts")]
    InitializationExhausted { needed: usize, attempts: u64 },
    #[error("language model backend failed: {0}")]
    Backend(#[from] GatewayError),
    #[error(transparent)]
    Search(#[from] SearchError),
    #[error(transparent)]
    Action(#[from] ActionError),
    #[error(transparent)]
    Evaluator(#[from] crate::evaluator::EvaluatorError),
    #[error("checkpoint was taken under a different configuration")]
    ConfigMismatch { expected: String, found: String },
    #[error("i/o failure: {0}")]
    Io(#[from] std::io::Error),
}

/// Where in the loop a generation happened.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Init,
    RootWiden,
    Widen,
    Expand,
}

/// One consumed budget unit.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Attempt {
    /// Loop iteration; 0 during initialization.
    pub iteration: u64,
    /// Budget counter after this attempt.
    pub t: u64,
    pub phase: Phase,
    pub action: ActionKind,
    pub parent: NodeId,
    /// The attached node, absent when the candidate was invalid.
    pub node: Option<NodeId>,
    pub status: EvalStatus,
}

/// Best performance so far, recorded each time it strictly improves.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub t: u64,
    pub best_g: f64,
    pub best_id: NodeId,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub t: u64,
    pub nodes: usize,
    pub failures: usize,
    pub best: BestRecord,
}

struct Draft {
    code: String,
    description: String,
}

struct CheckpointSink {
    path: PathBuf,
    every: u64,
    last_t: u64,
}

/// One search run over a fixed evaluator and language model.
pub struct Engine {
    config: EvolutionConfig,
    config_hash: String,
    prompt: PromptSpec,
    gateway: Gateway,
    evaluator: Evaluator,
    tree: Tree,
    bounds: Bounds,
    elite: Elite,
    rng: ChaCha8Rng,
    t: u64,
    iteration: u64,
    curve: Vec<CurvePoint>,
    history: Vec<Attempt>,
    sink: Option<CheckpointSink>,
}

impl Engine {
    pub fn new(
        config: EvolutionConfig,
        dataset: &Dataset,
        gateway: Gateway,
        evaluator: Evaluator,
    ) -> Result<Self, EngineError> {
        config.validate()?;
        if dataset.problem != config.problem || evaluator.problem() != config.problem {
            return Err(ConfigError::Invalid(format!(
                "run problem {} does not match dataset {} and evaluator {}",
                config.problem,
                dataset.problem,
                evaluator.problem()
            ))
            .into());
        }
        Ok(Self {
            prompt: PromptSpec::for_problem(config.problem),
            rng: ChaCha8Rng::seed_from_u64(config.seed),
            config_hash: config_hash(&config, dataset),
            config,
            gateway,
            evaluator,
            tree: Tree::new(),
            bounds: Bounds::initial(),
            elite: Elite::new(),
            t: 0,
            iteration: 0,
            curve: Vec::new(),
            history: Vec::new(),
            sink: None,
        })
    }

    /// Restores a run from `checkpoint`, which must come from the same configuration.
    pub fn resume(
        config: EvolutionConfig,
        dataset: &Dataset,
        mut gateway: Gateway,
        evaluator: Evaluator,
        checkpoint: Checkpoint,
    ) -> Result<Self, EngineError> {
        let expected = config_hash(&config, dataset);
        if checkpoint.config_hash != expected {
            return Err(EngineError::ConfigMismatch { expected, found: checkpoint.config_hash });
        }
        if let Some(cursor) = checkpoint.replay_cursor {
            gateway.seek(cursor)?;
        }
        let mut engine = Self::new(config, dataset, gateway, evaluator)?;
        engine.tree = Tree::from_export(&checkpoint.tree)?;
        engine.bounds = checkpoint.bounds;
        engine.elite = checkpoint.elite;
        engine.rng = checkpoint.rng;
        engine.t = checkpoint.t;
        engine.iteration = checkpoint.iteration;
        engine.curve = checkpoint.curve;
        engine.history = checkpoint.history;
        Ok(engine)
    }

    /// Saves a checkpoint to `path` whenever `every` evaluations have passed
    /// since the last one, and once more when the run stops.
    pub fn with_checkpoints(mut self, path: impl Into<PathBuf>, every: u64) -> Self {
        self.sink = Some(CheckpointSink { path: path.into(), every: every.max(1), last_t: self.t });
        self
    }

    pub fn config(&self) -> &EvolutionConfig {
        &self.config
    }

    pub fn t(&self) -> u64 {
        self.t
    }

    pub fn tree(&self) -> &Tree {
        &self.tree
    }

    pub fn bounds(&self) -> Bounds {
        self.bounds
    }

    pub fn elite(&self) -> &Elite {
        &self.elite
    }

    pub fn curve(&self) -> &[CurvePoint] {
        &self.curve
    }

    pub fn history(&self) -> &[Attempt] {
        &self.history
    }

    pub fn gateway(&self) -> &Gateway {
        &self.gateway
    }

    pub fn evaluator(&self) -> &Evaluator {
        &self.evaluator
    }

    pub fn export(&self) -> Export {
        self.tree.export(ExportMeta {
            t: self.t,
            q_max: self.bounds.q_max,
            q_min: self.bounds.q_min,
            elite: self.elite.ids(),
            seed: self.config.seed,
        })
    }

    pub fn export_json(&self) -> String {
        serde_json::to_string_pretty(&self.export()).expect("tree export serializes")
    }

    pub fn checkpoint(&self) -> Checkpoint {
        Checkpoint {
            config_hash: self.config_hash.clone(),
            t: self.t,
            iteration: self.iteration,
            bounds: self.bounds,
            elite: self.elite.clone(),
            rng: self.rng.clone(),
            replay_cursor: self.gateway.cursor(),
            curve: self.curve.clone(),
            history: self.history.clone(),
            tree: self.export(),
        }
    }

    pub fn best(&self) -> Result<BestRecord, EngineError> {
        let (id, c) = self.tree.best_candidate()?;
        Ok(BestRecord {
            id,
            g: c.performance.expect("attached nodes are evaluated"),
            description: c.description.clone(),
            code: c.code.clone(),
        })
    }

    pub fn summary(&self) -> Result<RunSummary, EngineError> {
        Ok(RunSummary {
            t: self.t,
            nodes: self.tree.len(),
            failures: self.history.iter().filter(|a| a.node.is_none()).count(),
            best: self.best()?,
        })
    }

    /// Runs to completion.
    pub fn run(&mut self) -> Result<RunSummary, EngineError> {
        self.run_until(u64::MAX)?;
        self.summary()
    }

    /// Runs until the budget is spent, or until the first iteration boundary
    /// at which `t >= pause_at`. Returns whether the budget is spent. A
    /// checkpoint is written on the way out, also when an error aborts the run.
    pub fn run_until(&mut self, pause_at: u64) -> Result<bool, EngineError> {
        let result = self.drive(pause_at);
        let saved = self.save_checkpoint();
        let done = result?;
        saved?;
        Ok(done)
    }

    fn drive(&mut self, pause_at: u64) -> Result<bool, EngineError> {
        self.initialize()?;
        while self.t < self.config.budget {
            if self.t >= pause_at {
                return Ok(false);
            }
            self.iterate()?;
            if let Some(sink) = &self.sink {
                if self.t >= sink.last_t + sink.every {
                    self.save_checkpoint()?;
                }
            }
        }
        Ok(true)
    }

    fn save_checkpoint(&mut self) -> Result<(), EngineError> {
        let Some(path) = self.sink.as_ref().map(|s| s.path.clone()) else {
            return Ok(());
        };
        self.checkpoint().save(&path)?;
        if let Some(sink) = &mut self.sink {
            sink.last_t = self.t;
        }
        Ok(())
    }

    /// Grows the root's children to `N_I` valid heuristics: i1 first, then e1
    /// over the initial heuristics built so far.
    fn initialize(&mut self) -> Result<(), EngineError> {
        let needed = self.config.initial_nodes();
        let cap = self.config.init_attempt_cap() as u64;
        let root = self.tree.root().id;
        while self.tree.root().children.len() < needed {
            let attempts = self.history.iter().filter(|a| a.phase == Phase::Init).count() as u64;
            if attempts >= cap {
                return Err(EngineError::InitializationExhausted { needed, attempts });
            }
            let existing = self.tree.root().children.clone();
            let plan = if existing.is_empty() {
                (ActionKind::I1, Vec::new())
            } else {
                (ActionKind::E1, self.init_context(existing))
            };
            let added = self.attempt_batch(root, Phase::Init, vec![plan])?;
            self.tree.backpropagate(root, added)?;
        }
        Ok(())
    }

    /// At most five initial heuristics, a random subset when there are more.
    fn init_context(&mut self, existing: Vec<NodeId>) -> Vec<NodeId> {
        const MAX: usize = 5;
        if existing.len() <= MAX {
            return existing;
        }
        let mut picked = rand::seq::index::sample(&mut self.rng, existing.len(), MAX).into_vec();
        picked.sort_unstable();
        picked.into_iter().map(|i| existing[i]).collect()
    }

    fn iterate(&mut self) -> Result<(), EngineError> {
        self.iteration += 1;
        let lambda = decay_lambda(self.config.lambda0, self.t, self.config.budget);
        let alpha = self.config.alpha;
        let root = self.tree.root().id;

        let (visits, width) = (self.tree.root().visits, self.tree.root().children.len());
        if should_widen(visits, width, alpha) {
            match sample_subtree_representatives(&self.tree, &mut self.rng) {
                Ok(reps) => {
                    let added = self.attempt_batch(root, Phase::RootWiden, vec![(ActionKind::E1, reps)])?;
                    self.tree.backpropagate(root, added)?;
                }
                Err(SearchError::TooFewSubtrees(_)) => {}
                Err(e) => return Err(e.into()),
            }
        }

        let mut node = root;
        loop {
            let n = self.tree.node(node)?;
            if n.is_leaf() || n.depth >= self.config.max_depth {
                break;
            }
            let child = select_child(&self.tree, node, &self.bounds, lambda)?;
            let c = self.tree.node(child)?;
            if !c.is_leaf() && should_widen(c.visits, c.children.len(), alpha) {
                let reference = self.elite.sample(&mut self.rng)?;
                let added = self.attempt_batch(child, Phase::Widen, vec![(ActionKind::E2, vec![reference, child])])?;
                self.tree.backpropagate(child, added)?;
            }
            node = child;
        }
        self.expand(node)
    }

    /// Creates e2, s1, k m1 and k m2 children of `node`, in that order; s1 is
    /// skipped when the path to the root holds fewer than two distinct codes.
    fn expand(&mut self, node: NodeId) -> Result<(), EngineError> {
        if self.tree.node(node)?.is_root() {
            return Err(SearchError::InvalidCandidate.into());
        }
        let reference = self.elite.sample(&mut self.rng)?;
        let mut plan = vec![(ActionKind::E2, vec![reference, node])];
        let path = collect_path_candidates(&self.tree, node)?;
        if path.len() >= 2 {
            plan.push((ActionKind::S1, path));
        }
        for _ in 0..self.config.k {
            plan.push((ActionKind::M1, vec![node]));
        }
        for _ in 0..self.config.k {
            plan.push((ActionKind::M2, vec![node]));
        }
        let added = self.attempt_batch(node, Phase::Expand, plan)?;
        self.tree.backpropagate(node, added)?;
        Ok(())
    }

    /// Generates every planned child, evaluates them together and commits them
    /// in plan order, one budget unit each. Returns the number attached.
    fn attempt_batch(
        &mut self,
        parent: NodeId,
        phase: Phase,
        plan: Vec<(ActionKind, Vec<NodeId>)>,
    ) -> Result<u64, EngineError> {
        let mut drafts = Vec::with_capacity(plan.len());
        for (action, context) in &plan {
            drafts.push(self.generate(*action, context)?);
        }
        let codes: Vec<&str> = drafts.iter().flatten().map(|d| d.code.as_str()).collect();
        let mut outcomes = self.evaluator.evaluate_batch(&codes).into_iter();
        let mut added = 0;
        for ((action, _), draft) in plan.into_iter().zip(drafts) {
            self.t += 1;
            let (node, status) = match draft {
                None => (None, EvalStatus::ParseError),
                Some(draft) => {
                    let outcome = outcomes.next().expect("one outcome per draft");
                    match outcome.g {
                        Some(g) if outcome.is_ok() => {
                            let id = self.commit(parent, action, draft, g)?;
                            added += 1;
                            (Some(id), EvalStatus::Ok)
                        }
                        _ => {
                            log::debug!("{action} candidate rejected: {:?}", outcome.error);
                            (None, outcome.status)
                        }
                    }
                }
            };
            self.history.push(Attempt { iteration: self.iteration, t: self.t, phase, action, parent, node, status });
        }
        Ok(added)
    }

    fn commit(&mut self, parent: NodeId, action: ActionKind, draft: Draft, g: f64) -> Result<NodeId, EngineError> {
        let candidate = Candidate::evaluated(draft.code, draft.description, g);
        let id = self.tree.attach(parent, candidate, action)?;
        self.bounds = self.bounds.update(g)?;
        self.elite.update(id, self.tree.candidate(id)?)?;
        if self.curve.last().is_none_or(|p| g > p.best_g) {
            self.curve.push(CurvePoint { t: self.t, best_g: g, best_id: id });
        }
        Ok(id)
    }

    /// One action call and, when its reply parses, one alignment call.
    fn generate(&mut self, action: ActionKind, context: &[NodeId]) -> Result<Option<Draft>, EngineError> {
        let black_box = self.config.black_box;
        let shown = context_of(&self.tree, context)?;
        let prompt = render_prompt(action, &self.prompt, &shown, black_box)?;
        let reply = self.gateway.complete_prompt(&prompt.user_text)?;
        let parsed = match parse_generation(&reply.text, &self.prompt.function_name) {
            Ok(parsed) => parsed,
            Err(e) => {
                log::debug!("{action} reply unusable: {e}");
                return Ok(None);
            }
        };
        let align = render_alignment_prompt(&self.prompt, &parsed.description_draft, &parsed.code, black_box)?;
        let reply = self.gateway.complete_prompt(&align.user_text)?;
        let description = aligned_description(&reply.text).unwrap_or(parsed.description_draft);
        Ok(Some(Draft { code: parsed.code, description }))
    }

    /// Writes tree, graph, curve, best heuristic and checkpoint into `dir`.
    pub fn write_artifacts(&self, dir: &Path) -> Result<(), EngineError> {
        std::fs::create_dir_all(dir)?;
        let export = self.export();
        checkpoint::write_atomic(
            &dir.join(TREE_FILE),
            serde_json::to_string_pretty(&export).expect("tree export serializes").as_bytes(),
        )?;
        checkpoint::write_atomic(&dir.join(DOT_FILE), tree_dot(&export).as_bytes())?;
        checkpoint::write_atomic(&dir.join(CURVE_FILE), curve_csv(&self.curve).as_bytes())?;
        if let Ok(best) = self.best() {
            checkpoint::write_atomic(
                &dir.join(BEST_FILE),
                serde_json::to_string_pretty(&best).expect("best record serializes").as_bytes(),
            )?;
        }
        self.checkpoint().save(&dir.join(CHECKPOINT_FILE))?;
        Ok(())
    }
}

/// The rewritten description: the text between the first `{` and the last `}`
/// when the reply has braces, otherwise the whole reply, whitespace collapsed. Empty replies yield `None`.
fn aligned_description(reply: &str) -> Option<String> {
    let inner = match (reply.find('{'), reply.rfind('}')) {
        (Some(open), Some(close)) if open < close => &reply[open + 1..close],
        _ => reply,
    };
    let text = inner.split_whitespace().collect::<Vec<_>>().join(" ");
    (!text.is_empty()).then_some(text)
}

#[cfg(test)]
mod tests {
    use super::aligned_description;

    #[test]
    fn alignment_reply_cleanup() {
        assert_eq!(aligned_description("  Picks the\n nearest node. ").as_deref(), Some("Picks the nearest node."));
        assert_eq!(aligned_description("{Ratio first.}").as_deref(), Some("Ratio first."));
        assert_eq!(aligned_description(" \n"), None);
    }
}
