//! Measures `g(h)`, the mean larger-is-better score of a heuristic over the
//! evaluation dataset, under one wall-clock budget for the whole dataset.
//!
//! Code runs either through a [`NativeRegistry`] of built-in heuristics keyed by
//! exact source text, or through a pool of external snippet workers speaking
//! newline-delimited JSON over stdin/stdout.

mod native;
pub mod reference;
mod worker;

use std::collections::HashMap;
use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};
use std::time::Duration;

use serde::{Deserialize, Serialize};

pub use native::{
    score_instance, NativeHeuristic, NativeRegistry, KEY_ASP_CONSTANT, KEY_BEST_FIT, KEY_FIRST_FIT, KEY_KP_RATIO,
    KEY_NEAREST_GREEDY,
};
pub use worker::{WorkerCommand, WorkerError, WorkerPool, WorkerProcess, WorkerRequest, WorkerResponse};

use crate::problems::{Dataset, ProblemInstance};
use crate::ProblemKind;

/// Extra wall-clock time an outcome may take beyond its budget.
pub const GRACE: Duration = Duration::from_secs(2);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvalStatus {
    Ok,
    ParseError,
    RuntimeError,
    Timeout,
    InvalidOutput,
}

impl fmt::Display for EvalStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EvalStatus::Ok => "ok",
            EvalStatus::ParseError => "parse_error",
            EvalStatus::RuntimeError => "runtime_error",
            EvalStatus::Timeout => "timeout",
            EvalStatus::InvalidOutput => "invalid_output",
        })
    }
}

/// Result of one evaluation job. `scores` and `g` are present iff `status` is ok.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationOutcome {
    pub job_id: String,
    pub status: EvalStatus,
    pub scores: Option<Vec<f64>>,
    pub g: Option<f64>,
    pub wall_ms: u64,
    pub error: Option<String>,
}

impl EvaluationOutcome {
    /// Ok outcome with `g` the plain mean, or invalid_output if any score is
    /// non-finite or there are none.
    pub fn from_scores(job_id: String, scores: Vec<f64>, wall_ms: u64) -> Self {
        if scores.is_empty() || scores.iter().any(|s| !s.is_finite()) {
            return Self::failed(job_id, EvalStatus::InvalidOutput, "missing or non-finite score", wall_ms);
        }
        let g = scores.iter().sum::<f64>() / scores.len() as f64;
        if !g.is_finite() {
            return Self::failed(job_id, EvalStatus::InvalidOutput, "non-finite mean score", wall_ms);
        }
        Self { job_id, status: EvalStatus::Ok, scores: Some(scores), g: Some(g), wall_ms, error: None }
    }

    pub fn failed(job_id: String, status: EvalStatus, error: impl Into<String>, wall_ms: u64) -> Self {
        debug_assert_ne!(status, EvalStatus::Ok);
        Self { job_id, status, scores: None, g: None, wall_ms, error: Some(error.into()) }
    }

    pub fn is_ok(&self) -> bool {
        self.status == EvalStatus::Ok
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExecutorKind {
    NativeRegistry,
    ExternalWorker,
}

#[derive(Debug, thiserror::Error)]
pub enum EvaluatorError {
    #[error("code registered twice in the native registry")]
    DuplicateRegistration(String),
    #[error("time budget must be positive, got {0}")]
    BadTimeout(f64),
    #[error("evaluation dataset is empty")]
    EmptyDataset,
    #[error(transparent)]
    Worker(#[from] WorkerError),
}

pub enum Executor {
    Native(NativeRegistry),
    External(WorkerPool),
}

impl Executor {
    pub fn kind(&self) -> ExecutorKind {
        match self {
            Executor::Native(_) => ExecutorKind::NativeRegistry,
            Executor::External(_) => ExecutorKind::ExternalWorker,
        }
    }
}

/// Evaluates candidate code against one fixed dataset.
pub struct Evaluator {
    problem: ProblemKind,
    instances: Arc<Vec<ProblemInstance>>,
    timeout: Duration,
    start_node: usize,
    executor: Executor,
    jobs: AtomicU64,
    cache: Option<Mutex<HashMap<String, EvaluationOutcome>>>,
}

impl Evaluator {
    pub fn new(dataset: &Dataset, executor: Executor, timeout_s: f64, start_node: usize) -> Result<Self, EvaluatorError> {
        if !(timeout_s > 0.0 && timeout_s.is_finite()) {
            return Err(EvaluatorError::BadTimeout(timeout_s));
        }
        if dataset.instances.is_empty() {
            return Err(EvaluatorError::EmptyDataset);
        }
        Ok(Self {
            problem: dataset.problem,
            instances: Arc::new(dataset.instances.clone()),
            timeout: Duration::from_secs_f64(timeout_s),
            start_node,
            executor,
            jobs: AtomicU64::new(0),
            cache: None,
        })
    }

    /// Reuses the outcome of earlier identical code instead of re-running it.
    pub fn with_cache(mut self, on: bool) -> Self {
        self.cache = on.then(|| Mutex::new(HashMap::new()));
        self
    }

    /// Changes the TSP start node; cached outcomes are dropped.
    pub fn set_start_node(&mut self, start_node: usize) {
        self.start_node = start_node;
        if let Some(cache) = &mut self.cache {
            cache.get_mut().expect("cache lock").clear();
        }
    }

    pub fn kind(&self) -> ExecutorKind {
        self.executor.kind()
    }

    pub fn problem(&self) -> ProblemKind {
        self.problem
    }

    pub fn instance_count(&self) -> usize {
        self.instances.len()
    }

    pub fn evaluate(&self, code: &str) -> EvaluationOutcome {
        self.evaluate_batch(&[code]).pop().expect("one outcome per code")
    }

    /// Outcomes in the order of `codes`; external jobs run concurrently.
    pub fn evaluate_batch(&self, codes: &[&str]) -> Vec<EvaluationOutcome> {
        let mut out: Vec<Option<EvaluationOutcome>> = vec![None; codes.len()];
        let mut pending: Vec<(usize, String)> = Vec::new();
        for (i, code) in codes.iter().enumerate() {
            let job_id = format!("job-{}", self.jobs.fetch_add(1, Ordering::Relaxed));
            match self.cached(code) {
                Some(mut hit) => {
                    hit.job_id = job_id;
                    out[i] = Some(hit);
                }
                None => pending.push((i, job_id)),
            }
        }
        let fresh: Vec<EvaluationOutcome> = match &self.executor {
            Executor::Native(registry) => pending
                .iter()
                .map(|(i, job_id)| self.run_native(registry, codes[*i], job_id.clone()))
                .collect(),
            Executor::External(pool) => {
                let start_node = (self.problem == ProblemKind::Tsp).then_some(self.start_node);
                let requests: Vec<WorkerRequest> = pending
                    .iter()
                    .map(|(i, job_id)| WorkerRequest {
                        job_id,
                        problem: self.problem,
                        code: codes[*i],
                        timeout_s: self.timeout.as_secs_f64(),
                        instances: &self.instances,
                        start_node,
                    })
                    .collect();
                pool.run_batch(&requests)
            }
        };
        for ((i, _), outcome) in pending.into_iter().zip(fresh) {
            self.remember(codes[i], &outcome);
            out[i] = Some(outcome);
        }
        out.into_iter().map(|o| o.expect("filled")).collect()
    }

    fn run_native(&self, registry: &NativeRegistry, code: &str, job_id: String) -> EvaluationOutcome {
        match registry.lookup(code) {
            Some(h) => native::run_native(job_id, h.clone(), Arc::clone(&self.instances), self.start_node, self.timeout),
            None => EvaluationOutcome::failed(job_id, EvalStatus::ParseError, "code is not in the native registry", 0),
        }
    }

    fn cached(&self, code: &str) -> Option<EvaluationOutcome> {
        self.cache.as_ref()?.lock().expect("cache lock").get(code).cloned()
    }

    fn remember(&self, code: &str, outcome: &EvaluationOutcome) {
        if let Some(cache) = &self.cache {
            cache.lock().expect("cache lock").insert(code.to_string(), outcome.clone());
        }
    }
}
