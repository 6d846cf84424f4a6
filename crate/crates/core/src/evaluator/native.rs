use std::collections::HashMap;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{mpsc, Arc};
use std::thread;
use std::time::{Duration, Instant};

use super::{reference, EvalStatus, EvaluationOutcome, EvaluatorError};
use crate::problems::asp::baseline_asp_constant;
use crate::problems::bpp::{baseline_best_fit, baseline_first_fit};
use crate::problems::kp::baseline_kp_ratio;
use crate::problems::tsp::baseline_nearest_greedy;
use crate::problems::{
    construct_asp, construct_bpp_online, construct_kp, construct_tsp, tsp_objective, AspHeuristic, BppHeuristic,
    DistMatrix, DriverError, HeuristicFault, KpHeuristic, ProblemInstance, TspHeuristic,
};
use crate::ProblemKind;

/// A built-in key heuristic for one problem.
#[derive(Clone)]
pub enum NativeHeuristic {
    Tsp(Arc<dyn TspHeuristic>),
    Kp(Arc<dyn KpHeuristic>),
    Bpp(Arc<dyn BppHeuristic>),
    Asp(Arc<dyn AspHeuristic>),
}

impl std::fmt::Debug for NativeHeuristic {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "NativeHeuristic({})", self.problem())
    }
}

impl NativeHeuristic {
    pub fn tsp(h: impl TspHeuristic + 'static) -> Self {
        Self::Tsp(Arc::new(h))
    }

    pub fn kp(h: impl KpHeuristic + 'static) -> Self {
        Self::Kp(Arc::new(h))
    }

    pub fn bpp(h: impl BppHeuristic + 'static) -> Self {
        Self::Bpp(Arc::new(h))
    }

    pub fn asp(h: impl AspHeuristic + 'static) -> Self {
        Self::Asp(Arc::new(h))
    }

    pub fn problem(&self) -> ProblemKind {
        match self {
            Self::Tsp(_) => ProblemKind::Tsp,
            Self::Kp(_) => ProblemKind::Kp,
            Self::Bpp(_) => ProblemKind::Bpp,
            Self::Asp(_) => ProblemKind::Asp,
        }
    }
}

/// Code strings mapped to built-in heuristics by exact match.
#[derive(Debug, Clone, Default)]
pub struct NativeRegistry {
    entries: HashMap<String, NativeHeuristic>,
}

/// Registry keys of the classical baselines.
pub const KEY_NEAREST_GREEDY: &str = "BASELINE:nearest_greedy";
pub const KEY_KP_RATIO: &str = "BASELINE:kp_ratio";
pub const KEY_BEST_FIT: &str = "BASELINE:best_fit";
pub const KEY_FIRST_FIT: &str = "BASELINE:first_fit";
pub const KEY_ASP_CONSTANT: &str = "BASELINE:asp_constant";

impl NativeRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    /// Every baseline, under its `BASELINE:` key and under its reference snippet.
    pub fn with_baselines() -> Self {
        let mut reg = Self::new();
        let pairs = [
            (KEY_NEAREST_GREEDY, reference::TSP_NEAREST_GREEDY, NativeHeuristic::tsp(baseline_nearest_greedy())),
            (KEY_KP_RATIO, reference::KP_RATIO_GREEDY, NativeHeuristic::kp(baseline_kp_ratio())),
            (KEY_BEST_FIT, reference::BPP_BEST_FIT, NativeHeuristic::bpp(baseline_best_fit())),
            (KEY_FIRST_FIT, reference::BPP_FIRST_FIT, NativeHeuristic::bpp(baseline_first_fit())),
            (KEY_ASP_CONSTANT, reference::ASP_CONSTANT, NativeHeuristic::asp(baseline_asp_constant())),
        ];
        for (key, snippet, h) in pairs {
            reg.register(key, h.clone()).expect("baseline keys are distinct");
            reg.register(snippet, h).expect("baseline snippets are distinct");
        }
        reg
    }

    pub fn register(&mut self, code: impl Into<String>, heuristic: NativeHeuristic) -> Result<(), EvaluatorError> {
        let code = code.into();
        if self.entries.contains_key(&code) {
            return Err(EvaluatorError::DuplicateRegistration(code));
        }
        self.entries.insert(code, heuristic);
        Ok(())
    }

    pub fn lookup(&self, code: &str) -> Option<&NativeHeuristic> {
        self.entries.get(code)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Wraps a heuristic so that it faults on its next call once `cancel` is set.
struct Cancellable<'a, H: ?Sized> {
    inner: &'a H,
    cancel: &'a AtomicBool,
}

impl<H: ?Sized> Cancellable<'_, H> {
    fn check(&self) -> Result<(), HeuristicFault> {
        if self.cancel.load(Ordering::Relaxed) {
            Err(HeuristicFault("cancelled".into()))
        } else {
            Ok(())
        }
    }
}

impl<H: TspHeuristic + ?Sized> TspHeuristic for Cancellable<'_, H> {
    fn select_next_node(&self, c: usize, d: usize, u: &[usize], m: &DistMatrix) -> Result<usize, HeuristicFault> {
        self.check()?;
        self.inner.select_next_node(c, d, u, m)
    }
}

impl<H: KpHeuristic + ?Sized> KpHeuristic for Cancellable<'_, H> {
    fn select_next_item(&self, r: f64, w: &[f64], v: &[f64]) -> Result<usize, HeuristicFault> {
        self.check()?;
        self.inner.select_next_item(r, w, v)
    }
}

impl<H: BppHeuristic + ?Sized> BppHeuristic for Cancellable<'_, H> {
    fn score(&self, item: u32, bins: &[u32]) -> Result<Vec<f64>, HeuristicFault> {
        self.check()?;
        self.inner.score(item, bins)
    }
}

impl<H: AspHeuristic + ?Sized> AspHeuristic for Cancellable<'_, H> {
    fn priority(&self, el: &[u8], n: usize, w: usize) -> Result<f64, HeuristicFault> {
        self.check()?;
        self.inner.priority(el, n, w)
    }
}

/// Larger-is-better score of `h` on one instance.
pub fn score_instance(h: &NativeHeuristic, inst: &ProblemInstance, start_node: usize) -> Result<f64, DriverError> {
    score_with_cancel(h, inst, start_node, &AtomicBool::new(false))
}

fn score_with_cancel(
    h: &NativeHeuristic,
    inst: &ProblemInstance,
    start_node: usize,
    cancel: &AtomicBool,
) -> Result<f64, DriverError> {
    match (h, inst) {
        (NativeHeuristic::Tsp(h), ProblemInstance::Tsp(i)) => {
            let tour = construct_tsp(i, &Cancellable { inner: h.as_ref(), cancel }, start_node)?;
            Ok(-tsp_objective(i, &tour)?)
        }
        (NativeHeuristic::Kp(h), ProblemInstance::Kp(i)) => {
            Ok(construct_kp(i, &Cancellable { inner: h.as_ref(), cancel })?.value)
        }
        (NativeHeuristic::Bpp(h), ProblemInstance::Bpp(i)) => {
            Ok(-(construct_bpp_online(i, &Cancellable { inner: h.as_ref(), cancel })? as f64))
        }
        (NativeHeuristic::Asp(h), ProblemInstance::Asp(i)) => {
            Ok(construct_asp(*i, &Cancellable { inner: h.as_ref(), cancel })?.len() as f64)
        }
        (h, inst) => Err(DriverError::InvalidInstance(format!(
            "{} heuristic applied to a {} instance",
            h.problem(),
            inst.problem()
        ))),
    }
}

fn status_of(err: &DriverError) -> EvalStatus {
    match err {
        DriverError::HeuristicRaised(_) | DriverError::InvalidInstance(_) | DriverError::TooLarge { .. } => {
            EvalStatus::RuntimeError
        }
        DriverError::HeuristicReturnedVisited(_)
        | DriverError::HeuristicReturnedOutOfRange(_)
        | DriverError::WrongScoreCount { .. }
        | DriverError::NonFiniteScore
        | DriverError::NotPermutation(_) => EvalStatus::InvalidOutput,
    }
}

/// Runs `h` over every instance on a helper thread, giving up after `timeout`.
/// A late heuristic is cancelled at its next call and its partial scores are dropped.
pub(crate) fn run_native(
    job_id: String,
    h: NativeHeuristic,
    instances: Arc<Vec<ProblemInstance>>,
    start_node: usize,
    timeout: Duration,
) -> EvaluationOutcome {
    let started = Instant::now();
    let cancel = Arc::new(AtomicBool::new(false));
    let (tx, rx) = mpsc::channel();
    let worker_cancel = Arc::clone(&cancel);
    thread::spawn(move || {
        let scores: Result<Vec<f64>, DriverError> = instances
            .iter()
            .map(|inst| score_with_cancel(&h, inst, start_node, &worker_cancel))
            .collect();
        let _ = tx.send(scores);
    });
    let result = rx.recv_timeout(timeout);
    let wall_ms = started.elapsed().as_millis() as u64;
    match result {
        Ok(Ok(scores)) => EvaluationOutcome::from_scores(job_id, scores, wall_ms),
        Ok(Err(err)) => EvaluationOutcome::failed(job_id, status_of(&err), err.to_string(), wall_ms),
        Err(mpsc::RecvTimeoutError::Timeout) => {
            cancel.store(true, Ordering::Relaxed);
            EvaluationOutcome::failed(job_id, EvalStatus::Timeout, "evaluation exceeded its time budget", wall_ms)
        }
        Err(mpsc::RecvTimeoutError::Disconnected) => {
            EvaluationOutcome::failed(job_id, EvalStatus::RuntimeError, "native heuristic panicked", wall_ms)
        }
    }
}
