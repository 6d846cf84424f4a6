use std::io::{self, BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, Command, Stdio};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{mpsc, Mutex};
use std::thread;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use super::{EvalStatus, EvaluationOutcome};
use crate::problems::ProblemInstance;
use crate::ProblemKind;

/// How to launch a snippet worker. The worker takes no arguments of its own;
/// `args` is for the interpreter, e.g. `["-u", "worker.py"]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WorkerCommand {
    pub program: String,
    #[serde(default)]
    pub args: Vec<String>,
}

impl WorkerCommand {
    pub fn new(program: impl Into<String>, args: impl IntoIterator<Item = impl Into<String>>) -> Self {
        Self { program: program.into(), args: args.into_iter().map(Into::into).collect() }
    }
}

/// One request line.
#[derive(Debug, Serialize)]
pub struct WorkerRequest<'a> {
    pub job_id: &'a str,
    pub problem: ProblemKind,
    pub code: &'a str,
    pub timeout_s: f64,
    pub instances: &'a [ProblemInstance],
    #[serde(skip_serializing_if = "Option::is_none")]
    pub start_node: Option<usize>,
}

/// One response line.
#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct WorkerResponse {
    pub job_id: String,
    pub status: EvalStatus,
    #[serde(default)]
    pub scores: Option<Vec<f64>>,
    #[serde(default)]
    pub error: Option<String>,
}

#[derive(Debug, thiserror::Error)]
pub enum WorkerError {
    #[error("cannot start worker: {0}")]
    Spawn(#[source] io::Error),
    #[error("worker crashed: {0}")]
    Crashed(String),
    #[error("worker exceeded the time budget")]
    Timeout,
    #[error("protocol violation: {0}")]
    ProtocolViolation(String),
}

/// A live worker process and a reader thread feeding its stdout lines.
pub struct WorkerProcess {
    command: WorkerCommand,
    child: Child,
    stdin: ChildStdin,
    lines: mpsc::Receiver<io::Result<String>>,
}

impl WorkerProcess {
    pub fn spawn(command: &WorkerCommand) -> Result<Self, WorkerError> {
        let mut child = Command::new(&command.program)
            .args(&command.args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()
            .map_err(WorkerError::Spawn)?;
        let stdin = child.stdin.take().expect("stdin is piped");
        let stdout = child.stdout.take().expect("stdout is piped");
        let (tx, lines) = mpsc::channel();
        thread::spawn(move || {
            for line in BufReader::new(stdout).lines() {
                if tx.send(line).is_err() {
                    break;
                }
            }
        });
        Ok(Self { command: command.clone(), child, stdin, lines })
    }

    pub fn id(&self) -> u32 {
        self.child.id()
    }

    /// Sends one job and waits up to `timeout` for its response. Any error
    /// leaves the process in an unknown state; call [`restart`](Self::restart).
    pub fn dispatch(&mut self, request: &WorkerRequest<'_>, timeout: Duration) -> Result<WorkerResponse, WorkerError> {
        let mut line = serde_json::to_string(request).map_err(|e| WorkerError::ProtocolViolation(e.to_string()))?;
        line.push('\n');
        self.stdin
            .write_all(line.as_bytes())
            .and_then(|()| self.stdin.flush())
            .map_err(|e| WorkerError::Crashed(e.to_string()))?;
        let reply = match self.lines.recv_timeout(timeout) {
            Ok(Ok(reply)) => reply,
            Ok(Err(e)) => return Err(WorkerError::Crashed(e.to_string())),
            Err(mpsc::RecvTimeoutError::Timeout) => return Err(WorkerError::Timeout),
            Err(mpsc::RecvTimeoutError::Disconnected) => {
                return Err(WorkerError::Crashed("worker closed its output".into()))
            }
        };
        let response: WorkerResponse = serde_json::from_str(&reply)
            .map_err(|e| WorkerError::ProtocolViolation(format!("unparseable response: {e}")))?;
        if response.job_id != request.job_id {
            return Err(WorkerError::ProtocolViolation(format!(
                "response for job {} while waiting for {}",
                response.job_id, request.job_id
            )));
        }
        Ok(response)
    }

    /// Kills the process and starts a fresh one from the same command.
    pub fn restart(&mut self) -> Result<(), WorkerError> {
        self.kill();
        *self = Self::spawn(&self.command)?;
        Ok(())
    }

    fn kill(&mut self) {
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

impl Drop for WorkerProcess {
    fn drop(&mut self) {
        self.kill();
    }
}

/// Turns a worker reply into an outcome, checking the score vector.
fn outcome_of(job_id: &str, response: WorkerResponse, expected: usize, wall_ms: u64) -> EvaluationOutcome {
    match response.status {
        EvalStatus::Ok => match response.scores {
            Some(scores) if scores.len() == expected => EvaluationOutcome::from_scores(job_id.to_string(), scores, wall_ms),
            Some(scores) => EvaluationOutcome::failed(
                job_id.to_string(),
                EvalStatus::InvalidOutput,
                format!("{} scores for {expected} instances", scores.len()),
                wall_ms,
            ),
            None => EvaluationOutcome::failed(job_id.to_string(), EvalStatus::InvalidOutput, "ok without scores", wall_ms),
        },
        status => EvaluationOutcome::failed(
            job_id.to_string(),
            status,
            response.error.unwrap_or_else(|| status.to_string()),
            wall_ms,
        ),
    }
}

struct Slot {
    process: Option<WorkerProcess>,
}

/// `W` worker processes, each serving at most one job at a time.
pub struct WorkerPool {
    command: WorkerCommand,
    slots: Vec<Mutex<Slot>>,
    fresh_per_job: bool,
}

impl WorkerPool {
    /// Starts `size` workers up front.
    pub fn new(command: WorkerCommand, size: usize) -> Result<Self, WorkerError> {
        let size = size.max(1);
        let slots = (0..size)
            .map(|_| WorkerProcess::spawn(&command).map(|p| Mutex::new(Slot { process: Some(p) })))
            .collect::<Result<_, _>>()?;
        Ok(Self { command, slots, fresh_per_job: false })
    }

    /// Replaces each worker after every job instead of reusing it.
    pub fn fresh_per_job(mut self, on: bool) -> Self {
        self.fresh_per_job = on;
        self
    }

    pub fn size(&self) -> usize {
        self.slots.len()
    }

    /// Process ids of the live workers, in slot order.
    pub fn worker_ids(&self) -> Vec<Option<u32>> {
        self.slots
            .iter()
            .map(|s| s.lock().expect("slot lock").process.as_ref().map(WorkerProcess::id))
            .collect()
    }

    /// Runs every request and returns the outcomes in request order.
    pub fn run_batch(&self, requests: &[WorkerRequest<'_>]) -> Vec<EvaluationOutcome> {
        let next = AtomicUsize::new(0);
        let results: Vec<Mutex<Option<EvaluationOutcome>>> = requests.iter().map(|_| Mutex::new(None)).collect();
        thread::scope(|scope| {
            for slot in self.slots.iter().take(requests.len()) {
                let (next, results) = (&next, &results);
                scope.spawn(move || {
                    let mut slot = slot.lock().expect("slot lock");
                    loop {
                        let i = next.fetch_add(1, Ordering::SeqCst);
                        let Some(request) = requests.get(i) else { break };
                        let outcome = self.run_on(&mut slot, request);
                        *results[i].lock().expect("result lock") = Some(outcome);
                    }
                });
            }
        });
        results
            .into_iter()
            .map(|r| r.into_inner().expect("result lock").expect("every request ran"))
            .collect()
    }

    fn run_on(&self, slot: &mut Slot, request: &WorkerRequest<'_>) -> EvaluationOutcome {
        let started = Instant::now();
        let job_id = request.job_id;
        if slot.process.is_none() {
            match WorkerProcess::spawn(&self.command) {
                Ok(p) => slot.process = Some(p),
                Err(e) => return EvaluationOutcome::failed(job_id.into(), EvalStatus::RuntimeError, e.to_string(), 0),
            }
        }
        let process = slot.process.as_mut().expect("spawned above");
        let timeout = Duration::from_secs_f64(request.timeout_s);
        let result = process.dispatch(request, timeout);
        let wall_ms = started.elapsed().as_millis() as u64;
        let faulted = result.is_err();
        let outcome = match result {
            Ok(response) => outcome_of(job_id, response, request.instances.len(), wall_ms),
            Err(WorkerError::Timeout) => {
                EvaluationOutcome::failed(job_id.into(), EvalStatus::Timeout, "evaluation exceeded its time budget", wall_ms)
            }
            Err(e) => EvaluationOutcome::failed(job_id.into(), EvalStatus::RuntimeError, e.to_string(), wall_ms),
        };
        if faulted || self.fresh_per_job {
            if faulted {
                log::warn!("restarting worker after job {job_id}: {}", outcome.error.as_deref().unwrap_or(""));
            }
            if process.restart().is_err() {
                slot.process = None;
            }
        }
        outcome
    }
}
