use std::path::{Path, PathBuf};
use std::time::Duration;

use heurtree_llm::{Gateway, HttpBackend, HttpConfig, ReplayBackend, ReplayScript, RetryPolicy};
use serde::{Deserialize, Serialize};

use super::EngineError;
use crate::evaluator::{Evaluator, ExecutorKind, Executor, NativeRegistry, WorkerCommand, WorkerPool};
use crate::problems::{Dataset, DatasetSpec};
use crate::search::{ConfigError, EvolutionConfig};

/// Language model source.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum BackendConfig {
    /// OpenAI-compatible endpoint; `HEURTREE_API_BASE`, `HEURTREE_API_KEY`
    /// and `HEURTREE_MODEL` override the values given here.
    Http {
        #[serde(default)]
        base_url: Option<String>,
        #[serde(default)]
        model: Option<String>,
        #[serde(default = "default_attempts")]
        max_attempts: u32,
        #[serde(default = "default_request_timeout")]
        request_timeout_s: f64,
    },
    /// Scripted responses, one record per line.
    Replay { script: PathBuf },
}

fn default_attempts() -> u32 {
    3
}

fn default_request_timeout() -> f64 {
    120.0
}

impl Default for BackendConfig {
    fn default() -> Self {
        BackendConfig::Http {
            base_url: None,
            model: None,
            max_attempts: default_attempts(),
            request_timeout_s: default_request_timeout(),
        }
    }
}

/// How candidate code is executed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExecutorConfig {
    pub kind: ExecutorKind,
    /// Worker launch command; required for the external executor.
    pub worker: Option<WorkerCommand>,
    pub workers: usize,
    pub fresh_per_job: bool,
    /// Reuse outcomes of identical code instead of re-evaluating it.
    pub cache: bool,
}

impl Default for ExecutorConfig {
    fn default() -> Self {
        Self { kind: ExecutorKind::NativeRegistry, worker: None, workers: 1, fresh_per_job: false, cache: false }
    }
}

/// A full run description, read from TOML.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub evolution: EvolutionConfig,
    /// Evaluation dataset; the problem's default set, seeded with the run seed, when absent.
    #[serde(default)]
    pub dataset: Option<DatasetSpec>,
    #[serde(default)]
    pub backend: BackendConfig,
    #[serde(default)]
    pub executor: ExecutorConfig,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default = "default_checkpoint_every")]
    pub checkpoint_every: u64,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("run")
}

fn default_checkpoint_every() -> u64 {
    25
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let config: RunConfig = toml::from_str(text).map_err(|e| ConfigError::Invalid(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::Invalid(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.evolution.validate()?;
        let dataset = self.dataset_spec();
        if dataset.problem() != self.evolution.problem {
            return Err(ConfigError::Invalid(format!(
                "dataset problem {} differs from run problem {}",
                dataset.problem(),
                self.evolution.problem
            )));
        }
        if self.checkpoint_every == 0 {
            return Err(ConfigError::Invalid("checkpoint_every must be positive".into()));
        }
        if self.executor.kind == ExecutorKind::ExternalWorker && self.executor.worker.is_none() {
            return Err(ConfigError::Invalid("the external executor needs a [executor.worker] command".into()));
        }
        if let BackendConfig::Http { request_timeout_s, max_attempts, .. } = &self.backend {
            if !(request_timeout_s.is_finite() && *request_timeout_s > 0.0) || *max_attempts == 0 {
                return Err(ConfigError::Invalid("backend timeout and attempts must be positive".into()));
            }
        }
        Ok(())
    }

    pub fn dataset_spec(&self) -> DatasetSpec {
        self.dataset
            .clone()
            .unwrap_or_else(|| DatasetSpec::evaluation_default(self.evolution.problem, self.evolution.seed))
    }

    pub fn build_dataset(&self) -> Result<Dataset, EngineError> {
        self.dataset_spec()
            .generate()
            .map_err(|e| ConfigError::Invalid(format!("dataset: {e}")).into())
    }

    pub fn build_gateway(&self) -> Result<Gateway, EngineError> {
        match &self.backend {
            BackendConfig::Replay { script } => {
                let script = ReplayScript::load(script).map_err(|e| {
                    ConfigError::Invalid(format!("cannot read replay script {}: {e}", script.display()))
                })?;
                Ok(Gateway::new(Box::new(ReplayBackend::new(script)), "replay", RetryPolicy::immediate(1)))
            }
            BackendConfig::Http { base_url, model, max_attempts, request_timeout_s } => {
                let mut http = HttpConfig::default();
                if let Some(base) = base_url {
                    http.base_url = base.clone();
                }
                if let Some(model) = model {
                    http.model = model.clone();
                }
                http.request_timeout = Duration::from_secs_f64(*request_timeout_s);
                http.apply_env(|key| std::env::var(key).ok());
                let model = http.model.clone();
                let backend = HttpBackend::new(http)?;
                let retry = RetryPolicy { max_attempts: *max_attempts, ..RetryPolicy::default() };
                Ok(Gateway::new(Box::new(backend), model, retry))
            }
        }
    }

    pub fn build_executor(&self) -> Result<Executor, EngineError> {
        Ok(match self.executor.kind {
            ExecutorKind::NativeRegistry => Executor::Native(NativeRegistry::with_baselines()),
            ExecutorKind::ExternalWorker => {
                let command = self.executor.worker.clone().expect("validated");
                let pool = WorkerPool::new(command, self.executor.workers)
                    .map_err(crate::evaluator::EvaluatorError::from)?
                    .fresh_per_job(self.executor.fresh_per_job);
                Executor::External(pool)
            }
        })
    }

    pub fn build_evaluator(&self, dataset: &Dataset) -> Result<Evaluator, EngineError> {
        let evaluator =
            Evaluator::new(dataset, self.build_executor()?, self.evolution.eval_timeout_s, self.evolution.start_node)?;
        Ok(evaluator.with_cache(self.executor.cache))
    }
}
