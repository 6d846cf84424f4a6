use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use heurtree::engine::{
    bench_baselines, curve_csv, evaluate_final, tree_dot, BestRecord, Checkpoint, Engine, EngineError, RunConfig,
    RunSummary, CHECKPOINT_FILE,
};
use heurtree::evaluator::{EvalStatus, Executor, NativeRegistry};
use heurtree::problems::{BppScale, DatasetSpec};
use heurtree::search::ConfigError;
use heurtree::ProblemKind;
use heurtree_llm::GatewayError;

const EXIT_FAILURE: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_INIT_EXHAUSTED: u8 = 3;
const EXIT_BACKEND: u8 = 4;

#[derive(Parser)]
#[command(name = "heurtree", version, about = "Tree search over language-model-written heuristics")]
struct Cli {
    /// More log output; repeat for more detail.
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Start a search from a run configuration.
    Run {
        config: PathBuf,
        /// Overrides the configured output directory.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Continue a search from its last checkpoint.
    Resume {
        config: PathBuf,
        #[arg(long)]
        output: Option<PathBuf>,
        /// Defaults to the checkpoint in the output directory.
        #[arg(long)]
        checkpoint: Option<PathBuf>,
    },
    /// Measure one heuristic on a freshly generated test set.
    Evaluate {
        #[command(flatten)]
        code: CodeArgs,
        #[command(flatten)]
        data: DatasetArgs,
        /// Run configuration whose executor settings and timeout are used;
        /// native execution otherwise.
        #[arg(long)]
        config: Option<PathBuf>,
        /// TSP start nodes; objectives are averaged over them.
        #[arg(long, value_delimiter = ',', default_value = "0")]
        starts: Vec<usize>,
        #[arg(long, default_value_t = 60.0)]
        timeout: f64,
    },
    /// Write a seeded dataset as JSON.
    GenInstances {
        #[command(flatten)]
        data: DatasetArgs,
        /// Standard output when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Score the classical baselines of a problem.
    BenchBaselines {
        #[command(flatten)]
        data: DatasetArgs,
    },
    /// Print the search tree of a run.
    ExportTree {
        /// Run directory or checkpoint file.
        run: PathBuf,
        #[arg(long, value_enum, default_value_t = TreeFormat::Json)]
        format: TreeFormat,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the best-so-far curve of a run as CSV.
    ExportCurve {
        /// Run directory or checkpoint file.
        run: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum TreeFormat {
    Json,
    Dot,
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct CodeArgs {
    /// File holding the heuristic's source code.
    #[arg(long)]
    code: Option<PathBuf>,
    /// Best-heuristic record written by a run.
    #[arg(long)]
    best: Option<PathBuf>,
    /// Registered native heuristic, such as BASELINE:nearest_greedy.
    #[arg(long)]
    key: Option<String>,
}

/// A dataset, either from a TOML spec file or from the flags below applied
/// on top of the problem's default evaluation set.
#[derive(Args)]
struct DatasetArgs {
    #[arg(long, conflicts_with_all = ["problem", "count", "size", "capacity", "width"])]
    spec: Option<PathBuf>,
    #[arg(long)]
    problem: Option<ProblemKind>,
    /// Instances (TSP, KP) or equally sized streams (BPP).
    #[arg(long)]
    count: Option<usize>,
    /// Nodes (TSP), items (KP, BPP) or the ASP n.
    #[arg(long)]
    size: Option<usize>,
    /// Knapsack capacity or bin capacity.
    #[arg(long)]
    capacity: Option<f64>,
    /// The ASP w.
    #[arg(long)]
    width: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl DatasetArgs {
    fn to_spec(&self) -> Result<DatasetSpec> {
        if let Some(path) = &self.spec {
            let text = fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
            return toml::from_str(&text).map_err(|e| ConfigError::Invalid(format!("{}: {e}", path.display())).into());
        }
        let Some(problem) = self.problem else {
            return Err(ConfigError::Invalid("either --spec or --problem is required".into()).into());
        };
        let seed = self.seed;
        Ok(match DatasetSpec::evaluation_default(problem, seed) {
            DatasetSpec::Tsp { count, nodes, .. } => {
                DatasetSpec::Tsp { count: self.count.unwrap_or(count), nodes: self.size.unwrap_or(nodes), seed }
            }
            DatasetSpec::Kp { count, items, capacity, .. } => DatasetSpec::Kp {
                count: self.count.unwrap_or(count),
                items: self.size.unwrap_or(items),
                capacity: self.capacity.unwrap_or(capacity),
                seed,
            },
            DatasetSpec::Bpp { streams, .. } if self.count.is_none() && self.size.is_none() && self.capacity.is_none() => {
                DatasetSpec::Bpp { streams, seed }
            }
            DatasetSpec::Bpp { .. } => {
                let capacity = self.capacity.unwrap_or(100.0);
                if capacity.fract() != 0.0 || capacity < 1.0 {
                    return Err(ConfigError::Invalid("bin capacity must be a positive integer".into()).into());
                }
                let scale = BppScale { items: self.size.unwrap_or(1000), capacity: capacity as u32 };
                DatasetSpec::Bpp { streams: vec![scale; self.count.unwrap_or(1)], seed }
            }
            DatasetSpec::Asp { n, w } => DatasetSpec::Asp { n: self.size.unwrap_or(n), w: self.width.unwrap_or(w) },
        })
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<EngineError>() {
            return match e {
                EngineError::Config(_) | EngineError::ConfigMismatch { .. } => EXIT_CONFIG,
                EngineError::InitializationExhausted { .. } => EXIT_INIT_EXHAUSTED,
                EngineError::Backend(_) => EXIT_BACKEND,
                _ => EXIT_FAILURE,
            };
        }
        if cause.is::<ConfigError>() {
            return EXIT_CONFIG;
        }
        if cause.is::<GatewayError>() {
            return EXIT_BACKEND;
        }
    }
    EXIT_FAILURE
}

fn dispatch(command: Command) -> Result<()> {
    match command {
        Command::Run { config, output } => {
            let (config, out) = load_config(&config, output)?;
            let dataset = config.build_dataset()?;
            let engine = Engine::new(
                config.evolution.clone(),
                &dataset,
                config.build_gateway()?,
                config.build_evaluator(&dataset)?,
            )?;
            drive(engine.with_checkpoints(out.join(CHECKPOINT_FILE), config.checkpoint_every), &out)
        }
        Command::Resume { config, output, checkpoint } => {
            let (config, out) = load_config(&config, output)?;
            let path = checkpoint.unwrap_or_else(|| out.join(CHECKPOINT_FILE));
            let checkpoint =
                Checkpoint::load(&path).with_context(|| format!("cannot load checkpoint {}", path.display()))?;
            let dataset = config.build_dataset()?;
            let engine = Engine::resume(
                config.evolution.clone(),
                &dataset,
                config.build_gateway()?,
                config.build_evaluator(&dataset)?,
                checkpoint,
            )?;
            drive(engine.with_checkpoints(out.join(CHECKPOINT_FILE), config.checkpoint_every), &out)
        }
        Command::Evaluate { code, data, config, starts, timeout } => {
            let code = code.load()?;
            let spec = data.to_spec()?;
            let (executor, timeout) = match config {
                Some(path) => {
                    let config = RunConfig::load(&path)?;
                    (config.build_executor()?, config.evolution.eval_timeout_s)
                }
                None => (Executor::Native(NativeRegistry::with_baselines()), timeout),
            };
            let report = evaluate_final(&code, executor, &spec, timeout, &starts)?;
            println!("{}", serde_json::to_string_pretty(&report)?);
            if report.status != EvalStatus::Ok {
                bail!("candidate failed with {}", report.status);
            }
            Ok(())
        }
        Command::GenInstances { data, out } => {
            let dataset = data.to_spec()?.generate().map_err(|e| ConfigError::Invalid(e.to_string()))?;
            emit(out.as_deref(), &dataset.to_json())
        }
        Command::BenchBaselines { data } => {
            let rows = bench_baselines(&data.to_spec()?)?;
            println!("{}", serde_json::to_string_pretty(&rows)?);
            Ok(())
        }
        Command::ExportTree { run, format, out } => {
            let tree = load_checkpoint(&run)?.tree;
            let text = match format {
                TreeFormat::Json => serde_json::to_string_pretty(&tree)? + "\n",
                TreeFormat::Dot => tree_dot(&tree),
            };
            emit(out.as_deref(), &text)
        }
        Command::ExportCurve { run, out } => emit(out.as_deref(), &curve_csv(&load_checkpoint(&run)?.curve)),
    }
}

impl CodeArgs {
    fn load(&self) -> Result<String> {
        if let Some(key) = &self.key {
            return Ok(key.clone());
        }
        if let Some(path) = &self.best {
            let text = fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
            let best: BestRecord = serde_json::from_str(&text).with_context(|| format!("bad record {}", path.display()))?;
            return Ok(best.code);
        }
        let path = self.code.as_ref().expect("clap enforces one source");
        let text = fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
        Ok(text.trim_start_matches('\n').trim_end().to_string())
    }
}

fn load_config(path: &Path, output: Option<PathBuf>) -> Result<(RunConfig, PathBuf)> {
    let config = RunConfig::load(path)?;
    let out = output.unwrap_or_else(|| config.output_dir.clone());
    Ok((config, out))
}

/// Runs to completion and writes the artifacts, also after a failure.
fn drive(mut engine: Engine, out: &Path) -> Result<()> {
    let result = engine.run();
    let written = engine.write_artifacts(out);
    let summary = result?;
    written?;
    print_summary(&summary, out);
    Ok(())
}

fn print_summary(s: &RunSummary, out: &Path) {
    let body = serde_json::json!({
        "t": s.t,
        "nodes": s.nodes,
        "failures": s.failures,
        "best_id": s.best.id,
        "best_g": s.best.g,
        "best_description": s.best.description,
        "output": out,
    });
    println!("{}", serde_json::to_string_pretty(&body).expect("summary serializes"));
}

fn load_checkpoint(run: &Path) -> Result<Checkpoint> {
    let path = if run.is_dir() { run.join(CHECKPOINT_FILE) } else { run.to_path_buf() };
    Checkpoint::load(&path).with_context(|| format!("cannot load checkpoint {}", path.display()))
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text).with_context(|| format!("cannot write {}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}
