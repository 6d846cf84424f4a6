use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use heurtree::engine::{parse_curve_csv, Checkpoint, BEST_FILE, CHECKPOINT_FILE, CURVE_FILE, DOT_FILE, TREE_FILE};
use heurtree::evaluator::reference;
use heurtree::problems::Dataset;
use heurtree_llm::ReplayScript;

fn heurtree(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_heurtree")).args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn fenced(code: &str) -> String {
    format!("{{Packs items greedily.}}\n```python\n{code}\n```")
}

/// Alternating best-fit and first-fit generations, each followed by an alignment reply.
fn bpp_script(generations: usize) -> ReplayScript {
    let mut responses = Vec::new();
    for i in 0..generations {
        let code = if i % 2 == 0 { reference::BPP_BEST_FIT } else { reference::BPP_FIRST_FIT };
        responses.push(fenced(code));
        responses.push("{Scores bins by leftover room.}".to_string());
    }
    ReplayScript::new(responses)
}

fn write_run(dir: &Path, script: &ReplayScript, budget: u64) -> PathBuf {
    let script_path = dir.join("script.txt");
    fs::write(&script_path, script.to_text()).unwrap();
    let config = format!(
        r#"output_dir = "{out}"
checkpoint_every = 3

[evolution]
problem = "bpp"
budget = {budget}
n_init = 2
k = 1
seed = 4

[dataset]
problem = "bpp"
streams = [{{ items = 200, capacity = 100 }}]
seed = 1

[backend]
kind = "replay"
script = "{script}"
"#,
        out = dir.join("run").display(),
        script = script_path.display()
    );
    let path = dir.join("run.toml");
    fs::write(&path, config).unwrap();
    path
}

#[test]
fn run_writes_every_artifact() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_run(dir.path(), &bpp_script(40), 12);
    let out = heurtree(&["run", config.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let summary: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert!(summary["t"].as_u64().unwrap() >= 12);

    let run = dir.path().join("run");
    for file in [TREE_FILE, DOT_FILE, CURVE_FILE, BEST_FILE, CHECKPOINT_FILE] {
        assert!(run.join(file).is_file(), "{file} missing");
    }
    let ckpt = Checkpoint::load(&run.join(CHECKPOINT_FILE)).unwrap();
    assert_eq!(Some(ckpt.t), summary["t"].as_u64());
    assert_eq!(ckpt.tree.nodes.len(), summary["nodes"].as_u64().unwrap() as usize);

    let curve = stdout(&heurtree(&["export-curve", run.to_str().unwrap()]));
    let points = parse_curve_csv(&curve).unwrap();
    assert_eq!(points.first().unwrap().t, 1);
    assert!(points.windows(2).all(|w| w[0].best_g < w[1].best_g));

    let dot = stdout(&heurtree(&["export-tree", run.to_str().unwrap(), "--format", "dot"]));
    assert!(dot.starts_with("digraph search_tree {"));
    let json = stdout(&heurtree(&["export-tree", run.join(CHECKPOINT_FILE).to_str().unwrap()]));
    let tree: serde_json::Value = serde_json::from_str(&json).unwrap();
    assert_eq!(tree["nodes"].as_array().unwrap().len(), ckpt.tree.nodes.len());
}

#[test]
fn resume_finishes_and_guards_the_configuration() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_run(dir.path(), &bpp_script(40), 12);
    assert!(heurtree(&["run", config.to_str().unwrap()]).status.success());
    let tree_before = fs::read_to_string(dir.path().join("run").join(TREE_FILE)).unwrap();

    let again = heurtree(&["resume", config.to_str().unwrap()]);
    assert!(again.status.success(), "{}", String::from_utf8_lossy(&again.stderr));
    assert_eq!(fs::read_to_string(dir.path().join("run").join(TREE_FILE)).unwrap(), tree_before);

    let edited = fs::read_to_string(&config).unwrap().replace("budget = 12", "budget = 14");
    fs::write(&config, edited).unwrap();
    let out = heurtree(&["resume", config.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn exit_codes_distinguish_failures() {
    let dir = tempfile::tempdir().unwrap();
    let garbage = ReplayScript::new(vec!["no code".to_string(); 10]);
    let config = write_run(dir.path(), &garbage, 12);
    assert_eq!(heurtree(&["run", config.to_str().unwrap()]).status.code(), Some(3));
    assert!(dir.path().join("run").join(CHECKPOINT_FILE).is_file());

    let config = write_run(dir.path(), &bpp_script(3), 12);
    assert_eq!(heurtree(&["run", config.to_str().unwrap()]).status.code(), Some(4));

    let bad = dir.path().join("bad.toml");
    fs::write(&bad, "[evolution]\nalpha = 7.0\n").unwrap();
    assert_eq!(heurtree(&["run", bad.to_str().unwrap()]).status.code(), Some(2));
    assert_eq!(heurtree(&["run", dir.path().join("absent.toml").to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn gen_instances_is_seeded() {
    let args = ["gen-instances", "--problem", "tsp", "--count", "3", "--size", "6", "--seed", "8"];
    let a = stdout(&heurtree(&args));
    assert_eq!(a, stdout(&heurtree(&args)));
    let ds = Dataset::from_json(&a).unwrap();
    assert_eq!(ds.instances.len(), 3);
    assert_eq!(ds.seed, 8);

    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("asp.toml");
    fs::write(&spec, "problem = \"asp\"\nn = 12\nw = 7\n").unwrap();
    let out = dir.path().join("asp.json");
    let status = heurtree(&["gen-instances", "--spec", spec.to_str().unwrap(), "--out", out.to_str().unwrap()]).status;
    assert!(status.success());
    assert_eq!(Dataset::load(&out).unwrap().instances.len(), 1);
}

#[test]
fn evaluate_reports_gap_and_failures() {
    let out = heurtree(&[
        "evaluate", "--key", "BASELINE:nearest_greedy", "--problem", "tsp", "--count", "4", "--size", "8", "--starts", "0,1,2",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(report["status"], "ok");
    assert_eq!(report["reference"], "exact optimum");
    assert!(report["mean_gap_pct"].as_f64().unwrap() >= 0.0);

    let dir = tempfile::tempdir().unwrap();
    let code = dir.path().join("h.py");
    fs::write(&code, format!("\n{}\n", reference::BPP_FIRST_FIT)).unwrap();
    let args = ["evaluate", "--code", code.to_str().unwrap(), "--problem", "bpp", "--count", "2", "--size", "300"];
    assert!(heurtree(&args).status.success());

    fs::write(&code, "def score(item, bins):\n    return []").unwrap();
    let failed = heurtree(&args);
    assert_eq!(failed.status.code(), Some(1));
    assert!(stdout(&failed).contains("parse_error"));
}

#[test]
fn bench_baselines_lists_both_bin_packers() {
    let out = heurtree(&["bench-baselines", "--problem", "bpp", "--count", "2", "--size", "500", "--seed", "3"]);
    assert!(out.status.success());
    let rows: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let names: Vec<&str> = rows.as_array().unwrap().iter().map(|r| r["name"].as_str().unwrap()).collect();
    assert_eq!(names, ["best fit", "first fit"]);
}
