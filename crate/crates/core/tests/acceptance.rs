//! Acceptance criteria 1 through 9, one line each.
//!
//! Runs without the libtest harness so that every verdict is printed even
//! when it passes. Exits non-zero when any criterion fails.

mod common;

use std::collections::HashMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use common::{all_orders, line_dataset, registry, traced_config, traced_script, FuzzBackend, HAND_TRACE};
use heurtree::actions::{render_alignment_prompt, render_prompt, ContextCandidate, PromptSpec};
use heurtree::engine::{Checkpoint, Engine, EngineError, Phase, CHECKPOINT_FILE};
use heurtree::evaluator::{score_instance, Evaluator, Executor, NativeHeuristic};
use heurtree::problems::asp::baseline_asp_constant;
use heurtree::problems::bpp::{baseline_best_fit, baseline_first_fit};
use heurtree::problems::kp::baseline_kp_ratio;
use heurtree::problems::tsp::baseline_nearest_greedy;
use heurtree::problems::{construct_asp, held_karp, kp_exact, AspSpace, DatasetSpec, ProblemInstance};
use heurtree::search::{decay_lambda, select_child, should_widen, uct_score, EvolutionConfig};
use heurtree::{ActionKind, Bounds, Candidate, NodeId, ProblemKind, Tree};
use heurtree_llm::{Gateway, RetryPolicy};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Criterion {
    id: u8,
    name: &'static str,
    limit: Option<Duration>,
    check: fn() -> Result<String, String>,
}

fn main() -> ExitCode {
    let criteria = [
        Criterion { id: 1, name: "uct, widening and decay tables", limit: Some(secs(1)), check: c1_unit_tables },
        Criterion { id: 2, name: "deterministic scripted run", limit: Some(secs(5)), check: c2_deterministic_run },
        Criterion { id: 3, name: "tree invariants under fuzz", limit: Some(secs(120)), check: c3_fuzz_invariants },
        Criterion { id: 4, name: "oracle dominance", limit: Some(secs(60)), check: c4_oracle_dominance },
        Criterion { id: 5, name: "TSP and KP greedy reproduction", limit: Some(secs(120)), check: c5_greedy_baselines },
        Criterion { id: 6, name: "BPP baseline reproduction", limit: Some(secs(30)), check: c6_bpp_baselines },
        Criterion { id: 7, name: "ASP validity", limit: Some(secs(120)), check: c7_asp_validity },
        Criterion { id: 8, name: "prompt fidelity", limit: None, check: c8_prompt_fidelity },
        Criterion { id: 9, name: "argmax invariance", limit: None, check: c9_argmax_invariance },
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    let mut ran = 0;
    for c in &criteria {
        let label = format!("criterion {}", c.id);
        if !filter.is_empty() && !filter.iter().any(|f| label.contains(f.as_str()) || c.name.contains(f.as_str())) {
            continue;
        }
        ran += 1;
        let started = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(c.check)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let elapsed = started.elapsed();
        let outcome = match (outcome, c.limit) {
            (Ok(detail), Some(limit)) if elapsed > limit => {
                Err(format!("{detail}; took {:.2}s, limit {}s", elapsed.as_secs_f64(), limit.as_secs()))
            }
            (o, _) => o,
        };
        let (verdict, detail) = match outcome {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!("{label} [{}] {verdict} ({:.2}s): {detail}", c.name, elapsed.as_secs_f64());
    }
    println!("acceptance: {} of {ran} criteria passed", ran - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

fn secs(s: u64) -> Duration {
    Duration::from_secs(s)
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn c1_unit_tables() -> Result<String, String> {
    let b = |q_max: f64, q_min: f64| Bounds { q_max, q_min };
    let table = [
        (uct_score(5.0, 2, 8, &b(10.0, 0.0), 0.1), 0.604_814_707_396_820_5),
        (uct_score(-6.5, 1, 3, &b(-6.3, -6.9), 0.1), 0.784_407_668_918_214_1),
        (uct_score(3.0, 1, 0, &b(3.0, 3.0), 0.1), 0.0),
    ];
    for (i, (got, want)) in table.iter().enumerate() {
        ensure((got - want).abs() <= 1e-9, || format!("uct row {i}: {got} vs {want}"))?;
    }
    ensure(uct_score(10.0, 4, 7, &b(10.0, 0.0), 0.0) == 1.0, || "Q = q_max with lambda 0 is not 1".into())?;

    let mut checked = 0u64;
    for n in 1..=10_000u64 {
        let mut root = 0u64;
        while (root + 1) * (root + 1) <= n {
            root += 1;
        }
        for c in 0..=(root as usize + 2) {
            let want = c as u64 <= root;
            ensure(should_widen(n, c, 0.5) == want, || format!("should_widen({n}, {c}) != {want}"))?;
            checked += 1;
        }
    }
    ensure(should_widen(0, 0, 0.5), || "N=0 with no children must widen".into())?;

    ensure(decay_lambda(0.1_f64, 0, 1000) == 0.1, || "decay at t=0".into())?;
    ensure(decay_lambda(0.1_f64, 1000, 1000) == 0.0, || "decay at t=T".into())?;
    ensure((decay_lambda(0.1_f64, 500, 1000) - 0.05).abs() <= 1e-15, || "decay at t=T/2".into())?;
    for (t1, t2) in [(0u64, 1000u64), (100, 300), (2, 998), (10, 10)] {
        let lhs = decay_lambda(0.1_f64, t1, 1000) + decay_lambda(0.1_f64, t2, 1000);
        let rhs = 2.0 * decay_lambda(0.1_f64, (t1 + t2) / 2, 1000);
        ensure((lhs - rhs).abs() <= 1e-15, || format!("decay not linear at ({t1}, {t2})"))?;
    }
    Ok(format!("3 uct rows within 1e-9, {checked} widening cases exact, decay endpoints exact"))
}

fn c2_deterministic_run() -> Result<String, String> {
    let script = traced_script();
    let mut exports = Vec::new();
    for _ in 0..5 {
        let mut engine = script.engine(traced_config());
        engine.run().map_err(|e| e.to_string())?;
        let trace: Vec<_> = engine
            .history()
            .iter()
            .map(|a| (a.t, a.phase, a.action, a.parent.0, a.node.map_or(usize::MAX, |n| n.0)))
            .collect();
        ensure(trace == HAND_TRACE, || format!("trace differs from the hand trace: {trace:?}"))?;
        ensure(engine.tree().len() == 11, || format!("{} nodes instead of 11", engine.tree().len()))?;
        exports.push(engine.export_json());
    }
    ensure(exports.windows(2).all(|w| w[0] == w[1]), || "repetitions differ".into())?;

    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let path = dir.path().join(CHECKPOINT_FILE);
    let mut first = script.engine(traced_config()).with_checkpoints(&path, 1000);
    let done = first.run_until(5).map_err(|e| e.to_string())?;
    ensure(!done && first.t() == 5, || format!("paused at t={} (done={done})", first.t()))?;
    drop(first);
    let ckpt = Checkpoint::load(&path).map_err(|e| e.to_string())?;
    let mut resumed = Engine::resume(traced_config(), &line_dataset(), script.gateway(), script.evaluator(), ckpt)
        .map_err(|e| e.to_string())?;
    resumed.run().map_err(|e| e.to_string())?;
    ensure(resumed.export_json() == exports[0], || "resumed export differs".into())?;
    Ok(format!("5 identical exports of {} bytes, resume at t=5 identical, hand trace matched", exports[0].len()))
}

/// Orders that fault after one step; registered, so they reach the driver.
const FAULTY: [&[usize]; 2] = [&[1], &[2, 3]];
/// Never registered, so the evaluator reports a parse error.
const UNKNOWN: &[usize] = &[9, 9, 9];

fn c3_fuzz_invariants() -> Result<String, String> {
    let orders = all_orders();
    let mut registered = orders.clone();
    registered.extend(FAULTY.iter().map(|o| o.to_vec()));
    let mut offered = registered.clone();
    offered.push(UNKNOWN.to_vec());
    let mut exhausted = 0;
    let mut attempts = 0u64;
    for seed in 0..1000u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let config = EvolutionConfig {
            n_init: Some(rng.random_range(1..=4)),
            budget: rng.random_range(8..=60),
            max_depth: rng.random_range(1..=4),
            k: rng.random_range(1..=2),
            lambda0: rng.random_range(0.0..0.5),
            alpha: rng.random_range(0.3..0.8),
            seed,
            problem: ProblemKind::Tsp,
            ..EvolutionConfig::default()
        };
        let backend = FuzzBackend::new(seed, offered.clone(), rng.random_range(0.0..0.6));
        let gateway = Gateway::new(Box::new(backend), "fuzz", RetryPolicy::immediate(1));
        let evaluator = Evaluator::new(&line_dataset(), Executor::Native(registry(&registered)), 5.0, 0)
            .map_err(|e| e.to_string())?;
        let mut engine = Engine::new(config.clone(), &line_dataset(), gateway, evaluator).map_err(|e| e.to_string())?;
        match engine.run() {
            Ok(_) => {}
            Err(EngineError::InitializationExhausted { .. }) => exhausted += 1,
            Err(e) => return Err(format!("seed {seed}: {e}")),
        }
        attempts += engine.t();
        check_run(&engine, &config).map_err(|e| format!("seed {seed}: {e}"))?;
    }
    Ok(format!("1000 runs, {attempts} attempts, {exhausted} stopped during initialization, all invariants held"))
}

fn check_run(engine: &Engine, config: &EvolutionConfig) -> Result<(), String> {
    let tree = engine.tree();
    let bounds = engine.bounds();
    let history = engine.history();

    let valid = history.iter().filter(|a| a.node.is_some()).count();
    ensure(history.len() as u64 == engine.t(), || "t differs from the attempt count".into())?;
    ensure(tree.len() == valid + 1, || format!("{} nodes for {valid} valid attempts", tree.len()))?;
    ensure(tree.root().visits as usize == valid, || "root visits differ from valid attempts".into())?;

    for n in tree.nodes() {
        if !n.is_leaf() {
            let best = n.children.iter().map(|c| tree.node(*c).unwrap().quality).fold(f64::NEG_INFINITY, f64::max);
            ensure(n.quality == best, || format!("node {} Q {} but best child {best}", n.id, n.quality))?;
        }
        if !n.is_root() || !n.is_leaf() {
            ensure(bounds.q_min <= n.quality && n.quality <= bounds.q_max, || format!("node {} Q outside bounds", n.id))?;
        }
        ensure(n.depth <= config.max_depth + 1, || format!("node {} at depth {}", n.id, n.depth))?;
        ensure(n.depth <= config.max_depth || n.is_leaf(), || format!("node {} below the depth cap has children", n.id))?;
    }

    let mut widened: HashMap<(u64, bool, usize), usize> = HashMap::new();
    for a in history.iter().filter(|a| matches!(a.phase, Phase::RootWiden | Phase::Widen)) {
        *widened.entry((a.iteration, a.phase == Phase::RootWiden, a.parent.0)).or_default() += 1;
    }
    ensure(widened.values().all(|&c| c <= 1), || "a node widened twice in one traversal".into())?;

    let curve = engine.curve();
    ensure(curve.windows(2).all(|w| w[0].t < w[1].t && w[0].best_g < w[1].best_g), || "curve not monotone".into())?;

    let mut all: Vec<(NodeId, f64)> = tree
        .nodes()
        .iter()
        .filter_map(|n| n.performance().map(|g| (n.id, g)))
        .collect();
    all.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    all.truncate(10);
    let elite: Vec<(NodeId, f64)> = engine.elite().entries().iter().map(|e| (e.node, e.performance)).collect();
    ensure(elite == all, || format!("elite {elite:?} differs from brute force {all:?}"))?;
    if let Some(best) = all.first() {
        ensure(curve.last().map(|p| p.best_g) == Some(best.1), || "curve does not end at the best".into())?;
    }
    Ok(())
}

fn objectives(h: &NativeHeuristic, spec: &DatasetSpec) -> Result<(Vec<ProblemInstance>, Vec<f64>), String> {
    let ds = spec.generate().map_err(|e| e.to_string())?;
    let scores = ds
        .instances
        .iter()
        .map(|inst| score_instance(h, inst, 0).map_err(|e| e.to_string()))
        .collect::<Result<Vec<f64>, String>>()?;
    Ok((ds.instances, scores))
}

fn c4_oracle_dominance() -> Result<String, String> {
    let tsp = NativeHeuristic::tsp(baseline_nearest_greedy());
    let (instances, scores) = objectives(&tsp, &DatasetSpec::Tsp { count: 100, nodes: 10, seed: 0 })?;
    let mut tsp_gap = 0.0;
    for (inst, score) in instances.iter().zip(&scores) {
        let ProblemInstance::Tsp(t) = inst else { unreachable!() };
        let (greedy, opt) = (-score, held_karp(t).map_err(|e| e.to_string())?);
        ensure(greedy >= opt - 1e-9, || format!("greedy {greedy} below optimum {opt}"))?;
        tsp_gap += 100.0 * (greedy - opt) / opt / 100.0;
    }
    ensure(tsp_gap > 0.0 && tsp_gap < 60.0, || format!("TSP mean gap {tsp_gap:.3}% outside (0, 60)"))?;

    let kp = NativeHeuristic::kp(baseline_kp_ratio());
    let (instances, scores) = objectives(&kp, &DatasetSpec::Kp { count: 100, items: 20, capacity: 5.0, seed: 0 })?;
    let mut kp_gap = 0.0;
    for (inst, greedy) in instances.iter().zip(&scores) {
        let ProblemInstance::Kp(k) = inst else { unreachable!() };
        let opt = kp_exact(k).map_err(|e| e.to_string())?;
        ensure(*greedy <= opt + 1e-9, || format!("greedy {greedy} above optimum {opt}"))?;
        kp_gap += 100.0 * (opt - greedy) / opt / 100.0;
    }
    ensure(kp_gap < 5.0, || format!("KP mean gap {kp_gap:.3}% not below 5"))?;
    Ok(format!("TSP10 greedy gap {tsp_gap:.2}%, KP20 greedy gap {kp_gap:.2}%, no instance beat its optimum"))
}

fn c5_greedy_baselines() -> Result<String, String> {
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let tsp = NativeHeuristic::tsp(baseline_nearest_greedy());
    let (_, scores) = objectives(&tsp, &DatasetSpec::Tsp { count: 1000, nodes: 50, seed: 0 })?;
    let tsp_len = -mean(&scores);
    let kp = NativeHeuristic::kp(baseline_kp_ratio());
    let (_, scores) = objectives(&kp, &DatasetSpec::Kp { count: 1000, items: 100, capacity: 25.0, seed: 0 })?;
    let kp_value = mean(&scores);
    let tsp_ok = (tsp_len - 6.959).abs() <= 0.05;
    let kp_ok = (kp_value - 40.225).abs() <= 0.05;
    let mark = |ok: bool| if ok { "ok" } else { "off" };
    let detail = format!(
        "TSP50 length {tsp_len:.4} (want 6.959 +- 0.05, {}), KP100 value {kp_value:.4} (want 40.225 +- 0.05, {})",
        mark(tsp_ok),
        mark(kp_ok)
    );
    ensure(tsp_ok && kp_ok, || detail.clone())?;
    Ok(detail)
}

fn c6_bpp_baselines() -> Result<String, String> {
    let spec = DatasetSpec::Bpp { streams: vec![heurtree::problems::BppScale { items: 1000, capacity: 100 }; 5], seed: 0 };
    let ds = spec.generate().map_err(|e| e.to_string())?;
    let (bf, ff) = (NativeHeuristic::bpp(baseline_best_fit()), NativeHeuristic::bpp(baseline_first_fit()));
    let mut gaps = (Vec::new(), Vec::new());
    for inst in &ds.instances {
        let ProblemInstance::Bpp(stream) = inst else { unreachable!() };
        let total: u64 = stream.items().iter().map(|&s| u64::from(s)).sum();
        let lb = total.div_ceil(u64::from(stream.capacity())) as f64;
        let bins = |h: &NativeHeuristic| score_instance(h, inst, 0).map(|s| -s).map_err(|e| e.to_string());
        gaps.0.push(100.0 * (bins(&bf)? - lb) / lb);
        gaps.1.push(100.0 * (bins(&ff)? - lb) / lb);
    }
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let (bf_gap, ff_gap) = (mean(&gaps.0), mean(&gaps.1));
    let wins = gaps.0.iter().zip(&gaps.1).filter(|(b, f)| b <= f).count();
    let detail = format!("best fit {bf_gap:.2}% (want 4.77 +- 1.5), first fit {ff_gap:.2}% (want 5.02 +- 1.5), best fit <= first fit on {wins}/5");
    ensure((bf_gap - 4.77).abs() <= 1.5 && (ff_gap - 5.02).abs() <= 1.5 && wins >= 4, || detail.clone())?;
    Ok(detail)
}

fn c7_asp_validity() -> Result<String, String> {
    let (n, w) = (12, 7);
    let space = AspSpace::new(n, w).map_err(|e| e.to_string())?;
    let set = construct_asp(space, &baseline_asp_constant()).map_err(|e| e.to_string())?.vectors;
    ensure(!set.is_empty() && set.len() <= 792, || format!("size {} outside 1..=792", set.len()))?;
    for v in &set {
        ensure(v.len() == n && v.iter().all(|&x| x <= 2), || format!("{v:?} is not in {{0,1,2}}^{n}"))?;
        ensure(v.iter().filter(|&&x| x != 0).count() == w, || format!("{v:?} does not have weight {w}"))?;
    }
    let mut sorted = set.clone();
    sorted.sort();
    sorted.dedup();
    ensure(sorted.len() == set.len(), || "repeated vectors".into())?;
    let good = |a: u8, b: u8, c: u8| {
        let zeros = [a, b, c].iter().filter(|&&x| x == 0).count();
        let ones = [a, b, c].iter().filter(|&&x| x == 1).count();
        let twos = 3 - zeros - ones;
        (zeros, ones, twos) == (2, 1, 0) || (zeros, ones, twos) == (2, 0, 1) || (zeros, ones, twos) == (1, 1, 1)
    };
    let mut triples = 0u64;
    for i in 0..set.len() {
        for j in i + 1..set.len() {
            for k in j + 1..set.len() {
                let (a, b, c) = (&set[i], &set[j], &set[k]);
                ensure((0..n).any(|p| good(a[p], b[p], c[p])), || format!("triple ({i}, {j}, {k}) is not admissible"))?;
                triples += 1;
            }
        }
    }
    Ok(format!("|A| = {} (at most 792), {triples} triples verified", set.len()))
}

fn c8_prompt_fidelity() -> Result<String, String> {
    let spec = PromptSpec::for_problem(ProblemKind::Tsp);
    let cand = |i: usize| ContextCandidate {
        code: format!("def select_next_node(current_node, destination_node, unvisited_nodes, distance_matrix):\n    return {i}"),
        description: format!("idea {i}"),
        objective: Some(6.0 + i as f64),
    };
    let expected: [(ActionKind, usize, &str); 6] = [
        (ActionKind::I1, 0, "First, describe the design idea and main steps of your algorithm in one sentence. The description must be inside a brace outside the code implementation."),
        (ActionKind::E1, 3, "Please create a new algorithm that has a totally different form from the given algorithms."),
        (ActionKind::E2, 2, "Please create a new algorithm that has a similar form to the No.2 algorithm and is inspired by the No.1 algorithm."),
        (ActionKind::M1, 1, "Please create a new algorithm that has a different form but can be a modified version of the provided algorithm."),
        (ActionKind::M2, 1, "help me in creating a new algorithm that has different parameter settings to equations compared to the provided algorithm."),
        (ActionKind::S1, 3, "Please help me create a new algorithm that is inspired by all the above algorithms with its objective value lower than any of them."),
    ];
    for (action, arity, sentence) in expected {
        let context: Vec<ContextCandidate> = (1..=arity).map(cand).collect();
        let text = render_prompt(action, &spec, &context, false).map_err(|e| e.to_string())?.user_text;
        ensure(text.contains(sentence), || format!("{action} prompt lacks \"{sentence}\""))?;
        ensure(text.contains(&spec.task_description), || format!("{action} prompt lacks the task description"))?;
        if action == ActionKind::I1 {
            ensure(!text.contains("existing algorithms"), || "i1 prompt shows existing algorithms".into())?;
        }
    }
    let align = render_alignment_prompt(&spec, "idea", &cand(1).code, false).map_err(|e| e.to_string())?.user_text;
    let sentence = "re-describe the algorithm using less than 3 sentences";
    ensure(align.contains(sentence), || "alignment prompt lacks its instruction".into())?;
    Ok("6 action prompts and the alignment prompt carry their sentences verbatim".into())
}

fn c9_argmax_invariance() -> Result<String, String> {
    let mut decisions = 0u64;
    for seed in 0..1000u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (a, b) = (rng.random_range(0.01..100.0), rng.random_range(-1000.0..1000.0));
        let size = rng.random_range(2..40);
        let mut plain = Tree::new();
        let mut moved = Tree::new();
        let mut perfs = Vec::new();
        for i in 0..size {
            let parent = NodeId(rng.random_range(0..=i));
            // Coarse values make exact ties common.
            let g = -f64::from(rng.random_range(0..30u32)) * 0.5;
            perfs.push(g);
            let code = format!("h{i}");
            let x = plain.attach(parent, Candidate::evaluated(code.clone(), "d", g), ActionKind::M1).map_err(|e| e.to_string())?;
            let y = moved.attach(parent, Candidate::evaluated(code, "d", a * g + b), ActionKind::M1).map_err(|e| e.to_string())?;
            assert_eq!(x, y);
            let added = rng.random_range(1..4);
            plain.backpropagate(parent, added).map_err(|e| e.to_string())?;
            moved.backpropagate(parent, added).map_err(|e| e.to_string())?;
        }
        let q_max = perfs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let q_min = perfs.iter().copied().fold(f64::INFINITY, f64::min);
        let bounds = Bounds { q_max, q_min };
        let shifted = Bounds { q_max: a * q_max + b, q_min: a * q_min + b };
        let lambda = if seed % 4 == 0 { 0.0 } else { rng.random_range(0.0..2.0) };
        for node in plain.nodes().iter().filter(|n| !n.is_leaf()) {
            let x = select_child(&plain, node.id, &bounds, lambda).map_err(|e| e.to_string())?;
            let y = select_child(&moved, node.id, &shifted, lambda).map_err(|e| e.to_string())?;
            ensure(x == y, || format!("tree {seed}, node {}: {x} versus {y} (a={a}, b={b})", node.id))?;
            decisions += 1;
        }
    }
    Ok(format!("1000 trees, {decisions} selections unchanged by the affine map"))
}
