use serde::{Deserialize, Serialize};

use super::EngineError;
use crate::evaluator::{score_instance, EvalStatus, Evaluator, Executor, NativeHeuristic};
use crate::problems::asp::baseline_asp_constant;
use crate::problems::bpp::{baseline_best_fit, baseline_first_fit, bpp_lower_bound};
use crate::problems::kp::{baseline_kp_ratio, KP_EXACT_MAX};
use crate::problems::tsp::{baseline_nearest_greedy, HELD_KARP_MAX};
use crate::problems::{held_karp, kp_exact, Dataset, DatasetSpec, ProblemInstance};
use crate::ProblemKind;

/// A heuristic measured on a test set, in the problem's natural units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FinalReport {
    pub problem: ProblemKind,
    pub instances: usize,
    pub status: EvalStatus,
    /// Mean tour length, knapsack value, bin count or set size.
    pub mean_objective: Option<f64>,
    /// What the gap is measured against.
    pub reference: Option<String>,
    /// Mean relative gap to the reference, in percent (positive is worse).
    pub mean_gap_pct: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineRow {
    pub name: String,
    pub mean_objective: f64,
    pub reference: Option<String>,
    pub mean_gap_pct: Option<f64>,
}

/// Natural-unit objective from a larger-is-better score.
fn objective_of(problem: ProblemKind, score: f64) -> f64 {
    match problem {
        ProblemKind::Tsp | ProblemKind::Bpp => -score,
        ProblemKind::Kp | ProblemKind::Asp => score,
    }
}

/// Reference value for one instance and its description, when one exists:
/// the exact optimum for small TSP and KP, the classical greedy beyond that,
/// the volume lower bound for BPP.
fn reference_of(inst: &ProblemInstance) -> Option<(f64, &'static str)> {
    match inst {
        ProblemInstance::Tsp(t) if t.len() <= HELD_KARP_MAX => held_karp(t).ok().map(|v| (v, "exact optimum")),
        ProblemInstance::Tsp(_) => score_instance(&NativeHeuristic::tsp(baseline_nearest_greedy()), inst, 0)
            .ok()
            .map(|s| (-s, "nearest greedy")),
        ProblemInstance::Kp(k) if k.len() <= KP_EXACT_MAX => kp_exact(k).ok().map(|v| (v, "exact optimum")),
        ProblemInstance::Kp(_) => score_instance(&NativeHeuristic::kp(baseline_kp_ratio()), inst, 0)
            .ok()
            .map(|s| (s, "ratio greedy")),
        ProblemInstance::Bpp(b) => Some((bpp_lower_bound(b) as f64, "volume lower bound")),
        ProblemInstance::Asp(_) => None,
    }
}

fn gap_pct(problem: ProblemKind, objective: f64, reference: f64) -> f64 {
    let gap = match problem {
        ProblemKind::Tsp | ProblemKind::Bpp => objective - reference,
        ProblemKind::Kp | ProblemKind::Asp => reference - objective,
    };
    100.0 * gap / reference
}

fn summarize(problem: ProblemKind, dataset: &Dataset, objectives: &[f64]) -> (f64, Option<String>, Option<f64>) {
    let mean = objectives.iter().sum::<f64>() / objectives.len() as f64;
    let refs: Option<Vec<(f64, &str)>> = dataset.instances.iter().map(reference_of).collect();
    match refs {
        Some(refs) if !refs.is_empty() => {
            let mut names: Vec<&str> = refs.iter().map(|r| r.1).collect();
            names.dedup();
            let gaps: f64 = objectives.iter().zip(&refs).map(|(&o, &(r, _))| gap_pct(problem, o, r)).sum();
            (mean, Some(names.join(" / ")), Some(gaps / objectives.len() as f64))
        }
        _ => (mean, None, None),
    }
}

/// Measures `code` on a freshly generated test set. For TSP every instance
/// is solved once per start node and its objective averaged over the starts;
/// other problems use a single run.
pub fn evaluate_final(
    code: &str,
    executor: Executor,
    test_set: &DatasetSpec,
    timeout_s: f64,
    starts: &[usize],
) -> Result<FinalReport, EngineError> {
    let dataset = test_set
        .generate()
        .map_err(|e| crate::search::ConfigError::Invalid(format!("test set: {e}")))?;
    let problem = dataset.problem;
    let starts: &[usize] = match (problem, starts) {
        (ProblemKind::Tsp, []) => return Err(crate::search::ConfigError::Invalid("no start nodes given".into()).into()),
        (ProblemKind::Tsp, s) => s,
        _ => &[0],
    };
    let mut evaluator = Evaluator::new(&dataset, executor, timeout_s, starts[0])?;
    let mut objectives = vec![0.0; dataset.len()];
    for &start in starts {
        evaluator.set_start_node(start);
        let outcome = evaluator.evaluate(code);
        let Some(scores) = outcome.scores.filter(|_| outcome.status == EvalStatus::Ok) else {
            return Ok(FinalReport {
                problem,
                instances: dataset.len(),
                status: outcome.status,
                mean_objective: None,
                reference: None,
                mean_gap_pct: None,
                error: outcome.error,
            });
        };
        for (acc, s) in objectives.iter_mut().zip(scores) {
            *acc += objective_of(problem, s) / starts.len() as f64;
        }
    }
    let (mean, reference, gap) = summarize(problem, &dataset, &objectives);
    Ok(FinalReport {
        problem,
        instances: dataset.len(),
        status: EvalStatus::Ok,
        mean_objective: Some(mean),
        reference,
        mean_gap_pct: gap,
        error: None,
    })
}

/// The classical baselines of `test_set`'s problem, run natively.
pub fn bench_baselines(test_set: &DatasetSpec) -> Result<Vec<BaselineRow>, EngineError> {
    let dataset = test_set
        .generate()
        .map_err(|e| crate::search::ConfigError::Invalid(format!("test set: {e}")))?;
    let problem = dataset.problem;
    let baselines: Vec<(&str, NativeHeuristic)> = match problem {
        ProblemKind::Tsp => vec![("nearest greedy", NativeHeuristic::tsp(baseline_nearest_greedy()))],
        ProblemKind::Kp => vec![("ratio greedy", NativeHeuristic::kp(baseline_kp_ratio()))],
        ProblemKind::Bpp => vec![
            ("best fit", NativeHeuristic::bpp(baseline_best_fit())),
            ("first fit", NativeHeuristic::bpp(baseline_first_fit())),
        ],
        ProblemKind::Asp => vec![("constant priority", NativeHeuristic::asp(baseline_asp_constant()))],
    };
    baselines
        .into_iter()
        .map(|(name, h)| {
            let objectives = dataset
                .instances
                .iter()
                .map(|inst| score_instance(&h, inst, 0).map(|s| objective_of(problem, s)))
                .collect::<Result<Vec<f64>, _>>()
                .map_err(|e| crate::search::ConfigError::Invalid(format!("{name}: {e}")))?;
            let (mean, reference, gap) = summarize(problem, &dataset, &objectives);
            Ok(BaselineRow { name: name.to_string(), mean_objective: mean, reference, mean_gap_pct: gap })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evaluator::{NativeRegistry, KEY_BEST_FIT, KEY_NEAREST_GREEDY};
    use crate::problems::BppScale;

    #[test]
    fn small_tsp_gap_is_against_the_optimum() {
        let spec = DatasetSpec::Tsp { count: 5, nodes: 8, seed: 4 };
        let r = evaluate_final(KEY_NEAREST_GREEDY, Executor::Native(NativeRegistry::with_baselines()), &spec, 30.0, &[0])
            .unwrap();
        assert_eq!(r.status, EvalStatus::Ok);
        assert_eq!(r.reference.as_deref(), Some("exact optimum"));
        assert!(r.mean_gap_pct.unwrap() >= 0.0);
    }

    #[test]
    fn multi_start_averages_per_instance() {
        let spec = DatasetSpec::Tsp { count: 3, nodes: 9, seed: 2 };
        let run = |starts: &[usize]| {
            evaluate_final(KEY_NEAREST_GREEDY, Executor::Native(NativeRegistry::with_baselines()), &spec, 30.0, starts)
                .unwrap()
                .mean_objective
                .unwrap()
        };
        let (a, b, c) = (run(&[0]), run(&[1]), run(&[2]));
        assert!((run(&[0, 1, 2]) - (a + b + c) / 3.0).abs() < 1e-12);
        assert!(evaluate_final("x", Executor::Native(NativeRegistry::new()), &spec, 5.0, &[]).is_err());
    }

    #[test]
    fn failed_candidate_reports_status() {
        let spec = DatasetSpec::Tsp { count: 2, nodes: 5, seed: 0 };
        let r = evaluate_final("nope", Executor::Native(NativeRegistry::new()), &spec, 5.0, &[0]).unwrap();
        assert_eq!(r.status, EvalStatus::ParseError);
        assert!(r.mean_objective.is_none());
    }

    #[test]
    fn bpp_bench_matches_final_evaluation() {
        let spec = DatasetSpec::Bpp { streams: vec![BppScale { items: 300, capacity: 100 }; 2], seed: 5 };
        let rows = bench_baselines(&spec).unwrap();
        assert_eq!(rows.len(), 2);
        let r = evaluate_final(KEY_BEST_FIT, Executor::Native(NativeRegistry::with_baselines()), &spec, 30.0, &[0]).unwrap();
        assert_eq!(r.mean_objective, Some(rows[0].mean_objective));
        assert_eq!(r.mean_gap_pct, rows[0].mean_gap_pct);
        assert!(rows[0].mean_objective <= rows[1].mean_objective + 1.0);
    }
}
