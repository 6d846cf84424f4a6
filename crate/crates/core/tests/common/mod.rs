#![allow(dead_code)]

use std::collections::BTreeSet;
use std::sync::{Arc, Mutex};

use heurtree::engine::{Engine, Phase};
use heurtree::evaluator::{Evaluator, Executor, NativeHeuristic, NativeRegistry};
use heurtree::problems::{Dataset, DistMatrix, HeuristicFault, ProblemInstance, TspHeuristic, TspInstance};
use heurtree::search::EvolutionConfig;
use heurtree::{ActionKind, ProblemKind};
use heurtree_llm::{ChatBackend, ChatRequest, ChatResponse, Gateway, GatewayError, ReplayBackend, ReplayScript, RetryPolicy};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Nodes of the line instance: node `i` sits at `(i, 0)`.
pub const LINE_NODES: usize = 7;

/// Phrase that only the alignment template contains.
pub const ALIGN_MARKER: &str = "re-describe the algorithm";

pub fn line_dataset() -> Dataset {
    let coords = (0..LINE_NODES).map(|i| [i as f64, 0.0]).collect();
    Dataset {
        problem: ProblemKind::Tsp,
        seed: 0,
        params: serde_json::json!({ "line": LINE_NODES }),
        instances: vec![ProblemInstance::Tsp(TspInstance::from_coords(coords).unwrap())],
    }
}

/// Visits nodes in a fixed preference order, skipping visited ones.
pub struct FixedOrder(pub Vec<usize>);

impl TspHeuristic for FixedOrder {
    fn select_next_node(
        &self,
        _current: usize,
        _destination: usize,
        unvisited: &[usize],
        _dist: &DistMatrix,
    ) -> Result<usize, HeuristicFault> {
        self.0
            .iter()
            .copied()
            .find(|n| unvisited.contains(n))
            .ok_or_else(|| HeuristicFault("order exhausted".into()))
    }
}

/// Python text registered for `order`; identical to what the replies carry.
pub fn order_code(order: &[usize]) -> String {
    let list = order.iter().map(|n| n.to_string()).collect::<Vec<_>>().join(", ");
    format!(
        "def select_next_node(current_node, destination_node, unvisited_nodes, distance_matrix):\n    order = [{list}]\n    return next(n for n in order if n in unvisited_nodes)"
    )
}

pub fn reply(idea: &str, code: &str) -> String {
    format!("{{{idea}}}\n```python\n{code}\n```")
}

pub fn registry(orders: &[Vec<usize>]) -> NativeRegistry {
    let mut reg = NativeRegistry::new();
    let unique: BTreeSet<&Vec<usize>> = orders.iter().collect();
    for order in unique {
        reg.register(order_code(order), NativeHeuristic::tsp(FixedOrder(order.clone()))).unwrap();
    }
    reg
}

/// Builder for scripted runs: every valid generation consumes an action
/// reply and an alignment reply, an unparseable one only the action reply.
#[derive(Default, Clone)]
pub struct Script {
    pub responses: Vec<String>,
    pub orders: Vec<Vec<usize>>,
}

impl Script {
    pub fn valid(mut self, order: &[usize]) -> Self {
        let idea = format!("visit in order {order:?}");
        self.responses.push(reply(&idea, &order_code(order)));
        self.responses.push(format!("{{Prefers {order:?}.}}"));
        self.orders.push(order.to_vec());
        self
    }

    pub fn garbage(mut self) -> Self {
        self.responses.push("I cannot help with that.".into());
        self
    }

    pub fn gateway(&self) -> Gateway {
        replay_gateway(self.responses.clone())
    }

    pub fn evaluator(&self) -> Evaluator {
        Evaluator::new(&line_dataset(), Executor::Native(registry(&self.orders)), 10.0, 0).unwrap()
    }

    pub fn engine(&self, config: EvolutionConfig) -> Engine {
        Engine::new(config, &line_dataset(), self.gateway(), self.evaluator()).unwrap()
    }
}

pub fn replay_gateway(responses: Vec<String>) -> Gateway {
    Gateway::new(Box::new(ReplayBackend::new(ReplayScript::new(responses))), "replay", RetryPolicy::immediate(1))
}

pub fn line_config(budget: u64, n_init: usize, k: usize, seed: u64) -> EvolutionConfig {
    EvolutionConfig { n_init: Some(n_init), budget, k, seed, problem: ProblemKind::Tsp, ..EvolutionConfig::default() }
}

/// Tour lengths of the orders used by the scripted runs, worked out by hand on the line.
pub const HAND_LENGTHS: &[(&[usize], f64)] = &[
    (&[1, 2, 3, 4, 5, 6], 12.0),
    (&[2, 1, 3, 4, 5, 6], 14.0),
    (&[1, 3, 2, 4, 5, 6], 14.0),
    (&[3, 1, 2, 4, 5, 6], 16.0),
    (&[2, 1, 4, 3, 5, 6], 16.0),
    (&[1, 2, 3, 4, 6, 5], 12.0),
    (&[6, 5, 4, 3, 2, 1], 12.0),
    (&[2, 4, 1, 3, 5, 6], 18.0),
    (&[4, 1, 2, 3, 5, 6], 18.0),
    (&[5, 1, 2, 3, 4, 6], 20.0),
];

pub fn order(len_index: usize) -> &'static [usize] {
    HAND_LENGTHS[len_index].0
}

/// Init i1 (14), e1 (16); expand #1: e2 (16), m1 (12), m2 (18); root widen
/// e1 (14); expand #4: e2 (12), s1 (12), m1 (18), m2 (20).
pub fn traced_script() -> Script {
    [1, 3, 4, 0, 8, 2, 6, 5, 7, 9].iter().fold(Script::default(), |s, &i| s.valid(order(i)))
}

/// `(t, phase, action, parent, node)` of every attempt in the traced run
/// (N_I = 2, T = 10, k = 1, seed 11), derived by hand from the UCT scores.
pub const HAND_TRACE: [(u64, Phase, ActionKind, usize, usize); 10] = [
    (1, Phase::Init, ActionKind::I1, 0, 1),
    (2, Phase::Init, ActionKind::E1, 0, 2),
    (3, Phase::Expand, ActionKind::E2, 1, 3),
    (4, Phase::Expand, ActionKind::M1, 1, 4),
    (5, Phase::Expand, ActionKind::M2, 1, 5),
    (6, Phase::RootWiden, ActionKind::E1, 0, 6),
    (7, Phase::Expand, ActionKind::E2, 4, 7),
    (8, Phase::Expand, ActionKind::S1, 4, 8),
    (9, Phase::Expand, ActionKind::M1, 4, 9),
    (10, Phase::Expand, ActionKind::M2, 4, 10),
];

pub fn traced_config() -> EvolutionConfig {
    line_config(10, 2, 1, 11)
}

/// Every permutation of `1..LINE_NODES`, in lexicographic order.
pub fn all_orders() -> Vec<Vec<usize>> {
    fn rec(prefix: &mut Vec<usize>, rest: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if rest.is_empty() {
            out.push(prefix.clone());
            return;
        }
        for i in 0..rest.len() {
            let n = rest.remove(i);
            prefix.push(n);
            rec(prefix, rest, out);
            prefix.pop();
            rest.insert(i, n);
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), &mut (1..LINE_NODES).collect(), &mut out);
    out
}

/// Backend answering alignment prompts with a description and action prompts
/// with valid registered code or garbage, at random. Prompts are logged.
pub struct FuzzBackend {
    rng: ChaCha8Rng,
    orders: Vec<Vec<usize>>,
    garbage_rate: f64,
    pub prompts: Arc<Mutex<Vec<String>>>,
}

impl FuzzBackend {
    pub fn new(seed: u64, orders: Vec<Vec<usize>>, garbage_rate: f64) -> Self {
        Self { rng: ChaCha8Rng::seed_from_u64(seed), orders, garbage_rate, prompts: Arc::default() }
    }
}

impl ChatBackend for FuzzBackend {
    fn complete(&mut self, request: &ChatRequest) -> Result<ChatResponse, GatewayError> {
        let prompt = request.messages.last().map(|m| m.content.clone()).unwrap_or_default();
        self.prompts.lock().unwrap().push(prompt.clone());
        let text = if prompt.contains(ALIGN_MARKER) {
            "{Walks the line in a fixed order.}".to_string()
        } else if self.rng.random_bool(self.garbage_rate) {
            ["no code here", "```python\nprint('x')\n```", "{idea only}"][self.rng.random_range(0..3)].to_string()
        } else {
            let order = &self.orders[self.rng.random_range(0..self.orders.len())];
            reply("fixed order", &order_code(order))
        };
        Ok(ChatResponse { text, token_counts: None, latency_ms: 0 })
    }
}
