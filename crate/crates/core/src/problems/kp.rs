use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{DriverError, HeuristicFault, CAPACITY_EPS};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "KpWire", into = "KpWire")]
pub struct KpInstance {
    values: Vec<f64>,
    weights: Vec<f64>,
    capacity: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct KpWire {
    values: Vec<f64>,
    weights: Vec<f64>,
    capacity: f64,
}

impl TryFrom<KpWire> for KpInstance {
    type Error = DriverError;

    fn try_from(w: KpWire) -> Result<Self, Self::Error> {
        KpInstance::new(w.values, w.weights, w.capacity)
    }
}

impl From<KpInstance> for KpWire {
    fn from(k: KpInstance) -> Self {
        KpWire { values: k.values, weights: k.weights, capacity: k.capacity }
    }
}

impl KpInstance {
    pub fn new(values: Vec<f64>, weights: Vec<f64>, capacity: f64) -> Result<Self, DriverError> {
        let invalid = |m: &str| Err(DriverError::InvalidInstance(m.to_string()));
        if values.len() != weights.len() {
            return invalid("values and weights differ in length");
        }
        if !(capacity.is_finite() && capacity >= 0.0) {
            return invalid("capacity must be finite and nonnegative");
        }
        if values.iter().chain(&weights).any(|x| !(x.is_finite() && *x > 0.0)) {
            return invalid("values and weights must be finite and positive");
        }
        Ok(Self { values, weights, capacity })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn capacity(&self) -> f64 {
        self.capacity
    }
}

/// `n` items with values and weights drawn from U(0, 1); all values first, then all weights.
pub fn gen_kp<R: Rng + ?Sized>(n: usize, capacity: f64, rng: &mut R) -> KpInstance {
    let values = (0..n).map(|_| positive_unit(rng)).collect();
    let weights = (0..n).map(|_| positive_unit(rng)).collect();
    KpInstance::new(values, weights, capacity).expect("generated items are valid")
}

fn positive_unit<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    loop {
        let x: f64 = rng.random();
        if x > 0.0 {
            return x;
        }
    }
}

/// Key heuristic: given only the items that still fit, returns a position in that list.
pub trait KpHeuristic: Send + Sync {
    fn select_next_item(&self, remaining_capacity: f64, weights: &[f64], values: &[f64])
        -> Result<usize, HeuristicFault>;
}

impl<F> KpHeuristic for F
where
    F: Fn(f64, &[f64], &[f64]) -> Result<usize, HeuristicFault> + Send + Sync,
{
    fn select_next_item(&self, remaining_capacity: f64, weights: &[f64], values: &[f64]) -> Result<usize, HeuristicFault> {
        self(remaining_capacity, weights, values)
    }
}

/// Largest value-to-weight ratio; ties go to the earliest item.
#[derive(Debug, Clone, Copy, Default)]
pub struct RatioGreedy;

impl KpHeuristic for RatioGreedy {
    fn select_next_item(&self, _remaining: f64, weights: &[f64], values: &[f64]) -> Result<usize, HeuristicFault> {
        let mut best: Option<(usize, f64)> = None;
        for (i, (v, w)) in values.iter().zip(weights).enumerate() {
            let r = v / w;
            if best.is_none_or(|(_, b)| r > b) {
                best = Some((i, r));
            }
        }
        best.map(|(i, _)| i).ok_or_else(|| HeuristicFault("no item offered".into()))
    }
}

pub fn baseline_kp_ratio() -> RatioGreedy {
    RatioGreedy
}

#[derive(Debug, Clone, PartialEq)]
pub struct KpSolution {
    pub items: Vec<usize>,
    pub value: f64,
}

/// Adds the item chosen by `h` among the currently fitting ones until none fits.
pub fn construct_kp<H: KpHeuristic + ?Sized>(inst: &KpInstance, h: &H) -> Result<KpSolution, DriverError> {
    let mut remaining = inst.capacity;
    let mut taken = vec![false; inst.len()];
    let mut items = Vec::new();
    let mut value = 0.0;
    loop {
        let feasible: Vec<usize> = (0..inst.len())
            .filter(|&i| !taken[i] && inst.weights[i] <= remaining + CAPACITY_EPS)
            .collect();
        if feasible.is_empty() {
            break;
        }
        let w: Vec<f64> = feasible.iter().map(|&i| inst.weights[i]).collect();
        let v: Vec<f64> = feasible.iter().map(|&i| inst.values[i]).collect();
        let pick = h.select_next_item(remaining, &w, &v)?;
        let item = *feasible.get(pick).ok_or(DriverError::HeuristicReturnedOutOfRange(pick))?;
        taken[item] = true;
        items.push(item);
        value += inst.values[item];
        remaining -= inst.weights[item];
    }
    Ok(KpSolution { items, value })
}

pub const KP_EXACT_MAX: usize = 30;

/// Exact optimum by depth-first branch and bound with the fractional relaxation bound.
pub fn kp_exact(inst: &KpInstance) -> Result<f64, DriverError> {
    let n = inst.len();
    if n > KP_EXACT_MAX {
        return Err(DriverError::TooLarge { size: n, max: KP_EXACT_MAX });
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        let ra = inst.values[a] / inst.weights[a];
        let rb = inst.values[b] / inst.weights[b];
        rb.total_cmp(&ra)
    });
    let v: Vec<f64> = order.iter().map(|&i| inst.values[i]).collect();
    let w: Vec<f64> = order.iter().map(|&i| inst.weights[i]).collect();
    let mut best = 0.0;
    branch(&v, &w, 0, inst.capacity + CAPACITY_EPS, 0.0, &mut best);
    Ok(best)
}

fn fractional_bound(v: &[f64], w: &[f64], from: usize, mut room: f64, mut value: f64) -> f64 {
    for i in from..v.len() {
        if w[i] <= room {
            room -= w[i];
            value += v[i];
        } else {
            return value + v[i] * room / w[i];
        }
    }
    value
}

fn branch(v: &[f64], w: &[f64], i: usize, room: f64, value: f64, best: &mut f64) {
    if value > *best {
        *best = value;
    }
    if i == v.len() || fractional_bound(v, w, i, room, value) <= *best {
        return;
    }
    if w[i] <= room {
        branch(v, w, i + 1, room - w[i], value + v[i], best);
    }
    branch(v, w, i + 1, room, value, best);
}
