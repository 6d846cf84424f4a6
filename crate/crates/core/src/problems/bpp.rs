use rand::Rng;
use rand_distr::{Distribution, Weibull};
use serde::{Deserialize, Serialize};

use super::{DriverError, HeuristicFault};

pub const WEIBULL_SHAPE: f64 = 3.0;
pub const WEIBULL_SCALE: f64 = 45.0;

/// Online stream of integer item sizes, each at most the bin capacity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "BppWire", into = "BppWire")]
pub struct BppStream {
    items: Vec<u32>,
    capacity: u32,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BppWire {
    items: Vec<u32>,
    capacity: u32,
}

impl TryFrom<BppWire> for BppStream {
    type Error = DriverError;

    fn try_from(w: BppWire) -> Result<Self, Self::Error> {
        BppStream::new(w.items, w.capacity)
    }
}

impl From<BppStream> for BppWire {
    fn from(s: BppStream) -> Self {
        BppWire { items: s.items, capacity: s.capacity }
    }
}

impl BppStream {
    pub fn new(items: Vec<u32>, capacity: u32) -> Result<Self, DriverError> {
        if capacity == 0 {
            return Err(DriverError::InvalidInstance("capacity must be positive".into()));
        }
        if let Some(bad) = items.iter().find(|&&s| s == 0 || s > capacity) {
            return Err(DriverError::InvalidInstance(format!("item size {bad} outside [1, {capacity}]")));
        }
        Ok(Self { items, capacity })
    }

    pub fn items(&self) -> &[u32] {
        &self.items
    }

    pub fn capacity(&self) -> u32 {
        self.capacity
    }
}

/// Weibull(shape 3, scale 45) sizes, rounded up and clipped to `[1, capacity]`.
pub fn gen_weibull_bpp<R: Rng + ?Sized>(n: usize, capacity: u32, rng: &mut R) -> BppStream {
    let dist = Weibull::new(WEIBULL_SCALE, WEIBULL_SHAPE).expect("valid Weibull parameters");
    let items = (0..n)
        .map(|_| {
            let s: f64 = dist.sample(rng);
            (s.ceil() as u32).clamp(1, capacity)
        })
        .collect();
    BppStream::new(items, capacity).expect("clipped sizes are valid")
}

/// Key heuristic: one preference score per bin that can hold the item.
/// `bins` holds residual capacities of those bins in opening order.
pub trait BppHeuristic: Send + Sync {
    fn score(&self, item: u32, bins: &[u32]) -> Result<Vec<f64>, HeuristicFault>;
}

impl<F> BppHeuristic for F
where
    F: Fn(u32, &[u32]) -> Result<Vec<f64>, HeuristicFault> + Send + Sync,
{
    fn score(&self, item: u32, bins: &[u32]) -> Result<Vec<f64>, HeuristicFault> {
        self(item, bins)
    }
}

/// Prefers the bin left with the least room.
#[derive(Debug, Clone, Copy, Default)]
pub struct BestFit;

impl BppHeuristic for BestFit {
    fn score(&self, item: u32, bins: &[u32]) -> Result<Vec<f64>, HeuristicFault> {
        Ok(bins.iter().map(|&r| -(f64::from(r) - f64::from(item))).collect())
    }
}

/// Prefers the earliest opened bin.
#[derive(Debug, Clone, Copy, Default)]
pub struct FirstFit;

impl BppHeuristic for FirstFit {
    fn score(&self, _item: u32, bins: &[u32]) -> Result<Vec<f64>, HeuristicFault> {
        Ok((0..bins.len()).map(|i| -(i as f64)).collect())
    }
}

pub fn baseline_best_fit() -> BestFit {
    BestFit
}

pub fn baseline_first_fit() -> FirstFit {
    FirstFit
}

/// Packs the stream online and returns the number of bins used. Each item goes
/// to the highest-scoring fitting bin (ties to the earliest), or to a new bin
/// when none fits.
pub fn construct_bpp_online<H: BppHeuristic + ?Sized>(stream: &BppStream, h: &H) -> Result<usize, DriverError> {
    let mut residual: Vec<u32> = Vec::new();
    let mut fitting: Vec<usize> = Vec::new();
    let mut offered: Vec<u32> = Vec::new();
    for &item in &stream.items {
        fitting.clear();
        fitting.extend((0..residual.len()).filter(|&b| residual[b] >= item));
        if fitting.is_empty() {
            residual.push(stream.capacity - item);
            continue;
        }
        offered.clear();
        offered.extend(fitting.iter().map(|&b| residual[b]));
        let scores = h.score(item, &offered)?;
        if scores.len() != fitting.len() {
            return Err(DriverError::WrongScoreCount { expected: fitting.len(), got: scores.len() });
        }
        let mut best = 0;
        for (i, &s) in scores.iter().enumerate() {
            if !s.is_finite() {
                return Err(DriverError::NonFiniteScore);
            }
            if s > scores[best] {
                best = i;
            }
        }
        residual[fitting[best]] -= item;
    }
    Ok(residual.len())
}

/// `ceil(sum of sizes / capacity)`.
pub fn bpp_lower_bound(stream: &BppStream) -> usize {
    let total: u64 = stream.items.iter().map(|&s| u64::from(s)).sum();
    total.div_ceil(u64::from(stream.capacity)) as usize
}

/// Relative excess of `bins` over the lower bound.
pub fn bpp_gap(stream: &BppStream, bins: usize) -> f64 {
    let lb = bpp_lower_bound(stream) as f64;
    (bins as f64 - lb) / lb
}
