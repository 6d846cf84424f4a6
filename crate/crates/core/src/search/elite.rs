use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{HeuristicCandidate, NodeId, SearchError};
use crate::Scalar;

pub const ELITE_CAPACITY: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EliteEntry<S> {
    pub node: NodeId,
    pub performance: S,
}

/// The best candidates seen so far, best first. Equal performances keep creation order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EliteSet<S> {
    entries: Vec<EliteEntry<S>>,
}

impl<S: Scalar> Default for EliteSet<S> {
    fn default() -> Self {
        Self { entries: Vec::new() }
    }
}

impl<S: Scalar> EliteSet<S> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn entries(&self) -> &[EliteEntry<S>] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn ids(&self) -> Vec<NodeId> {
        self.entries.iter().map(|e| e.node).collect()
    }

    /// Inserts the candidate held by `node` if it makes the top ten. Returns
    /// whether the set changed.
    pub fn update(&mut self, node: NodeId, candidate: &HeuristicCandidate<S>) -> Result<bool, SearchError> {
        let performance = candidate.performance.ok_or(SearchError::InvalidCandidate)?;
        if !performance.is_finite() {
            return Err(SearchError::NonFiniteQuality);
        }
        let rank = self
            .entries
            .iter()
            .position(|e| performance > e.performance || (performance == e.performance && node < e.node))
            .unwrap_or(self.entries.len());
        if rank >= ELITE_CAPACITY {
            return Ok(false);
        }
        self.entries.insert(rank, EliteEntry { node, performance });
        self.entries.truncate(ELITE_CAPACITY);
        Ok(true)
    }

    /// Selection probability of the entry at 1-based `rank`, proportional to `1 / (rank + 10)`.
    pub fn rank_probability(&self, rank: usize) -> f64 {
        let total: f64 = (1..=self.entries.len()).map(rank_weight).sum();
        rank_weight(rank) / total
    }

    /// Draws one entry with priority `1 / (rank + 10)`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<NodeId, SearchError> {
        if self.entries.is_empty() {
            return Err(SearchError::EmptyElite);
        }
        let weights = (1..=self.entries.len()).map(rank_weight);
        let dist = WeightedIndex::new(weights).expect("positive finite weights");
        Ok(self.entries[dist.sample(rng)].node)
    }
}

fn rank_weight(rank: usize) -> f64 {
    1.0 / (rank as f64 + 10.0)
}
