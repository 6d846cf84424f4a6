use std::collections::HashSet;

use rand::Rng;

use super::ContextCandidate;
use crate::search::SearchError;
use crate::{NodeId, Tree};

/// Fewest and most root subtrees fed to a root-level crossover.
pub const SUBTREE_SAMPLE_MIN: usize = 2;
pub const SUBTREE_SAMPLE_MAX: usize = 5;

/// Nodes on the path from `leaf` up to the root (root excluded), deepest
/// first, keeping only the first node for each distinct code.
pub fn collect_path_candidates(tree: &Tree, leaf: NodeId) -> Result<Vec<NodeId>, SearchError> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for id in tree.path_to_root(leaf)? {
        let cand = tree.candidate(id)?;
        if seen.insert(cand.code.as_str()) {
            out.push(id);
        }
    }
    Ok(out)
}

/// Picks `p` distinct root children, `p` uniform in 2..=5 and capped at the
/// number of children, and returns the best node of each chosen subtree in
/// child order.
pub fn sample_subtree_representatives<R: Rng + ?Sized>(tree: &Tree, rng: &mut R) -> Result<Vec<NodeId>, SearchError> {
    let children = &tree.root().children;
    if children.len() < SUBTREE_SAMPLE_MIN {
        return Err(SearchError::TooFewSubtrees(children.len()));
    }
    let p = rng.random_range(SUBTREE_SAMPLE_MIN..=SUBTREE_SAMPLE_MAX).min(children.len());
    let mut picked = rand::seq::index::sample(rng, children.len(), p).into_vec();
    picked.sort_unstable();
    picked.into_iter().map(|i| tree.best_in_subtree(children[i])).collect()
}

/// Prompt view of the given nodes, in the same order.
pub fn context_of(tree: &Tree, ids: &[NodeId]) -> Result<Vec<ContextCandidate>, SearchError> {
    ids.iter()
        .map(|&id| {
            let c = tree.candidate(id)?;
            Ok(ContextCandidate::from_performance(&c.code, &c.description, c.performance))
        })
        .collect()
}
