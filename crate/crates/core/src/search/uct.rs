use super::{NodeId, QualityBounds, SearchError, SearchTree};
use crate::Scalar;

/// Spans at or below this are treated as degenerate and normalize to 0.
pub const DEGENERATE_SPAN: f64 = 1e-12;

/// Normalized UCT score of a child:
/// `(Q - q_min) / (q_max - q_min) + lambda * sqrt(ln(parent_visits + 1) / visits)`.
pub fn uct_score<S: Scalar>(
    quality: S,
    visits: u64,
    parent_visits: u64,
    bounds: &QualityBounds<S>,
    lambda: S,
) -> S {
    let span = bounds.span();
    let exploit = if span > S::of(DEGENERATE_SPAN) {
        (quality - bounds.q_min) / span
    } else {
        S::zero()
    };
    let explore = (S::of_count(parent_visits) + S::one()).ln() / S::of_count(visits.max(1));
    exploit + lambda * explore.sqrt()
}

/// Child of `node` with the largest UCT score; ties go to the smallest id.
pub fn select_child<S: Scalar>(
    tree: &SearchTree<S>,
    node: NodeId,
    bounds: &QualityBounds<S>,
    lambda: S,
) -> Result<NodeId, SearchError> {
    let parent = tree.node(node)?;
    let mut best: Option<(NodeId, S)> = None;
    for &child in &parent.children {
        let c = tree.node(child)?;
        let score = uct_score(c.quality, c.visits, parent.visits, bounds, lambda);
        match best {
            Some((_, top)) if score <= top => {}
            _ => best = Some((child, score)),
        }
    }
    best.map(|(id, _)| id).ok_or(SearchError::NoChildren(node))
}

/// Progressive-widening trigger: `floor(visits^alpha) >= children`.
///
/// Powers that land within a few ulps of an integer are snapped to it so that,
/// for instance, `9^0.5` counts as exactly 3.
pub fn should_widen<S: Scalar>(visits: u64, children: usize, alpha: S) -> bool {
    let raw = S::of_count(visits).powf(alpha);
    let nearest = raw.round();
    let tolerance = S::epsilon() * S::of(8.0) * raw.max(S::one());
    let level = if (raw - nearest).abs() <= tolerance {
        nearest
    } else {
        raw.floor()
    };
    level >= S::of_count(children as u64)
}

/// Linearly decayed exploration weight `lambda0 * (budget - t) / budget`, floored at 0.
pub fn decay_lambda<S: Scalar>(lambda0: S, t: u64, budget: u64) -> S {
    if budget == 0 || t >= budget {
        return S::zero();
    }
    lambda0 * S::of_count(budget - t) / S::of_count(budget)
}
