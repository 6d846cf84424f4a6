//! Tree search over heuristic candidates: node arena, normalized UCT selection,
//! progressive widening, max-backpropagation, quality bounds and the elite set.

mod bounds;
mod config;
mod elite;
mod node;
mod tree;
mod uct;

pub use bounds::QualityBounds;
pub use config::{ConfigError, EvolutionConfig, ProblemKind};
pub use elite::{EliteEntry, EliteSet, ELITE_CAPACITY};
pub use node::{ActionKind, HeuristicCandidate, NodeId, SearchNode};
pub use tree::{ExportMeta, ExportNode, SearchTree, TreeExport};
pub use uct::{decay_lambda, select_child, should_widen, uct_score, DEGENERATE_SPAN};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SearchError {
    #[error("node {0} has no children")]
    NoChildren(NodeId),
    #[error("node {0} does not exist")]
    UnknownNode(NodeId),
    #[error("elite set is empty")]
    EmptyElite,
    #[error("candidate has no measured performance")]
    InvalidCandidate,
    #[error("quality value is not finite")]
    NonFiniteQuality,
    #[error("no valid candidate was ever evaluated")]
    NoValidCandidate,
    #[error("root has {0} subtrees, at least 2 are required")]
    TooFewSubtrees(usize),
    #[error("malformed tree export: {0}")]
    MalformedExport(String),
}
