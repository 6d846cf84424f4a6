use std::fmt;

use serde::{Deserialize, Serialize};

use crate::Scalar;

/// Index of a node in its tree's arena. Ids follow creation order; the root is 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub usize);

impl NodeId {
    pub const ROOT: NodeId = NodeId(0);

    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

/// The LLM prompt that produced a candidate, or the description rewrite.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ActionKind {
    /// Initial generation from scratch.
    I1,
    /// Crossover diverging from several existing heuristics.
    E1,
    /// Crossover of a parent with an elite reference.
    E2,
    /// Mutation introducing new mechanisms.
    M1,
    /// Mutation of parameter settings.
    M2,
    /// Reasoning over the heuristics on a tree path.
    S1,
    /// Thought alignment: re-describe generated code.
    Align,
}

impl ActionKind {
    pub fn tag(self) -> &'static str {
        match self {
            ActionKind::I1 => "i1",
            ActionKind::E1 => "e1",
            ActionKind::E2 => "e2",
            ActionKind::M1 => "m1",
            ActionKind::M2 => "m2",
            ActionKind::S1 => "s1",
            ActionKind::Align => "align",
        }
    }
}

impl fmt::Display for ActionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

/// Source of one key heuristic function together with its description and measured performance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeuristicCandidate<S> {
    pub code: String,
    pub description: String,
    pub performance: Option<S>,
}

impl<S: Scalar> HeuristicCandidate<S> {
    pub fn unevaluated(code: impl Into<String>, description: impl Into<String>) -> Self {
        Self {
            code: code.into(),
            description: description.into(),
            performance: None,
        }
    }

    pub fn evaluated(code: impl Into<String>, description: impl Into<String>, performance: S) -> Self {
        Self {
            code: code.into(),
            description: description.into(),
            performance: Some(performance),
        }
    }

    pub fn is_valid(&self) -> bool {
        self.performance.is_some()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchNode<S> {
    pub id: NodeId,
    pub parent: Option<NodeId>,
    pub children: Vec<NodeId>,
    /// Absent only for the virtual root.
    pub candidate: Option<HeuristicCandidate<S>>,
    pub quality: S,
    pub visits: u64,
    pub depth: usize,
    /// Absent only for the virtual root.
    pub action: Option<ActionKind>,
}

impl<S: Scalar> SearchNode<S> {
    pub fn is_root(&self) -> bool {
        self.parent.is_none()
    }

    pub fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }

    pub fn performance(&self) -> Option<S> {
        self.candidate.as_ref().and_then(|c| c.performance)
    }
}
