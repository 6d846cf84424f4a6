use serde::{Deserialize, Serialize};

use super::{ActionKind, HeuristicCandidate, NodeId, SearchError, SearchNode};
use crate::Scalar;

/// Arena of search nodes. Index 0 is the virtual root; every other node holds
/// an evaluated candidate.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchTree<S> {
    nodes: Vec<SearchNode<S>>,
}

impl<S: Scalar> Default for SearchTree<S> {
    fn default() -> Self {
        Self::new()
    }
}

impl<S: Scalar> SearchTree<S> {
    pub fn new() -> Self {
        let root = SearchNode {
            id: NodeId::ROOT,
            parent: None,
            children: Vec::new(),
            candidate: None,
            quality: S::zero(),
            visits: 0,
            depth: 0,
            action: None,
        };
        Self { nodes: vec![root] }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.len() <= 1
    }

    pub fn root(&self) -> &SearchNode<S> {
        &self.nodes[0]
    }

    pub fn node(&self, id: NodeId) -> Result<&SearchNode<S>, SearchError> {
        self.nodes.get(id.0).ok_or(SearchError::UnknownNode(id))
    }

    pub fn nodes(&self) -> &[SearchNode<S>] {
        &self.nodes
    }

    pub fn candidate(&self, id: NodeId) -> Result<&HeuristicCandidate<S>, SearchError> {
        self.node(id)?.candidate.as_ref().ok_or(SearchError::InvalidCandidate)
    }

    /// Appends an evaluated candidate under `parent` with `Q = g` and `N = 1`.
    /// Ancestors are left untouched until [`SearchTree::backpropagate`].
    pub fn attach(
        &mut self,
        parent: NodeId,
        candidate: HeuristicCandidate<S>,
        action: ActionKind,
    ) -> Result<NodeId, SearchError> {
        let performance = candidate.performance.ok_or(SearchError::InvalidCandidate)?;
        if !performance.is_finite() {
            return Err(SearchError::NonFiniteQuality);
        }
        let depth = self.node(parent)?.depth + 1;
        let id = NodeId(self.nodes.len());
        self.nodes.push(SearchNode {
            id,
            parent: Some(parent),
            children: Vec::new(),
            candidate: Some(candidate),
            quality: performance,
            visits: 1,
            depth,
            action: Some(action),
        });
        self.nodes[parent.0].children.push(id);
        Ok(id)
    }

    /// From `from` up to the root: `Q <- max over children Q`, `N <- N + added`.
    pub fn backpropagate(&mut self, from: NodeId, added: u64) -> Result<(), SearchError> {
        let mut cursor = Some(from);
        self.node(from)?;
        while let Some(id) = cursor {
            let best = self.nodes[id.0]
                .children
                .iter()
                .map(|c| self.nodes[c.0].quality)
                .fold(None, |acc: Option<S>, q| Some(acc.map_or(q, |a| a.max(q))));
            let node = &mut self.nodes[id.0];
            if let Some(q) = best {
                node.quality = q;
            }
            node.visits += added;
            cursor = node.parent;
        }
        Ok(())
    }

    /// Ids from `leaf` up to, but excluding, the root.
    pub fn path_to_root(&self, leaf: NodeId) -> Result<Vec<NodeId>, SearchError> {
        let mut path = Vec::new();
        let mut cursor = self.node(leaf)?;
        while let Some(parent) = cursor.parent {
            path.push(cursor.id);
            cursor = &self.nodes[parent.0];
        }
        Ok(path)
    }

    /// Every node of the subtree rooted at `top`, in preorder.
    pub fn subtree(&self, top: NodeId) -> Result<Vec<NodeId>, SearchError> {
        self.node(top)?;
        let mut out = Vec::new();
        let mut stack = vec![top];
        while let Some(id) = stack.pop() {
            out.push(id);
            stack.extend(self.nodes[id.0].children.iter().rev());
        }
        Ok(out)
    }

    /// Best-performing node under `top` (inclusive); ties go to the smallest id.
    pub fn best_in_subtree(&self, top: NodeId) -> Result<NodeId, SearchError> {
        let mut ids = self.subtree(top)?;
        ids.sort_unstable();
        argmax_performance(ids.into_iter().filter_map(|id| Some((id, self.nodes[id.0].performance()?))))
    }

    /// The best candidate evaluated during the whole run; ties go to the earliest.
    pub fn best_candidate(&self) -> Result<(NodeId, &HeuristicCandidate<S>), SearchError> {
        let id = argmax_performance(self.nodes.iter().filter_map(|n| Some((n.id, n.performance()?))))?;
        Ok((id, self.nodes[id.0].candidate.as_ref().expect("non-root node")))
    }

    pub fn export(&self, meta: ExportMeta<S>) -> TreeExport<S> {
        let nodes = self
            .nodes
            .iter()
            .map(|n| ExportNode {
                id: n.id,
                parent: n.parent,
                action: n.action,
                depth: n.depth,
                quality: n.quality,
                visits: n.visits,
                code: n.candidate.as_ref().map(|c| c.code.clone()),
                description: n.candidate.as_ref().map(|c| c.description.clone()),
                performance: n.performance(),
            })
            .collect();
        TreeExport { meta, nodes }
    }

    /// Rebuilds the arena from an export. Children are restored in id order,
    /// which is the order they were attached in.
    pub fn from_export(export: &TreeExport<S>) -> Result<Self, SearchError> {
        let bad = |msg: String| Err(SearchError::MalformedExport(msg));
        let mut nodes: Vec<SearchNode<S>> = Vec::with_capacity(export.nodes.len());
        for (index, n) in export.nodes.iter().enumerate() {
            if n.id.0 != index {
                return bad(format!("node at position {index} has id {}", n.id));
            }
            let candidate = match (&n.code, &n.description) {
                (Some(code), Some(description)) => Some(HeuristicCandidate {
                    code: code.clone(),
                    description: description.clone(),
                    performance: n.performance,
                }),
                (None, None) => None,
                _ => return bad(format!("node {} has partial candidate data", n.id)),
            };
            match n.parent {
                None if index != 0 => return bad(format!("node {} lacks a parent", n.id)),
                Some(_) if index == 0 => return bad("root has a parent".into()),
                Some(p) if p.0 >= index => return bad(format!("node {} precedes its parent", n.id)),
                _ => {}
            }
            if index > 0 && (candidate.is_none() || n.performance.is_none()) {
                return bad(format!("node {} lacks an evaluated candidate", n.id));
            }
            nodes.push(SearchNode {
                id: n.id,
                parent: n.parent,
                children: Vec::new(),
                candidate,
                quality: n.quality,
                visits: n.visits,
                depth: n.depth,
                action: n.action,
            });
            if let Some(p) = n.parent {
                nodes[p.0].children.push(n.id);
            }
        }
        if nodes.is_empty() {
            return bad("no root".into());
        }
        Ok(Self { nodes })
    }
}

fn argmax_performance<S: Scalar>(items: impl Iterator<Item = (NodeId, S)>) -> Result<NodeId, SearchError> {
    let mut best: Option<(NodeId, S)> = None;
    for (id, g) in items {
        match best {
            Some((_, top)) if g <= top => {}
            _ => best = Some((id, g)),
        }
    }
    best.map(|(id, _)| id).ok_or(SearchError::NoValidCandidate)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExportMeta<S> {
    pub t: u64,
    pub q_max: S,
    pub q_min: S,
    pub elite: Vec<NodeId>,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExportNode<S> {
    pub id: NodeId,
    pub parent: Option<NodeId>,
    pub action: Option<ActionKind>,
    pub depth: usize,
    #[serde(rename = "Q")]
    pub quality: S,
    #[serde(rename = "N")]
    pub visits: u64,
    pub code: Option<String>,
    pub description: Option<String>,
    pub performance: Option<S>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeExport<S> {
    pub meta: ExportMeta<S>,
    pub nodes: Vec<ExportNode<S>>,
}
