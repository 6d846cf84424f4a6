use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::CurvePoint;
use crate::{Export, NodeId};

/// `t,best_g,best_id` rows with a header line.
pub fn curve_csv(curve: &[CurvePoint]) -> String {
    let mut out = String::from("t,best_g,best_id\n");
    for p in curve {
        let _ = writeln!(out, "{},{},{}", p.t, p.best_g, p.best_id.0);
    }
    out
}

pub fn parse_curve_csv(text: &str) -> Result<Vec<CurvePoint>, String> {
    let mut lines = text.lines();
    if lines.next() != Some("t,best_g,best_id") {
        return Err("missing curve header".into());
    }
    lines
        .filter(|l| !l.trim().is_empty())
        .map(|line| {
            let fields: Vec<&str> = line.split(',').collect();
            let [t, g, id] = fields[..] else {
                return Err(format!("malformed curve row '{line}'"));
            };
            Ok(CurvePoint {
                t: t.parse().map_err(|e| format!("{e} in '{line}'"))?,
                best_g: g.parse().map_err(|e| format!("{e} in '{line}'"))?,
                best_id: NodeId(id.parse().map_err(|e| format!("{e} in '{line}'"))?),
            })
        })
        .collect()
}

/// Graphviz rendering: one box per node labelled with id, action, Q and N.
pub fn tree_dot(export: &Export) -> String {
    let mut out = String::from("digraph search_tree {\n  node [shape=box, fontname=\"monospace\"];\n");
    for n in &export.nodes {
        let label = match n.action {
            None => format!("root\\nQ={} N={}", n.quality, n.visits),
            Some(a) => format!("#{} {}\\nQ={} N={}", n.id.0, a, n.quality, n.visits),
        };
        let _ = writeln!(out, "  n{} [label=\"{}\"];", n.id.0, label);
    }
    for n in &export.nodes {
        if let Some(p) = n.parent {
            let _ = writeln!(out, "  n{} -> n{};", p.0, n.id.0);
        }
    }
    out.push_str("}\n");
    out
}

/// The best heuristic of a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BestRecord {
    pub id: NodeId,
    pub g: f64,
    pub description: String,
    pub code: String,
}
