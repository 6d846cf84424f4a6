//! Prompt construction for the six evolution actions and the alignment step,
//! response parsing, and selection of in-context heuristics from the tree.

mod context;
mod parse;
mod render;
mod spec;

pub use context::{
    collect_path_candidates, context_of, sample_subtree_representatives, SUBTREE_SAMPLE_MAX, SUBTREE_SAMPLE_MIN,
};
pub use parse::{parse_generation, ParsedGeneration};
pub use render::{render_alignment_prompt, render_prompt, ContextCandidate, PromptBundle};
pub use spec::{PromptSpec, BLACK_BOX_TASK};

use crate::ActionKind;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ActionError {
    #[error("{action} cannot take {got} in-context heuristics")]
    Arity { action: ActionKind, got: usize },
    #[error("{0} needs objective values for every in-context heuristic")]
    MissingObjective(ActionKind),
    #[error("template rendering failed: {0}")]
    Template(String),
    #[error("empty {0}")]
    EmptyInput(&'static str),
    #[error("response contains no code")]
    NoCode,
    #[error("code does not define `{0}`")]
    NoFunctionName(String),
    #[error("response contains no description")]
    NoDescription,
}
