//! Monte Carlo tree search over LLM-generated heuristic functions for
//! combinatorial optimization.
//!
//! The search math in [`search`] is generic over [`Scalar`] (f32 or f64).
//! Problems, evaluation and the run loop measure in f64; the aliases below fix
//! the search types to that precision.

pub mod actions;
pub mod engine;
pub mod evaluator;
pub mod scalar;
pub mod problems;
pub mod search;

pub use scalar::Scalar;
pub use search::{ActionKind, NodeId, ProblemKind};

pub type Tree = search::SearchTree<f64>;
pub type Candidate = search::HeuristicCandidate<f64>;
pub type Bounds = search::QualityBounds<f64>;
pub type Elite = search::EliteSet<f64>;
pub type Export = search::TreeExport<f64>;
