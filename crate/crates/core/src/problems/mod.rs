//! The four construction problems: instance generators, step-by-step drivers
//! that call a key heuristic, classical baselines and small exact oracles.

pub mod asp;
pub mod bpp;
pub mod dataset;
pub mod kp;
pub mod tsp;

pub use asp::{asp_admissible, asp_candidate_count, construct_asp, AspHeuristic, AspSpace};
pub use bpp::{bpp_lower_bound, construct_bpp_online, gen_weibull_bpp, BppHeuristic, BppStream};
pub use dataset::{BppScale, Dataset, DatasetError, DatasetSpec, ProblemInstance};
pub use kp::{construct_kp, gen_kp, kp_exact, KpHeuristic, KpInstance};
pub use tsp::{construct_tsp, gen_tsp, held_karp, tsp_objective, DistMatrix, TspHeuristic, TspInstance};

/// A heuristic refused to produce an answer; the message is kept for reports.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{0}")]
pub struct HeuristicFault(pub String);

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DriverError {
    #[error("heuristic returned already visited node {0}")]
    HeuristicReturnedVisited(usize),
    #[error("heuristic returned out-of-range choice {0}")]
    HeuristicReturnedOutOfRange(usize),
    #[error("heuristic raised: {0}")]
    HeuristicRaised(String),
    #[error("heuristic returned {got} scores for {expected} options")]
    WrongScoreCount { expected: usize, got: usize },
    #[error("heuristic returned a non-finite score")]
    NonFiniteScore,
    #[error("sequence is not a permutation of 0..{0}")]
    NotPermutation(usize),
    #[error("instance too large for the exact oracle: {size} > {max}")]
    TooLarge { size: usize, max: usize },
    #[error("invalid instance: {0}")]
    InvalidInstance(String),
}

impl From<HeuristicFault> for DriverError {
    fn from(fault: HeuristicFault) -> Self {
        DriverError::HeuristicRaised(fault.0)
    }
}

/// Feasibility slack for real-valued capacities, so that `0.3 + 0.4` fits in `0.7`.
pub const CAPACITY_EPS: f64 = 1e-9;
