use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProblemKind {
    Tsp,
    Kp,
    Bpp,
    Asp,
}

impl ProblemKind {
    pub const ALL: [ProblemKind; 4] = [ProblemKind::Tsp, ProblemKind::Kp, ProblemKind::Bpp, ProblemKind::Asp];

    pub fn tag(self) -> &'static str {
        match self {
            ProblemKind::Tsp => "tsp",
            ProblemKind::Kp => "kp",
            ProblemKind::Bpp => "bpp",
            ProblemKind::Asp => "asp",
        }
    }
}

impl fmt::Display for ProblemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for ProblemKind {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|p| p.tag().eq_ignore_ascii_case(s))
            .ok_or_else(|| ConfigError::Invalid(format!("unknown problem '{s}'")))
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConfigError {
    #[error("invalid configuration: {0}")]
    Invalid(String),
}

/// Run parameters of the search loop.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvolutionConfig {
    /// Initial node count; `None` means 4, or 10 in black-box mode.
    pub n_init: Option<usize>,
    /// Evaluation budget T.
    pub budget: u64,
    /// Depth cap H for selection.
    pub max_depth: usize,
    /// Mutations of each kind per expansion.
    pub k: usize,
    pub lambda0: f64,
    pub alpha: f64,
    pub eval_timeout_s: f64,
    pub seed: u64,
    pub black_box: bool,
    pub problem: ProblemKind,
    pub start_node: usize,
}

impl Default for EvolutionConfig {
    fn default() -> Self {
        Self {
            n_init: None,
            budget: 1000,
            max_depth: 10,
            k: 2,
            lambda0: 0.1,
            alpha: 0.5,
            eval_timeout_s: 60.0,
            seed: 0,
            black_box: false,
            problem: ProblemKind::Tsp,
            start_node: 0,
        }
    }
}

impl EvolutionConfig {
    pub fn initial_nodes(&self) -> usize {
        self.n_init.unwrap_or(if self.black_box { 10 } else { 4 })
    }

    /// Attempts allowed while building the initial layer.
    pub fn init_attempt_cap(&self) -> usize {
        3 * self.initial_nodes()
    }

    /// Children created by one full expansion: `2k + 2`.
    pub fn expansion_width(&self) -> usize {
        2 * self.k + 2
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let fail = |msg: &str| Err(ConfigError::Invalid(msg.to_string()));
        if self.initial_nodes() == 0 {
            return fail("n_init must be positive");
        }
        if self.budget == 0 {
            return fail("budget must be positive");
        }
        if self.max_depth == 0 {
            return fail("max_depth must be positive");
        }
        if self.k == 0 {
            return fail("k must be positive");
        }
        if !(self.lambda0.is_finite() && self.lambda0 >= 0.0) {
            return fail("lambda0 must be a finite nonnegative number");
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return fail("alpha must lie strictly between 0 and 1");
        }
        if !(self.eval_timeout_s.is_finite() && self.eval_timeout_s > 0.0) {
            return fail("eval_timeout_s must be positive");
        }
        Ok(())
    }
}
