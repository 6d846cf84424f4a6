use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{gen_kp, gen_tsp, gen_weibull_bpp, AspSpace, BppStream, DriverError, KpInstance, TspInstance};
use crate::ProblemKind;

/// One instance in its wire form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ProblemInstance {
    Tsp(TspInstance),
    Kp(KpInstance),
    Bpp(BppStream),
    Asp(AspSpace),
}

impl ProblemInstance {
    pub fn problem(&self) -> ProblemKind {
        match self {
            ProblemInstance::Tsp(_) => ProblemKind::Tsp,
            ProblemInstance::Kp(_) => ProblemKind::Kp,
            ProblemInstance::Bpp(_) => ProblemKind::Bpp,
            ProblemInstance::Asp(_) => ProblemKind::Asp,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BppScale {
    pub items: usize,
    pub capacity: u32,
}

/// Recipe for a seeded dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "problem", rename_all = "lowercase", deny_unknown_fields)]
pub enum DatasetSpec {
    Tsp {
        count: usize,
        nodes: usize,
        #[serde(default)]
        seed: u64,
    },
    Kp {
        count: usize,
        items: usize,
        capacity: f64,
        #[serde(default)]
        seed: u64,
    },
    Bpp {
        streams: Vec<BppScale>,
        #[serde(default)]
        seed: u64,
    },
    Asp {
        n: usize,
        w: usize,
    },
}

impl DatasetSpec {
    /// Evaluation datasets used during search: 64 TSP50; 64 KP100 with W = 25;
    /// four Weibull streams of 1k/5k items at capacity 100/500; one ASP (15, 10).
    pub fn evaluation_default(problem: ProblemKind, seed: u64) -> Self {
        match problem {
            ProblemKind::Tsp => DatasetSpec::Tsp { count: 64, nodes: 50, seed },
            ProblemKind::Kp => DatasetSpec::Kp { count: 64, items: 100, capacity: 25.0, seed },
            ProblemKind::Bpp => DatasetSpec::Bpp {
                streams: [(1000, 100), (1000, 500), (5000, 100), (5000, 500)]
                    .into_iter()
                    .map(|(items, capacity)| BppScale { items, capacity })
                    .collect(),
                seed,
            },
            ProblemKind::Asp => DatasetSpec::Asp { n: 15, w: 10 },
        }
    }

    pub fn problem(&self) -> ProblemKind {
        match self {
            DatasetSpec::Tsp { .. } => ProblemKind::Tsp,
            DatasetSpec::Kp { .. } => ProblemKind::Kp,
            DatasetSpec::Bpp { .. } => ProblemKind::Bpp,
            DatasetSpec::Asp { .. } => ProblemKind::Asp,
        }
    }

    pub fn seed(&self) -> u64 {
        match self {
            DatasetSpec::Tsp { seed, .. } | DatasetSpec::Kp { seed, .. } | DatasetSpec::Bpp { seed, .. } => *seed,
            DatasetSpec::Asp { .. } => 0,
        }
    }

    /// Draws every instance from one ChaCha8 stream seeded with `seed`.
    pub fn generate(&self) -> Result<Dataset, DriverError> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed());
        let instances = match self {
            DatasetSpec::Tsp { count, nodes, .. } => {
                if *nodes < 2 {
                    return Err(DriverError::InvalidInstance("TSP needs at least 2 nodes".into()));
                }
                (0..*count).map(|_| ProblemInstance::Tsp(gen_tsp(*nodes, &mut rng))).collect()
            }
            DatasetSpec::Kp { count, items, capacity, .. } => (0..*count)
                .map(|_| ProblemInstance::Kp(gen_kp(*items, *capacity, &mut rng)))
                .collect(),
            DatasetSpec::Bpp { streams, .. } => {
                if streams.iter().any(|s| s.capacity == 0) {
                    return Err(DriverError::InvalidInstance("bin capacity must be positive".into()));
                }
                streams
                    .iter()
                    .map(|s| ProblemInstance::Bpp(gen_weibull_bpp(s.items, s.capacity, &mut rng)))
                    .collect()
            }
            DatasetSpec::Asp { n, w } => vec![ProblemInstance::Asp(AspSpace::new(*n, *w)?)],
        };
        let mut params = serde_json::to_value(self).expect("spec serializes");
        if let Some(map) = params.as_object_mut() {
            map.remove("problem");
            map.remove("seed");
        }
        Ok(Dataset { problem: self.problem(), seed: self.seed(), params, instances })
    }
}

#[derive(Debug, thiserror::Error)]
pub enum DatasetError {
    #[error("reading dataset: {0}")]
    Io(#[from] std::io::Error),
    #[error("parsing dataset: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("instance {index} is a {found} instance in a {expected} dataset")]
    WrongProblem { index: usize, expected: ProblemKind, found: ProblemKind },
    #[error("dataset has no instances")]
    Empty,
}

/// A stored dataset: `{problem, seed, params, instances}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub problem: ProblemKind,
    pub seed: u64,
    pub params: serde_json::Value,
    pub instances: Vec<ProblemInstance>,
}

impl Dataset {
    pub fn validate(&self) -> Result<(), DatasetError> {
        if self.instances.is_empty() {
            return Err(DatasetError::Empty);
        }
        for (index, inst) in self.instances.iter().enumerate() {
            if inst.problem() != self.problem {
                return Err(DatasetError::WrongProblem { index, expected: self.problem, found: inst.problem() });
            }
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self, DatasetError> {
        let d: Dataset = serde_json::from_str(text)?;
        d.validate()?;
        Ok(d)
    }

    pub fn load(path: &Path) -> Result<Self, DatasetError> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("dataset serializes")
    }

    pub fn len(&self) -> usize {
        self.instances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instances.is_empty()
    }
}
