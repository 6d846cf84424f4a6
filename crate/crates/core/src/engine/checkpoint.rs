use std::fs;
use std::io;
use std::path::Path;

use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{Attempt, CurvePoint};
use crate::problems::Dataset;
use crate::search::EvolutionConfig;
use crate::{Bounds, Elite, Export};

/// Everything needed to continue a run exactly where it stopped.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub config_hash: String,
    pub t: u64,
    pub iteration: u64,
    pub bounds: Bounds,
    pub elite: Elite,
    pub rng: ChaCha8Rng,
    /// Position in a replay script; absent for live backends.
    pub replay_cursor: Option<usize>,
    pub curve: Vec<CurvePoint>,
    pub history: Vec<Attempt>,
    pub tree: Export,
}

impl Checkpoint {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("checkpoint serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn load(path: &Path) -> io::Result<Self> {
        let text = fs::read_to_string(path)?;
        Self::from_json(&text).map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e))
    }

    /// Writes through a sibling temporary file so a crash never leaves a torn checkpoint.
    pub fn save(&self, path: &Path) -> io::Result<()> {
        write_atomic(path, self.to_json().as_bytes())
    }
}

pub(crate) fn write_atomic(path: &Path, bytes: &[u8]) -> io::Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)
}

/// Hex SHA-256 of the search parameters and the evaluation instances.
pub fn config_hash(config: &EvolutionConfig, dataset: &Dataset) -> String {
    let body = serde_json::to_string(&(config, dataset)).expect("config serializes");
    Sha256::digest(body.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
}
