use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{DriverError, HeuristicFault};

/// Dense row-major distance matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DistMatrix {
    n: usize,
    data: Vec<f64>,
}

impl DistMatrix {
    pub fn euclidean(coords: &[[f64; 2]]) -> Self {
        let n = coords.len();
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                let dx = coords[i][0] - coords[j][0];
                let dy = coords[i][1] - coords[j][1];
                data[i * n + j] = (dx * dx + dy * dy).sqrt();
            }
        }
        Self { n, data }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TspWire", into = "TspWire")]
pub struct TspInstance {
    coords: Vec<[f64; 2]>,
    dist: DistMatrix,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TspWire {
    coords: Vec<[f64; 2]>,
}

impl TryFrom<TspWire> for TspInstance {
    type Error = DriverError;

    fn try_from(wire: TspWire) -> Result<Self, Self::Error> {
        TspInstance::from_coords(wire.coords)
    }
}

impl From<TspInstance> for TspWire {
    fn from(inst: TspInstance) -> Self {
        TspWire { coords: inst.coords }
    }
}

impl TspInstance {
    pub fn from_coords(coords: Vec<[f64; 2]>) -> Result<Self, DriverError> {
        if coords.len() < 2 {
            return Err(DriverError::InvalidInstance("a TSP instance needs at least 2 nodes".into()));
        }
        if coords.iter().flatten().any(|c| !c.is_finite()) {
            return Err(DriverError::InvalidInstance("non-finite coordinate".into()));
        }
        let dist = DistMatrix::euclidean(&coords);
        Ok(Self { coords, dist })
    }

    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn coords(&self) -> &[[f64; 2]] {
        &self.coords
    }

    pub fn dist(&self) -> &DistMatrix {
        &self.dist
    }
}

/// `n` points drawn independently and uniformly from the unit square.
pub fn gen_tsp<R: Rng + ?Sized>(n: usize, rng: &mut R) -> TspInstance {
    assert!(n >= 2, "gen_tsp needs n >= 2");
    let coords = (0..n).map(|_| [rng.random::<f64>(), rng.random::<f64>()]).collect();
    TspInstance::from_coords(coords).expect("generated coordinates are finite")
}

/// Key heuristic: picks the next node from `unvisited` (ascending order).
pub trait TspHeuristic: Send + Sync {
    fn select_next_node(
        &self,
        current: usize,
        destination: usize,
        unvisited: &[usize],
        dist: &DistMatrix,
    ) -> Result<usize, HeuristicFault>;
}

impl<F> TspHeuristic for F
where
    F: Fn(usize, usize, &[usize], &DistMatrix) -> Result<usize, HeuristicFault> + Send + Sync,
{
    fn select_next_node(
        &self,
        current: usize,
        destination: usize,
        unvisited: &[usize],
        dist: &DistMatrix,
    ) -> Result<usize, HeuristicFault> {
        self(current, destination, unvisited, dist)
    }
}

/// Closest unvisited node; ties go to the smallest index.
#[derive(Debug, Clone, Copy, Default)]
pub struct NearestGreedy;

impl TspHeuristic for NearestGreedy {
    fn select_next_node(
        &self,
        current: usize,
        _destination: usize,
        unvisited: &[usize],
        dist: &DistMatrix,
    ) -> Result<usize, HeuristicFault> {
        let row = dist.row(current);
        let mut best: Option<usize> = None;
        for &j in unvisited {
            if best.is_none_or(|b| row[j] < row[b]) {
                best = Some(j);
            }
        }
        best.ok_or_else(|| HeuristicFault("no unvisited node".into()))
    }
}

pub fn baseline_nearest_greedy() -> NearestGreedy {
    NearestGreedy
}

/// Builds a tour from `start` by repeated calls to `h`. The last remaining node
/// is appended without consulting `h`.
pub fn construct_tsp<H: TspHeuristic + ?Sized>(
    inst: &TspInstance,
    h: &H,
    start: usize,
) -> Result<Vec<usize>, DriverError> {
    let n = inst.len();
    if start >= n {
        return Err(DriverError::InvalidInstance(format!("start node {start} out of range for {n} nodes")));
    }
    let mut unvisited: Vec<usize> = (0..n).filter(|&i| i != start).collect();
    let mut tour = Vec::with_capacity(n);
    tour.push(start);
    let mut current = start;
    while !unvisited.is_empty() {
        let next = if unvisited.len() == 1 {
            unvisited[0]
        } else {
            h.select_next_node(current, start, &unvisited, inst.dist())?
        };
        if next >= n {
            return Err(DriverError::HeuristicReturnedOutOfRange(next));
        }
        let pos = unvisited
            .iter()
            .position(|&u| u == next)
            .ok_or(DriverError::HeuristicReturnedVisited(next))?;
        unvisited.remove(pos);
        tour.push(next);
        current = next;
    }
    Ok(tour)
}

/// Closed-tour length.
pub fn tsp_objective(inst: &TspInstance, tour: &[usize]) -> Result<f64, DriverError> {
    let n = inst.len();
    let mut seen = vec![false; n];
    if tour.len() != n {
        return Err(DriverError::NotPermutation(n));
    }
    for &v in tour {
        if v >= n || seen[v] {
            return Err(DriverError::NotPermutation(n));
        }
        seen[v] = true;
    }
    let d = inst.dist();
    Ok((0..n).map(|i| d.get(tour[i], tour[(i + 1) % n])).sum())
}

pub const HELD_KARP_MAX: usize = 14;

/// Exact optimal tour length by dynamic programming over subsets.
pub fn held_karp(inst: &TspInstance) -> Result<f64, DriverError> {
    let n = inst.len();
    if n > HELD_KARP_MAX {
        return Err(DriverError::TooLarge { size: n, max: HELD_KARP_MAX });
    }
    let d = inst.dist();
    if n <= 3 {
        let tour: Vec<usize> = (0..n).collect();
        return tsp_objective(inst, &tour);
    }
    // Node 0 is fixed as the start; subsets range over nodes 1..n, bit i-1 for node i.
    let m = n - 1;
    let full = 1usize << m;
    let mut dp = vec![f64::INFINITY; full * m];
    for j in 0..m {
        dp[(1 << j) * m + j] = d.get(0, j + 1);
    }
    for mask in 1..full {
        for j in 0..m {
            let here = dp[mask * m + j];
            if mask & (1 << j) == 0 || !here.is_finite() {
                continue;
            }
            let mut rest = !mask & (full - 1);
            while rest != 0 {
                let k = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                let next = mask | (1 << k);
                let cand = here + d.get(j + 1, k + 1);
                if cand < dp[next * m + k] {
                    dp[next * m + k] = cand;
                }
            }
        }
    }
    Ok((0..m)
        .map(|j| dp[(full - 1) * m + j] + d.get(j + 1, 0))
        .fold(f64::INFINITY, f64::min))
}
