use serde::{Deserialize, Serialize};

use super::{DriverError, HeuristicFault};

/// Largest dimension whose candidate space is enumerated in full.
pub const ASP_MAX_N: usize = 15;

/// Vectors over `{0, 1, 2}^n` with exactly `w` nonzero coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "AspWire", into = "AspWire")]
pub struct AspSpace {
    n: usize,
    w: usize,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AspWire {
    n: usize,
    w: usize,
}

impl TryFrom<AspWire> for AspSpace {
    type Error = DriverError;

    fn try_from(wire: AspWire) -> Result<Self, Self::Error> {
        AspSpace::new(wire.n, wire.w)
    }
}

impl From<AspSpace> for AspWire {
    fn from(s: AspSpace) -> Self {
        AspWire { n: s.n, w: s.w }
    }
}

impl AspSpace {
    pub fn new(n: usize, w: usize) -> Result<Self, DriverError> {
        if w == 0 || w > n {
            return Err(DriverError::InvalidInstance(format!("need 0 < w <= n, got n={n} w={w}")));
        }
        if n > ASP_MAX_N {
            return Err(DriverError::TooLarge { size: n, max: ASP_MAX_N });
        }
        Ok(Self { n, w })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn w(&self) -> usize {
        self.w
    }
}

/// `C(n, w) * 2^w`.
pub fn asp_candidate_count(space: AspSpace) -> usize {
    binomial(space.n, space.w) * (1usize << space.w)
}

fn binomial(n: usize, k: usize) -> usize {
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

/// Key heuristic: a priority for one candidate vector; higher goes first.
pub trait AspHeuristic: Send + Sync {
    fn priority(&self, el: &[u8], n: usize, w: usize) -> Result<f64, HeuristicFault>;
}

impl<F> AspHeuristic for F
where
    F: Fn(&[u8], usize, usize) -> Result<f64, HeuristicFault> + Send + Sync,
{
    fn priority(&self, el: &[u8], n: usize, w: usize) -> Result<f64, HeuristicFault> {
        self(el, n, w)
    }
}

/// Every vector gets the same priority, so the lexicographic tie-break decides.
#[derive(Debug, Clone, Copy, Default)]
pub struct ConstantPriority;

impl AspHeuristic for ConstantPriority {
    fn priority(&self, _el: &[u8], _n: usize, _w: usize) -> Result<f64, HeuristicFault> {
        Ok(0.0)
    }
}

pub fn baseline_asp_constant() -> ConstantPriority {
    ConstantPriority
}

/// True when the three values at one coordinate form `{0,0,1}`, `{0,0,2}` or `{0,1,2}`.
fn good_triple(a: u8, b: u8, c: u8) -> bool {
    let mut t = [a, b, c];
    t.sort_unstable();
    matches!(t, [0, 0, 1] | [0, 0, 2] | [0, 1, 2])
}

/// Whether `candidate` can join `set`: every pair of `set` must have a good
/// coordinate together with `candidate`.
pub fn asp_admissible(set: &[Vec<u8>], candidate: &[u8]) -> Result<bool, DriverError> {
    let n = candidate.len();
    if let Some(v) = set.iter().find(|v| v.len() != n) {
        return Err(DriverError::InvalidInstance(format!(
            "dimension mismatch: {} versus {}",
            v.len(),
            n
        )));
    }
    for i in 0..set.len() {
        for j in i + 1..set.len() {
            if !(0..n).any(|k| good_triple(set[i][k], set[j][k], candidate[k])) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Enumerated candidate space. A candidate is stored as a pair of bit masks
/// (coordinates equal to 1, coordinates equal to 2). Order: supports in
/// lexicographic order of their position lists, then value patterns counted in
/// binary with the lowest position most significant and 1 before 2.
struct CandidateSpace {
    n: usize,
    w: usize,
    supports: Vec<u32>,
    support_rank: Vec<u32>,
}

impl CandidateSpace {
    fn new(space: AspSpace) -> Self {
        let (n, w) = (space.n, space.w);
        let mut supports = Vec::with_capacity(binomial(n, w));
        let mut positions: Vec<usize> = (0..w).collect();
        loop {
            supports.push(positions.iter().fold(0u32, |m, &p| m | (1 << p)));
            // Advance to the next combination in lexicographic order.
            let Some(i) = (0..w).rev().find(|&i| positions[i] < n - w + i) else {
                break;
            };
            positions[i] += 1;
            for j in i + 1..w {
                positions[j] = positions[j - 1] + 1;
            }
        }
        let mut support_rank = vec![u32::MAX; 1 << n];
        for (rank, &mask) in supports.iter().enumerate() {
            support_rank[mask as usize] = rank as u32;
        }
        Self { n, w, supports, support_rank }
    }

    fn len(&self) -> usize {
        self.supports.len() << self.w
    }

    fn decode(&self, index: usize) -> (u32, u32) {
        let support = self.supports[index >> self.w];
        let bits = index & ((1 << self.w) - 1);
        let (mut ones, mut twos) = (0u32, 0u32);
        let mut j = 0;
        for p in 0..self.n {
            if support & (1 << p) != 0 {
                if bits & (1 << (self.w - 1 - j)) != 0 {
                    twos |= 1 << p;
                } else {
                    ones |= 1 << p;
                }
                j += 1;
            }
        }
        (ones, twos)
    }

    fn encode(&self, ones: u32, twos: u32) -> usize {
        let rank = self.support_rank[(ones | twos) as usize] as usize;
        let mut bits = 0usize;
        for p in 0..self.n {
            if (ones | twos) & (1 << p) != 0 {
                bits = (bits << 1) | usize::from(twos & (1 << p) != 0);
            }
        }
        (rank << self.w) | bits
    }

    fn write_vector(&self, ones: u32, twos: u32, out: &mut [u8]) {
        for (p, slot) in out.iter_mut().enumerate() {
            *slot = if ones & (1 << p) != 0 {
                1
            } else if twos & (1 << p) != 0 {
                2
            } else {
                0
            };
        }
    }

    fn lex_key(&self, ones: u32, twos: u32) -> u64 {
        (0..self.n).fold(0u64, |k, p| {
            let digit = if ones & (1 << p) != 0 {
                1
            } else if twos & (1 << p) != 0 {
                2
            } else {
                0
            };
            k * 3 + digit
        })
    }

    /// Calls `visit` with every vector `x` such that `(a, b, x)` has no good coordinate.
    fn for_each_violator(&self, a: (u32, u32), b: (u32, u32), mut visit: impl FnMut(u32, u32)) {
        let value = |v: (u32, u32), p: usize| -> u8 {
            if v.0 & (1 << p) != 0 {
                1
            } else if v.1 & (1 << p) != 0 {
                2
            } else {
                0
            }
        };
        // Coordinates whose violating values are forced to one nonzero value,
        // either nonzero value, or unconstrained.
        let (mut forced_ones, mut forced_twos) = (0u32, 0u32);
        let mut either = Vec::new();
        let mut free = Vec::new();
        for p in 0..self.n {
            match (value(a, p), value(b, p)) {
                (0, 0) => {}
                (0, v) | (v, 0) => {
                    if v == 1 {
                        forced_ones |= 1 << p;
                    } else {
                        forced_twos |= 1 << p;
                    }
                }
                (x, y) if x != y => either.push(p),
                _ => free.push(p),
            }
        }
        let fixed = (forced_ones | forced_twos).count_ones() as usize + either.len();
        if fixed > self.w || self.w - fixed > free.len() {
            return;
        }
        let m = self.w - fixed;
        let mut chosen: Vec<usize> = (0..m).collect();
        loop {
            let mut slots: Vec<usize> = either.clone();
            slots.extend(chosen.iter().map(|&i| free[i]));
            for pattern in 0u32..(1 << slots.len()) {
                let (mut ones, mut twos) = (forced_ones, forced_twos);
                for (bit, &p) in slots.iter().enumerate() {
                    if pattern & (1 << bit) != 0 {
                        twos |= 1 << p;
                    } else {
                        ones |= 1 << p;
                    }
                }
                visit(ones, twos);
            }
            let Some(i) = (0..m).rev().find(|&i| chosen[i] < free.len() - m + i) else {
                break;
            };
            chosen[i] += 1;
            for j in i + 1..m {
                chosen[j] = chosen[j - 1] + 1;
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AspSolution {
    pub vectors: Vec<Vec<u8>>,
}

impl AspSolution {
    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }
}

/// Scores every candidate with `h`, visits them best first (ties in
/// lexicographic vector order) and keeps each one admissible against the set
/// built so far.
///
/// Admissibility is tracked by blocking: whenever a vector joins, every vector
/// that would form a bad triple with it and an earlier member is marked, so a
/// later candidate is admissible exactly when it is unmarked.
pub fn construct_asp<H: AspHeuristic + ?Sized>(space: AspSpace, h: &H) -> Result<AspSolution, DriverError> {
    let cs = CandidateSpace::new(space);
    let total = cs.len();
    let mut keyed: Vec<(f64, u64, usize)> = Vec::with_capacity(total);
    let mut el = vec![0u8; cs.n];
    for index in 0..total {
        let (ones, twos) = cs.decode(index);
        cs.write_vector(ones, twos, &mut el);
        let score = h.priority(&el, cs.n, cs.w)?;
        if !score.is_finite() {
            return Err(DriverError::NonFiniteScore);
        }
        keyed.push((score, cs.lex_key(ones, twos), index));
    }
    keyed.sort_unstable_by(|x, y| y.0.total_cmp(&x.0).then(x.1.cmp(&y.1)));

    let mut blocked = vec![false; total];
    let mut members: Vec<(u32, u32)> = Vec::new();
    for &(_, _, index) in &keyed {
        if blocked[index] {
            continue;
        }
        let c = cs.decode(index);
        for &a in &members {
            cs.for_each_violator(a, c, |ones, twos| blocked[cs.encode(ones, twos)] = true);
        }
        members.push(c);
    }
    let vectors = members
        .into_iter()
        .map(|(ones, twos)| {
            let mut v = vec![0u8; cs.n];
            cs.write_vector(ones, twos, &mut v);
            v
        })
        .collect();
    Ok(AspSolution { vectors })
}
