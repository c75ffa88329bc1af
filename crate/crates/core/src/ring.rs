//! Ring topology arithmetic and file placements.
//!
//! Nodes and files are numbered `1..=n`. Every index computation wraps back
//! into that range, so `normalize(0) == n` and `normalize(n + 1) == 1`.

use std::collections::{BTreeMap, BTreeSet};

use num_rational::Rational64;
use serde::{Deserialize, Serialize};

use crate::error::RingError;
use crate::rational::{parse_ratio, render_ratio};

/// `n` nodes on a circle, each reaching the nodes within `d` hops.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct RingTopology {
    n: usize,
    d: usize,
}

impl RingTopology {
    pub fn new(n: usize, d: usize) -> Result<Self, RingError> {
        if n < 3 || d == 0 || d > n / 2 {
            return Err(RingError::InvalidTopology { n, d });
        }
        Ok(Self { n, d })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// Maps any integer onto `1..=n`.
    pub fn normalize(&self, a: i64) -> usize {
        normalize(a, self.n)
    }

    /// Hop count along the shorter arc between `a` and `b`.
    pub fn distance(&self, a: usize, b: usize) -> usize {
        ring_distance(a, b, self.n)
    }

    /// The nodes that hear a broadcast from `i`, in ascending order.
    ///
    /// When `d == n / 2` on an even ring the two antipodal neighbours are the
    /// same node, so the set has `2d - 1` members.
    pub fn neighbors(&self, i: usize) -> Vec<usize> {
        let mut out = BTreeSet::new();
        for hop in 1..=self.d as i64 {
            out.insert(self.normalize(i as i64 + hop));
            out.insert(self.normalize(i as i64 - hop));
        }
        out.remove(&i);
        out.into_iter().collect()
    }

    pub fn nodes(&self) -> impl Iterator<Item = usize> {
        1..=self.n
    }
}

/// Maps `a` into `1..=n` such that `a - normalize(a, n)` is a multiple of `n`.
pub fn normalize(a: i64, n: usize) -> usize {
    let n = n as i64;
    ((a - 1).rem_euclid(n) + 1) as usize
}

pub fn ring_distance(a: usize, b: usize, n: usize) -> usize {
    let fwd = (b as i64 - a as i64).rem_euclid(n as i64) as usize;
    fwd.min(n - fwd)
}

/// Which files every node maps locally.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Placement {
    n: usize,
    cached: Vec<BTreeSet<usize>>,
}

impl Placement {
    /// Builds a placement from explicit per-node file sets (`sets[0]` is node 1).
    pub fn from_sets(n: usize, sets: Vec<BTreeSet<usize>>) -> Result<Self, RingError> {
        if sets.len() != n {
            return Err(RingError::MalformedPlacement(format!(
                "expected {n} node entries, got {}",
                sets.len()
            )));
        }
        for (idx, set) in sets.iter().enumerate() {
            if let Some(&bad) = set.iter().find(|&&f| f == 0 || f > n) {
                return Err(RingError::MalformedPlacement(format!(
                    "node {} caches file {bad} outside 1..={n}",
                    idx + 1
                )));
            }
        }
        let covered: BTreeSet<usize> = sets.iter().flatten().copied().collect();
        if covered.len() != n {
            return Err(RingError::MalformedPlacement(format!(
                "only {} of {n} files are cached anywhere",
                covered.len()
            )));
        }
        Ok(Self { n, cached: sets })
    }

    /// Node `i` caches files `i, i+1, ..., i+r-1` (mod n).
    pub fn cyclic(n: usize, r: usize) -> Result<Self, RingError> {
        if r == 0 || r > n {
            return Err(RingError::LoadOutOfRange { n, r });
        }
        let cached = (1..=n)
            .map(|i| (0..r).map(|t| normalize((i + t) as i64, n)).collect())
            .collect();
        Ok(Self { n, cached })
    }

    /// Placement for the large-load all-to-all scheme (`r >= ceil(n/2)`, `d = 1`).
    ///
    /// The four stride-4 progressions are evaluated as written. For some
    /// `n = 2 (mod 4)` they overshoot and give every node `r + 1` files; in that
    /// case [`Placement::alternating_blocks`] is used instead, which gives every
    /// node exactly `r` files with the same neighbour-delivery structure.
    pub fn appendix_c(n: usize, r: usize) -> Result<Self, RingError> {
        let literal = Self::appendix_c_literal(n, r)?;
        if literal.cached.iter().all(|s| s.len() == r) {
            Ok(literal)
        } else {
            Self::alternating_blocks(n, r)
        }
    }

    /// The four progressions with their `min(.)` clamps, no repair applied.
    pub fn appendix_c_literal(n: usize, r: usize) -> Result<Self, RingError> {
        let half = n.div_ceil(2);
        if r < half || r > n {
            return Err(RingError::LoadBelowHalf { n, r });
        }
        let q = n.div_ceil(4) as i64;
        let r = r as i64;
        let three_quarters = (3 * n).div_ceil(4) as i64;
        let terms = [
            (0, q),
            (1, (r - q).min(q)),
            (2, (r - half as i64).min(q)),
            (3, r - three_quarters),
        ];
        let cached = (1..=n as i64)
            .map(|i| {
                let mut set = BTreeSet::new();
                for &(shift, count) in &terms {
                    for t in 1..=count.max(0) {
                        set.insert(normalize(i + shift + 4 * (t - 1), n));
                    }
                }
                set
            })
            .collect();
        Ok(Self { n, cached })
    }

    /// Circulant placement laid out as runs `OO xx OO xx ...` of cached (`O`)
    /// and missing (`x`) offsets, extra cached offsets in the first run.
    ///
    /// Every missing file then sits next to a neighbour that caches it, and
    /// the missing files split evenly between the two sides.
    pub fn alternating_blocks(n: usize, r: usize) -> Result<Self, RingError> {
        if r < n.div_ceil(2) || r > n {
            return Err(RingError::LoadBelowHalf { n, r });
        }
        let missing = n - r;
        let pairs = missing / 2;
        let singles = missing % 2;
        let runs = pairs + singles;
        let mut pattern: Vec<bool> = Vec::with_capacity(n);
        if runs == 0 {
            pattern.resize(n, true);
        } else if r >= 2 * runs {
            let extra = r - 2 * runs;
            for run in 0..runs {
                let ones = if run == 0 { 2 + extra } else { 2 };
                pattern.extend(std::iter::repeat_n(true, ones));
                let zeros = if run < pairs { 2 } else { 1 };
                pattern.extend(std::iter::repeat_n(false, zeros));
            }
        } else {
            // n = 2r with r odd: one cached run has to shrink to a single slot.
            for _ in 0..runs - 2 {
                pattern.extend([true, true, false, false]);
            }
            pattern.extend([true, true, false, true, false, false]);
        }
        debug_assert_eq!(pattern.len(), n);
        let offsets: Vec<usize> = pattern
            .iter()
            .enumerate()
            .filter_map(|(o, &c)| c.then_some(o))
            .collect();
        let cached = (1..=n)
            .map(|i| {
                offsets
                    .iter()
                    .map(|&o| normalize((i + o) as i64, n))
                    .collect()
            })
            .collect();
        Ok(Self { n, cached })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Files cached at node `i` (1-based).
    pub fn cached(&self, i: usize) -> &BTreeSet<usize> {
        &self.cached[i - 1]
    }

    pub fn caches(&self, node: usize, file: usize) -> bool {
        self.cached[node - 1].contains(&file)
    }

    /// Nodes holding `file`, ascending.
    pub fn holders(&self, file: usize) -> Vec<usize> {
        (1..=self.n).filter(|&i| self.caches(i, file)).collect()
    }

    /// Computation load: total cached files over `n`.
    pub fn load(&self) -> Rational64 {
        let total: usize = self.cached.iter().map(BTreeSet::len).sum();
        Rational64::new(total as i64, self.n as i64)
    }

    /// `Some(r)` when this is exactly the cyclic placement with load `r`.
    pub fn cyclic_load(&self) -> Option<usize> {
        let r = self.cached[0].len();
        match Self::cyclic(self.n, r) {
            Ok(c) if c == *self => Some(r),
            _ => None,
        }
    }

    /// Offsets `f - i (mod n)` cached by node `i`, when every node uses the same set.
    pub fn circulant_offsets(&self) -> Option<BTreeSet<usize>> {
        let first: BTreeSet<usize> = self.cached[0]
            .iter()
            .map(|&f| (f + self.n - 1) % self.n)
            .collect();
        for i in 2..=self.n {
            let shifted: BTreeSet<usize> = first
                .iter()
                .map(|&o| normalize((i + o) as i64, self.n))
                .collect();
            if shifted != self.cached[i - 1] {
                return None;
            }
        }
        Some(first)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&PlacementJson::from(self)).expect("placement serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, RingError> {
        let raw: PlacementJson =
            serde_json::from_str(text).map_err(|e| RingError::MalformedPlacement(e.to_string()))?;
        let mut sets = vec![BTreeSet::new(); raw.n];
        for (node, files) in raw.cached {
            let idx: usize = node
                .parse()
                .map_err(|_| RingError::MalformedPlacement(format!("bad node key {node:?}")))?;
            if idx == 0 || idx > raw.n {
                return Err(RingError::MalformedPlacement(format!("node {idx} out of range")));
            }
            sets[idx - 1] = files.into_iter().collect();
        }
        let placement = Self::from_sets(raw.n, sets)?;
        let declared = parse_ratio(&raw.r)
            .ok_or_else(|| RingError::MalformedPlacement(format!("bad load {:?}", raw.r)))?;
        if declared != placement.load() {
            return Err(RingError::MalformedPlacement(format!(
                "declared load {} but caches give {}",
                raw.r,
                render_ratio(placement.load())
            )));
        }
        Ok(placement)
    }
}

#[derive(Serialize, Deserialize)]
struct PlacementJson {
    n: usize,
    r: String,
    cached: BTreeMap<String, Vec<usize>>,
}

impl From<&Placement> for PlacementJson {
    fn from(p: &Placement) -> Self {
        let cached = p
            .cached
            .iter()
            .enumerate()
            .map(|(i, s)| ((i + 1).to_string(), s.iter().copied().collect()))
            .collect();
        Self {
            n: p.n,
            r: render_ratio(p.load()),
            cached,
        }
    }
}
