//! All-gather: every node must end up with every `V_s`.
//!
//! Under the cyclic placement node `i` starts with `V_i .. V_{i+r-1}`. In the
//! first round it broadcasts the two ends of its arc, `V_i + V_{i+r-1}`, and
//! neighbours peel those packets in a chain. From then on node `i` sends
//! `V_{i-d(k-1)} + V_{i+d(k-1)+r-1}`, one symbol flowing each way around the
//! ring, so every node learns `2d` new symbols per round.

use num_rational::Rational64;

use crate::error::SchemeError;
use crate::packet::{IvLabel, KnownSet};
use crate::rational::{frac, int};
use crate::ring::{normalize, Placement, RingTopology};
use crate::sim::{run_schedule, Intent, Problem, Requirement, Schedule, SimOptions, SimOutcome, Tick};

#[derive(Clone, Debug)]
pub struct AllGatherPlan {
    pub topo: RingTopology,
    pub placement: Placement,
    pub r: usize,
    pub schedule: Schedule,
}

impl AllGatherPlan {
    pub fn rounds(&self) -> usize {
        self.schedule.ticks.len()
    }

    pub fn requirement(&self) -> Requirement {
        Requirement::new(Problem::AllGather, self.topo.n())
    }

    pub fn run(&self) -> Result<SimOutcome, SchemeError> {
        self.run_with(SimOptions::default())
    }

    pub fn run_with(&self, opts: SimOptions) -> Result<SimOutcome, SchemeError> {
        Ok(run_schedule(
            &self.topo,
            &self.placement,
            &self.schedule,
            &self.requirement(),
            opts,
        )?)
    }
}

/// Packet of node `i` in round `k` (1-based).
pub fn allgather_packet(n: usize, r: usize, d: usize, i: usize, k: usize) -> Vec<IvLabel> {
    let back = normalize(i as i64 - (d * (k - 1)) as i64, n);
    let fwd = normalize((i + d * (k - 1) + r - 1) as i64, n);
    if back == fwd {
        vec![IvLabel::gather(back)]
    } else {
        vec![IvLabel::gather(back), IvLabel::gather(fwd)]
    }
}

pub fn build_allgather(n: usize, r: usize, d: usize) -> Result<AllGatherPlan, SchemeError> {
    let topo = RingTopology::new(n, d)?;
    let placement = Placement::cyclic(n, r)?;
    let rounds = (n - r).div_ceil(2 * d);
    let ticks = (1..=rounds)
        .map(|k| Tick {
            intents: (1..=n)
                .map(|i| Intent::new(i, allgather_packet(n, r, d, i, k)))
                .collect(),
            ..Tick::at(k, 1)
        })
        .collect();
    Ok(AllGatherPlan {
        topo,
        placement,
        r,
        schedule: Schedule { ticks },
    })
}

/// Peels `received` against `known` in batches, each batch using only what
/// earlier batches produced. Packets with nothing new are ignored.
pub fn successive_decode_round1(
    node: usize,
    received: &[Vec<IvLabel>],
    known: &KnownSet,
) -> Result<Vec<Vec<IvLabel>>, SchemeError> {
    let mut known = known.clone();
    let mut pending: Vec<&Vec<IvLabel>> = received.iter().collect();
    let mut batches = Vec::new();
    loop {
        let mut batch: Vec<IvLabel> = Vec::new();
        let mut rest = Vec::new();
        for p in pending {
            let unknown: Vec<IvLabel> = p.iter().copied().filter(|l| !known.contains(*l)).collect();
            match unknown.as_slice() {
                [] => {}
                [one] => {
                    if !batch.contains(one) {
                        batch.push(*one);
                    }
                }
                _ => rest.push(p),
            }
        }
        pending = rest;
        if batch.is_empty() {
            break;
        }
        for l in &batch {
            known.insert(*l);
        }
        batches.push(batch);
    }
    if !pending.is_empty() {
        return Err(SchemeError::ChainBroken {
            node,
            remaining: pending.len(),
        });
    }
    Ok(batches)
}

/// `ceil((n - r) / 2d)`.
pub fn allgather_ncl_formula(n: usize, r: usize, d: usize) -> Rational64 {
    int((n - r).div_ceil(2 * d) as i64)
}

/// `(n - r) / 2d`.
pub fn allgather_lower_bound(n: usize, r: usize, d: usize) -> Rational64 {
    frac((n - r) as i64, (2 * d) as i64)
}

/// Lower convex envelope of the integer-load points, evaluated at `r`.
/// Returns `None` outside `1..=n`.
pub fn memory_sharing_envelope(n: usize, d: usize, r: Rational64) -> Option<Rational64> {
    if r < int(1) || r > int(n as i64) {
        return None;
    }
    let hull = lower_hull(
        &(1..=n)
            .map(|x| (int(x as i64), allgather_ncl_formula(n, x, d)))
            .collect::<Vec<_>>(),
    );
    for w in hull.windows(2) {
        let ((x0, y0), (x1, y1)) = (w[0], w[1]);
        if r >= x0 && r <= x1 {
            return Some(y0 + (y1 - y0) * (r - x0) / (x1 - x0));
        }
    }
    hull.last().map(|p| p.1)
}

/// Vertices of the lower hull of points sorted by `x`.
pub fn lower_hull(points: &[(Rational64, Rational64)]) -> Vec<(Rational64, Rational64)> {
    let mut hull: Vec<(Rational64, Rational64)> = Vec::new();
    for &p in points {
        while hull.len() >= 2 {
            let (a, b) = (hull[hull.len() - 2], hull[hull.len() - 1]);
            let cross = (b.0 - a.0) * (p.1 - a.1) - (b.1 - a.1) * (p.0 - a.0);
            if cross <= int(0) {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(p);
    }
    hull
}
