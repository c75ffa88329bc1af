//! All-to-all: node `t` must end up with `v_1^t, ..., v_n^t`.
//!
//! Under the cyclic placement, the IVs still missing at distance `l` form the
//! classes `W_j^(l) = {v_j^{j+l}, v_{j+r-1}^{j-l}}`, and round `l` moves class
//! `l`. Each round starts with every node sending the clockwise item of its
//! class next to the counter-clockwise one; relays then keep pairing a
//! clockwise item arriving from the left with a counter-clockwise item arriving
//! from the right until both reach their destinations.

use std::collections::{BTreeMap, BTreeSet};

use num_rational::Rational64;

use crate::error::SchemeError;
use crate::packet::{Half, IvLabel};
use crate::rational::{frac, int};
use crate::ring::{normalize, ring_distance, Placement, RingTopology};
use crate::sim::{
    run_schedule, Deletion, Intent, Problem, Requirement, Schedule, SimOptions, SimOutcome, Tick,
};

/// Which construction a `(r, d)` pair uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Regime {
    /// `d = 1`, `r >= 2`: one hop per step, relays keep a two-step buffer.
    DEq1,
    /// `r >= 2`, `2 <= d <= 2(r - 1)`: the first hop covers `min(d, r - 1)`.
    Mid,
    /// `d >= 2r - 1`: the two first-hop items go out uncoded.
    Wide,
    /// `d = 1`, `r >= ceil(n/2)`, non-cyclic placement with neighbour pairing.
    AppendixC,
}

impl Regime {
    /// The cyclic-placement regime for `(r, d)`.
    pub fn classify(r: usize, d: usize) -> Regime {
        if d + 1 >= 2 * r {
            Regime::Wide
        } else if d == 1 {
            Regime::DEq1
        } else {
            Regime::Mid
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Regime::DEq1 => "d1",
            Regime::Mid => "mid",
            Regime::Wide => "wide",
            Regime::AppendixC => "appendix-c",
        }
    }
}

#[derive(Clone, Debug)]
pub struct AllToAllPlan {
    pub topo: RingTopology,
    pub placement: Placement,
    pub r: usize,
    pub regime: Regime,
    pub schedule: Schedule,
}

impl AllToAllPlan {
    pub fn requirement(&self) -> Requirement {
        Requirement::new(Problem::AllToAll, self.topo.n())
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

/// `W_j^(l)` for every `j` and `l >= 1`, taken from the definition: IVs
/// computed at `j` whose destination `t` is `l` hops away and no node
/// computing the same file is closer to `t`.
pub fn distance_classes(
    topo: &RingTopology,
    placement: &Placement,
) -> Result<BTreeMap<(usize, usize), BTreeSet<IvLabel>>, SchemeError> {
    if placement.cyclic_load().is_none() {
        return Err(SchemeError::NotCyclic);
    }
    let n = topo.n();
    let mut out: BTreeMap<(usize, usize), BTreeSet<IvLabel>> = BTreeMap::new();
    for j in 1..=n {
        for &f in placement.cached(j) {
            let holders = placement.holders(f);
            for t in 1..=n {
                let l = ring_distance(j, t, n);
                if l == 0 || placement.caches(t, f) {
                    continue;
                }
                if holders.iter().all(|&z| ring_distance(t, z, n) >= l) {
                    out.entry((j, l)).or_default().insert(IvLabel::unicast(f, t));
                }
            }
        }
    }
    Ok(out)
}

/// Schedule for the cyclic placement in whichever regime `(r, d)` falls.
pub fn build_alltoall(n: usize, r: usize, d: usize) -> Result<AllToAllPlan, SchemeError> {
    carpool_plan(n, r, d, Regime::classify(r, d))
}

pub fn build_alltoall_d1(n: usize, r: usize) -> Result<AllToAllPlan, SchemeError> {
    if r < 2 {
        return Err(precondition("d1 scheme", "2 <= r <= n", n, r, 1));
    }
    carpool_plan(n, r, 1, Regime::DEq1)
}

pub fn build_alltoall_mid(n: usize, r: usize, d: usize) -> Result<AllToAllPlan, SchemeError> {
    if r < 2 || d < 2 || d > 2 * (r - 1) {
        return Err(precondition("mid scheme", "r >= 2 and 2 <= d <= 2(r-1)", n, r, d));
    }
    carpool_plan(n, r, d, Regime::Mid)
}

pub fn build_alltoall_wide(n: usize, r: usize, d: usize) -> Result<AllToAllPlan, SchemeError> {
    if r == 0 || d + 1 < 2 * r {
        return Err(precondition("wide scheme", "r >= 1 and d >= 2r-1", n, r, d));
    }
    carpool_plan(n, r, d, Regime::Wide)
}

fn precondition(
    scheme: &'static str,
    requirement: &'static str,
    n: usize,
    r: usize,
    d: usize,
) -> SchemeError {
    SchemeError::Precondition {
        scheme,
        requirement,
        n,
        r,
        d,
    }
}

fn carpool_plan(n: usize, r: usize, d: usize, regime: Regime) -> Result<AllToAllPlan, SchemeError> {
    let topo = RingTopology::new(n, d)?;
    let placement = Placement::cyclic(n, r)?;
    let rounds = (n - r).div_ceil(2);
    let odd = (n - r) % 2 == 1;
    let mut ticks = Vec::new();
    for j in 1..=rounds {
        let halve = odd && j == rounds;
        let cw = |o: i64| IvLabel::unicast(normalize(o, n), normalize(o + j as i64, n));
        let ccw =
            |o: i64| IvLabel::unicast(normalize(o + r as i64 - 1, n), normalize(o - j as i64, n));
        let split = |l: IvLabel, h: Half| if halve { l.with_half(h) } else { l };
        let mut round_ticks: Vec<Tick> = Vec::new();

        // hops already covered when the relay steps begin, if any are needed
        let relay_from = match regime {
            Regime::Wide => {
                let done = j <= d;
                let mut t0 = Tick::at(j, 0);
                let mut t1 = Tick::at(j, 1);
                for i in 1..=n as i64 {
                    let (b, a) = if done {
                        (split(ccw(i), Half::Second), split(cw(i), Half::First))
                    } else {
                        (ccw(i), cw(i))
                    };
                    t0.intents.push(Intent::new(i as usize, [b]));
                    t1.intents.push(Intent::new(i as usize, [a]));
                }
                round_ticks.push(t0);
                round_ticks.push(t1);
                (!done).then_some(d)
            }
            _ => {
                let d1 = d.min(r - 1);
                let done = j <= d1;
                let mut t1 = Tick::at(j, 1);
                for i in 1..=n as i64 {
                    let (a, b) = if done {
                        (split(cw(i), Half::First), split(ccw(i), Half::Second))
                    } else {
                        (cw(i), ccw(i))
                    };
                    t1.intents.push(Intent::new(i as usize, [a, b]));
                }
                round_ticks.push(t1);
                (!done).then_some(d1)
            }
        };

        if let Some(mut covered) = relay_from {
            let mut step = 2;
            loop {
                let last = j - covered <= d;
                let mut t = Tick::at(j, step);
                for x in 1..=n as i64 {
                    let c = covered as i64;
                    let (a, b) = (cw(x - c), ccw(x + c));
                    let labels = if a == b {
                        vec![a]
                    } else if last {
                        vec![split(a, Half::First), split(b, Half::Second)]
                    } else {
                        vec![a, b]
                    };
                    t.intents.push(Intent::new(x as usize, labels));
                }
                round_ticks.push(t);
                if last {
                    break;
                }
                covered += d;
                step += 1;
            }
        }

        match regime {
            Regime::DEq1 => {
                for t in round_ticks.iter_mut() {
                    let k = t.step.expect("steps are numbered") as i64;
                    for i in 1..=n as i64 {
                        t.deletions.push(Deletion::Label {
                            node: i as usize,
                            label: cw(i - k + 2),
                        });
                        t.deletions.push(Deletion::Label {
                            node: i as usize,
                            label: ccw(i + k - 2),
                        });
                    }
                }
            }
            _ => {
                if let Some(last) = round_ticks.last_mut() {
                    last.deletions.push(Deletion::Transient);
                }
            }
        }
        ticks.extend(round_ticks);
    }
    Ok(AllToAllPlan {
        topo,
        placement,
        r,
        regime,
        schedule: Schedule { ticks },
    })
}

/// Neighbour-pairing schedule for `d = 1` and `r >= ceil(n/2)` on
/// [`Placement::appendix_c`].
pub fn build_alltoall_appendix_c(n: usize, r: usize) -> Result<AllToAllPlan, SchemeError> {
    let placement = Placement::appendix_c(n, r)?;
    build_alltoall_circulant(placement)
}

/// Every node hears only its two neighbours, so each missing file of node `t`
/// is sent by `t - 1` or `t + 1`. A sender pairs an item for its right
/// neighbour with one for its left neighbour whenever each receiver already
/// computes the other's item.
pub fn build_alltoall_circulant(placement: Placement) -> Result<AllToAllPlan, SchemeError> {
    let n = placement.n();
    let r = placement.cached(1).len();
    let topo = RingTopology::new(n, 1)?;
    let offsets = placement
        .circulant_offsets()
        .ok_or(precondition("neighbour pairing", "a circulant placement", n, r, 1))?;
    let has = |m: i64| offsets.contains(&(m.rem_euclid(n as i64) as usize));

    // offsets m of files (t + m) that node t misses, split by which side sends them
    let mut from_left: Vec<(usize, bool)> = Vec::new();
    let mut from_right: Vec<(usize, bool)> = Vec::new();
    let mut flexible: Vec<usize> = Vec::new();
    for m in 0..n {
        let mi = m as i64;
        if has(mi) {
            continue;
        }
        let can_l = has(mi + 1);
        let pair_l = can_l && has(mi + 2);
        let can_r = has(mi - 1);
        let pair_r = can_r && has(mi - 2);
        match (pair_l, pair_r) {
            (true, true) => flexible.push(m),
            (true, false) => from_left.push((m, true)),
            (false, true) => from_right.push((m, true)),
            (false, false) if can_l => from_left.push((m, false)),
            (false, false) if can_r => from_right.push((m, false)),
            _ => return Err(precondition("neighbour pairing", "every missing file next door", n, r, 1)),
        }
    }
    let pl = from_left.iter().filter(|x| x.1).count();
    let pr = from_right.iter().filter(|x| x.1).count();
    let f = flexible.len();
    let to_left = (0..=f)
        .rev()
        .max_by_key(|&x| (pl + x).min(pr + f - x))
        .unwrap_or(0);
    for (k, &m) in flexible.iter().enumerate() {
        if k < to_left {
            from_left.push((m, true));
        } else {
            from_right.push((m, true));
        }
    }

    // relative to the sender s: an item for s+1 with offset m is file s+1+m
    let mut right_items: Vec<(usize, usize, bool)> = from_left
        .iter()
        .map(|&(m, p)| ((m + 1) % n, m, p))
        .collect();
    let mut left_items: Vec<(usize, usize, bool)> = from_right
        .iter()
        .map(|&(m, p)| ((m + n - 1) % n, m, p))
        .collect();
    right_items.sort();
    left_items.sort();
    let pa: Vec<usize> = right_items.iter().filter(|x| x.2).map(|x| x.1).collect();
    let pb: Vec<usize> = left_items.iter().filter(|x| x.2).map(|x| x.1).collect();
    let pairs = pa.len().min(pb.len());

    // each packet: Option<right offset>, Option<left offset>
    let mut packets: Vec<(Option<usize>, Option<usize>)> =
        (0..pairs).map(|k| (Some(pa[k]), Some(pb[k]))).collect();
    let paired_a: BTreeSet<usize> = pa[..pairs].iter().copied().collect();
    let paired_b: BTreeSet<usize> = pb[..pairs].iter().copied().collect();
    for &(_, m, _) in &right_items {
        if !paired_a.contains(&m) {
            packets.push((Some(m), None));
        }
    }
    for &(_, m, _) in &left_items {
        if !paired_b.contains(&m) {
            packets.push((None, Some(m)));
        }
    }

    let ticks = packets
        .iter()
        .enumerate()
        .map(|(k, &(a, b))| Tick {
            intents: (1..=n)
                .map(|s| {
                    let si = s as i64;
                    let right = normalize(si + 1, n);
                    let left = normalize(si - 1, n);
                    let mut labels = Vec::new();
                    if let Some(m) = a {
                        labels.push(IvLabel::unicast(normalize(si + 1 + m as i64, n), right));
                    }
                    if let Some(m) = b {
                        labels.push(IvLabel::unicast(normalize(si - 1 + m as i64, n), left));
                    }
                    Intent::new(s, labels)
                })
                .collect(),
            ..Tick::at(k + 1, 1)
        })
        .collect();
    Ok(AllToAllPlan {
        topo,
        placement,
        r,
        regime: Regime::AppendixC,
        schedule: Schedule { ticks },
    })
}

/// Exact load of the cyclic-placement schedule from [`build_alltoall`].
pub fn alltoall_exact(n: usize, r: usize, d: usize) -> Rational64 {
    if r >= n {
        return int(0);
    }
    let rounds = (n - r).div_ceil(2);
    let odd = (n - r) % 2 == 1;
    let regime = Regime::classify(r, d);
    let mut total = int(0);
    for j in 1..=rounds {
        let cost = match regime {
            Regime::Wide => j.div_ceil(d) + 1,
            _ => {
                let d1 = d.min(r - 1);
                if j <= d1 {
                    1
                } else {
                    (j - d1).div_ceil(d) + 1
                }
            }
        };
        total += int(cost as i64);
    }
    if odd {
        let wide_direct = regime == Regime::Wide && rounds <= d;
        total -= if wide_direct { int(1) } else { frac(1, 2) };
    }
    total
}

/// Closed form for the cyclic schedule, with the three cases
/// split at `d <= r - 1`, `r - 1 < d <= 2(r - 1)` and `d >= 2r - 1`.
pub fn regime_closed_form(n: usize, r: usize, d: usize) -> Rational64 {
    let (nn, rr, dd) = (int(n as i64), int(r as i64), int(d as i64));
    let two = int(2);
    if 2 * r <= d + 1 {
        nn / (int(4) * dd) * (nn / two - rr) + int(3) * (nn - rr) / int(4) + rr * rr / (int(8) * dd)
    } else if d + 1 > r {
        nn / (int(4) * dd) * (nn / two - int(3) * rr)
            + (int(3) * nn - int(5) * rr) / int(4)
            + (int(9) * rr * rr + int(4) * (nn - rr + int(1))) / (int(8) * dd)
    } else {
        nn / (int(4) * dd) * (nn / two - rr) + (nn - rr) / int(4) + rr * rr / (int(8) * dd)
    }
}

/// `n/(4d) * (n/2 - r + 1)` for `r <= ceil(n/2) - 1`.
pub fn lb_cyclic(n: usize, r: usize, d: usize) -> Option<Rational64> {
    (r < n.div_ceil(2)).then(|| {
        frac(n as i64, 4 * d as i64) * (frac(n as i64, 2) - int(r as i64) + int(1))
    })
}

/// `(n - r)/2` for `d = 1`, `r >= ceil(n/2)`, any placement.
pub fn lb_arbitrary_d1(n: usize, r: usize) -> Option<Rational64> {
    (r >= n.div_ceil(2) && r <= n).then(|| frac((n - r) as i64, 2))
}

/// `(n - r)/(2d)` for `d >= 2`, `r >= ceil(n/2)`, any placement.
pub fn lb_arbitrary(n: usize, r: usize, d: usize) -> Option<Rational64> {
    (d >= 2 && r >= n.div_ceil(2) && r <= n).then(|| frac((n - r) as i64, 2 * d as i64))
}

/// The strongest of the lower bounds above that applies to the cyclic placement.
pub fn best_lower_bound(n: usize, r: usize, d: usize) -> Option<Rational64> {
    lb_cyclic(n, r, d)
        .or_else(|| if d == 1 { lb_arbitrary_d1(n, r) } else { lb_arbitrary(n, r, d) })
}

/// All closed forms for one parameter triple.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AllToAllFormulas {
    pub ach_exact: Rational64,
    pub closed_form: Rational64,
    pub lb_cyclic: Option<Rational64>,
    pub lb_arbitrary_d1: Option<Rational64>,
    pub lb_arbitrary: Option<Rational64>,
    pub uncoded: Rational64,
    pub appendix_c: Option<Rational64>,
}

pub fn alltoall_formulas(n: usize, r: usize, d: usize) -> AllToAllFormulas {
    let ach = alltoall_exact(n, r, d);
    AllToAllFormulas {
        ach_exact: ach,
        closed_form: regime_closed_form(n, r, d),
        lb_cyclic: lb_cyclic(n, r, d),
        lb_arbitrary_d1: if d == 1 { lb_arbitrary_d1(n, r) } else { None },
        lb_arbitrary: lb_arbitrary(n, r, d),
        uncoded: ach * int(2),
        appendix_c: (d == 1 && r >= n.div_ceil(2) && r <= n)
            .then(|| int((n - r).div_ceil(2) as i64)),
    }
}
