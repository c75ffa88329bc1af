//! Tick-synchronous broadcast simulator.
//!
//! In each tick every scheduled sender broadcasts one packet to all nodes
//! within distance `d`. Packets are encoded from what the sender knows when
//! the tick starts. Each receiver then peels its inbox in batches: the first
//! batch holds everything decodable from prior knowledge, the second what
//! became decodable after adding the first, and so on. Packets still
//! undecodable at the end of the tick are dropped, after which the tick's
//! deletions run.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use num_rational::Rational64;
use serde_json::json;

use crate::error::SimError;
use crate::packet::{xor_into, Half, IvLabel, KnownSet, PacketConfig};
use crate::rational::{render_ratio, to_f64};
use crate::ring::{ring_distance, Placement, RingTopology};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Problem {
    /// Every node needs every `V_s`.
    AllGather,
    /// Node `t` needs `v_1^t, ..., v_n^t`.
    AllToAll,
}

impl Problem {
    pub fn name(self) -> &'static str {
        match self {
            Problem::AllGather => "allgather",
            Problem::AllToAll => "alltoall",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "allgather" | "all-gather" => Some(Problem::AllGather),
            "alltoall" | "all-to-all" => Some(Problem::AllToAll),
            _ => None,
        }
    }

    /// IVs node `i` computes from its own files.
    pub fn mapped(self, placement: &Placement, i: usize) -> Vec<IvLabel> {
        let files = placement.cached(i);
        match self {
            Problem::AllGather => files.iter().map(|&f| IvLabel::gather(f)).collect(),
            Problem::AllToAll => files
                .iter()
                .flat_map(|&f| (1..=placement.n()).map(move |t| IvLabel::unicast(f, t)))
                .collect(),
        }
    }
}

/// The IVs each node must hold when the exchange is over.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Requirement {
    problem: Problem,
    per_node: Vec<Vec<IvLabel>>,
}

impl Requirement {
    pub fn new(problem: Problem, n: usize) -> Self {
        let per_node = (1..=n)
            .map(|k| match problem {
                Problem::AllGather => (1..=n).map(IvLabel::gather).collect(),
                Problem::AllToAll => (1..=n).map(|s| IvLabel::unicast(s, k)).collect(),
            })
            .collect();
        Self { problem, per_node }
    }

    pub fn problem(&self) -> Problem {
        self.problem
    }

    pub fn n(&self) -> usize {
        self.per_node.len()
    }

    pub fn of(&self, node: usize) -> &[IvLabel] {
        &self.per_node[node - 1]
    }

    pub fn needs(&self, node: usize, label: IvLabel) -> bool {
        let full = label.full();
        match self.problem {
            Problem::AllGather => !full.is_unicast(),
            Problem::AllToAll => full.dest() == Some(node),
        }
    }
}

/// One planned broadcast: `sender` sends the XOR of `labels`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Intent {
    pub sender: usize,
    pub labels: Vec<IvLabel>,
}

impl Intent {
    /// Repeated labels cancel in pairs, as they would under XOR.
    pub fn new(sender: usize, labels: impl IntoIterator<Item = IvLabel>) -> Self {
        let mut out: Vec<IvLabel> = Vec::new();
        for l in labels {
            match out.iter().position(|x| *x == l) {
                Some(p) => {
                    out.remove(p);
                }
                None => out.push(l),
            }
        }
        Self { sender, labels: out }
    }

    pub fn size_units(&self) -> Rational64 {
        self.labels
            .iter()
            .map(IvLabel::size_units)
            .max()
            .unwrap_or_else(|| Rational64::from_integer(0))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Deletion {
    /// `node` drops `label` unless it maps or needs it.
    Label { node: usize, label: IvLabel },
    /// Every node drops whatever it decoded but neither maps nor needs.
    Transient,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Tick {
    pub round: Option<usize>,
    pub step: Option<usize>,
    pub intents: Vec<Intent>,
    pub deletions: Vec<Deletion>,
}

impl Tick {
    pub fn at(round: usize, step: usize) -> Self {
        Self {
            round: Some(round),
            step: Some(step),
            ..Self::default()
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Schedule {
    pub ticks: Vec<Tick>,
}

impl Schedule {
    pub fn transmissions(&self) -> impl Iterator<Item = &Intent> {
        self.ticks.iter().flat_map(|t| t.intents.iter())
    }

    pub fn total_units(&self) -> Rational64 {
        self.transmissions().map(Intent::size_units).sum()
    }
}

/// One broadcast as it happened.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TransmissionRecord {
    pub tick: usize,
    pub round: Option<usize>,
    pub step: Option<usize>,
    pub sender: usize,
    pub labels: Vec<IvLabel>,
    pub size_units: Rational64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DecodeEvent {
    pub tick: usize,
    pub node: usize,
    /// 1 for labels peeled straight from prior knowledge, 2 for those that
    /// needed a batch-1 label, and so on.
    pub batch: usize,
    pub label: IvLabel,
    pub from: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NclReport {
    pub total_units: Rational64,
    pub ncl: Rational64,
    pub ticks: usize,
    pub per_node_units: Vec<Rational64>,
    pub complete: bool,
    pub failure: Option<String>,
}

impl NclReport {
    pub fn to_json(&self) -> String {
        let per_node: Vec<String> = self.per_node_units.iter().map(|u| render_ratio(*u)).collect();
        let value = json!({
            "schema": "1",
            "complete": self.complete,
            "ncl": render_ratio(self.ncl),
            "ncl_float": (to_f64(self.ncl) * 1e6).round() / 1e6,
            "total_units": render_ratio(self.total_units),
            "ticks": self.ticks,
            "per_node_units": per_node,
            "failure": self.failure,
        });
        serde_json::to_string_pretty(&value).expect("report serializes")
    }
}

#[derive(Clone, Debug)]
pub struct SimOutcome {
    pub ledger: Vec<TransmissionRecord>,
    pub report: NclReport,
    pub decodes: Vec<DecodeEvent>,
    /// `(tick, node, label)` for every label a deletion actually removed.
    pub deleted: Vec<(usize, usize, IvLabel)>,
    pub final_known: Vec<KnownSet>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SimOptions {
    /// When set, every node also tracks real payload bytes and every peel is
    /// checked against the generator.
    pub payloads: Option<PacketConfig>,
}

impl SimOptions {
    pub fn verified() -> Self {
        Self {
            payloads: Some(PacketConfig::default()),
        }
    }
}

struct Node {
    known: KnownSet,
    deleted: HashSet<IvLabel>,
    bytes: HashMap<IvLabel, Vec<u8>>,
}

impl Node {
    fn payload(&self, label: IvLabel) -> Option<Vec<u8>> {
        if let Some(b) = self.bytes.get(&label) {
            return Some(b.clone());
        }
        match label.half() {
            Some(h) => {
                let full = self.bytes.get(&label.full())?;
                let split = full.len().div_ceil(2);
                Some(match h {
                    Half::First => full[..split].to_vec(),
                    Half::Second => full[split..].to_vec(),
                })
            }
            None => {
                let a = self.bytes.get(&label.with_half(Half::First))?;
                let b = self.bytes.get(&label.with_half(Half::Second))?;
                Some([a.as_slice(), b.as_slice()].concat())
            }
        }
    }

    fn forget(&mut self, label: IvLabel) {
        self.known.remove(label);
        self.bytes.remove(&label);
        self.bytes.remove(&label.with_half(Half::First));
        self.bytes.remove(&label.with_half(Half::Second));
    }
}

pub fn run_schedule(
    topo: &RingTopology,
    placement: &Placement,
    schedule: &Schedule,
    requirement: &Requirement,
    opts: SimOptions,
) -> Result<SimOutcome, SimError> {
    let n = topo.n();
    if placement.n() != n || requirement.n() != n {
        return Err(SimError::SizeMismatch {
            placement: placement.n(),
            ring: n,
        });
    }
    let problem = requirement.problem();
    let receivers: Vec<Vec<usize>> = (1..=n).map(|i| topo.neighbors(i)).collect();
    let mut nodes: Vec<Node> = (1..=n)
        .map(|i| {
            let mapped = problem.mapped(placement, i);
            let bytes = match &opts.payloads {
                Some(cfg) => mapped.iter().map(|&l| (l, cfg.payload(l))).collect(),
                None => HashMap::new(),
            };
            Node {
                known: mapped.into_iter().collect(),
                deleted: HashSet::new(),
                bytes,
            }
        })
        .collect();
    let cache_derived = |node: usize, l: IvLabel| placement.caches(node, l.source());

    let mut ledger = Vec::new();
    let mut decodes = Vec::new();
    let mut deleted_log = Vec::new();
    let mut per_node_units = vec![Rational64::from_integer(0); n];
    // (node, needed label) pairs that were blocked by a deleted label
    let mut blocked: HashMap<(usize, IvLabel), IvLabel> = HashMap::new();

    for (t, tick) in schedule.ticks.iter().enumerate() {
        let tick_no = t + 1;
        let mut sent: Vec<(usize, Vec<IvLabel>, Option<Vec<u8>>)> = Vec::new();
        for intent in &tick.intents {
            let s = intent.sender;
            let bad = |reason: &str| SimError::MalformedIntent {
                tick: tick_no,
                sender: s,
                reason: reason.to_string(),
            };
            if s == 0 || s > n {
                return Err(bad("sender out of range"));
            }
            if intent.labels.is_empty() {
                return Err(bad("empty packet"));
            }
            let unicast = problem == Problem::AllToAll;
            if intent.labels.iter().any(|l| l.is_unicast() != unicast) {
                return Err(bad("label flavour does not match the problem"));
            }
            let sender = &nodes[s - 1];
            for &l in &intent.labels {
                if !sender.known.contains(l) {
                    return Err(if sender.deleted.contains(&l.full()) {
                        SimError::DeletedLabelNeeded {
                            tick: tick_no,
                            node: s,
                            label: l,
                        }
                    } else {
                        SimError::EncodeFromUnknown {
                            tick: tick_no,
                            sender: s,
                            label: l,
                        }
                    });
                }
            }
            let bytes = opts.payloads.map(|_| {
                let mut acc = Vec::new();
                for &l in &intent.labels {
                    xor_into(&mut acc, &sender.payload(l).expect("known label has bytes"));
                }
                acc
            });
            let size = intent.size_units();
            per_node_units[s - 1] += size;
            ledger.push(TransmissionRecord {
                tick: tick_no,
                round: tick.round,
                step: tick.step,
                sender: s,
                labels: intent.labels.clone(),
                size_units: size,
            });
            sent.push((s, intent.labels.clone(), bytes));
        }

        let mut inbox: Vec<Vec<usize>> = vec![Vec::new(); n];
        for (idx, (s, _, _)) in sent.iter().enumerate() {
            for &rcv in &receivers[*s - 1] {
                inbox[rcv - 1].push(idx);
            }
        }

        for i in 1..=n {
            let node = &mut nodes[i - 1];
            let mut pending = std::mem::take(&mut inbox[i - 1]);
            let mut batch = 1;
            loop {
                let mut fresh: Vec<(IvLabel, usize)> = Vec::new();
                let mut rest = Vec::new();
                for idx in pending {
                    let labels = &sent[idx].1;
                    let unknown: Vec<IvLabel> = labels
                        .iter()
                        .copied()
                        .filter(|l| !node.known.contains(*l))
                        .collect();
                    match unknown.len() {
                        0 => {}
                        1 => {
                            if !fresh.iter().any(|(l, _)| *l == unknown[0]) {
                                fresh.push((unknown[0], idx));
                            }
                        }
                        _ => rest.push(idx),
                    }
                }
                pending = rest;
                if fresh.is_empty() {
                    break;
                }
                for &(label, idx) in &fresh {
                    if let Some(cfg) = &opts.payloads {
                        let (_, labels, bytes) = &sent[idx];
                        let mut acc = bytes.clone().expect("payloads tracked");
                        for &other in labels.iter().filter(|l| **l != label) {
                            xor_into(&mut acc, &node.payload(other).expect("known label has bytes"));
                        }
                        let expect_len = cfg.payload_len(label);
                        if acc[expect_len.min(acc.len())..].iter().any(|&b| b != 0) {
                            return Err(SimError::PayloadMismatch {
                                tick: tick_no,
                                node: i,
                                label,
                            });
                        }
                        acc.resize(expect_len, 0);
                        if acc != cfg.payload(label) {
                            return Err(SimError::PayloadMismatch {
                                tick: tick_no,
                                node: i,
                                label,
                            });
                        }
                        node.bytes.insert(label, acc);
                    }
                    node.known.insert(label);
                    node.deleted.remove(&label.full());
                    decodes.push(DecodeEvent {
                        tick: tick_no,
                        node: i,
                        batch,
                        label,
                        from: sent[idx].0,
                    });
                }
                batch += 1;
            }
            for idx in pending {
                let labels = &sent[idx].1;
                let unknown: Vec<IvLabel> = labels
                    .iter()
                    .copied()
                    .filter(|l| !node.known.contains(*l))
                    .collect();
                let (gone, live): (Vec<IvLabel>, Vec<IvLabel>) = unknown
                    .into_iter()
                    .partition(|l| node.deleted.contains(&l.full()));
                if let (Some(&g), [want]) = (gone.first(), live.as_slice()) {
                    if requirement.needs(i, *want) {
                        blocked.insert((i, want.full()), g);
                    }
                }
            }
        }

        for del in &tick.deletions {
            match *del {
                Deletion::Label { node, label } => {
                    if cache_derived(node, label) || requirement.needs(node, label) {
                        continue;
                    }
                    let st = &mut nodes[node - 1];
                    if st.known.contains(label) {
                        st.forget(label);
                        st.deleted.insert(label.full());
                        deleted_log.push((tick_no, node, label));
                    }
                }
                Deletion::Transient => {
                    for (k, st) in nodes.iter_mut().enumerate() {
                        let node = k + 1;
                        let drop: Vec<IvLabel> = st
                            .known
                            .iter()
                            .map(|l| l.full())
                            .filter(|l| !cache_derived(node, *l) && !requirement.needs(node, *l))
                            .collect::<BTreeSet<_>>()
                            .into_iter()
                            .collect();
                        for l in drop {
                            st.forget(l);
                            st.deleted.insert(l);
                            deleted_log.push((tick_no, node, l));
                        }
                    }
                }
            }
        }
    }

    let mut failure = None;
    for i in 1..=n {
        let node = &nodes[i - 1];
        let missing: Vec<IvLabel> = requirement
            .of(i)
            .iter()
            .copied()
            .filter(|l| !node.known.contains(*l))
            .collect();
        for &m in &missing {
            if node.deleted.contains(&m) {
                return Err(SimError::DeletedLabelNeeded {
                    tick: schedule.ticks.len(),
                    node: i,
                    label: m,
                });
            }
            if let Some(&g) = blocked.get(&(i, m)) {
                return Err(SimError::DeletedLabelNeeded {
                    tick: schedule.ticks.len(),
                    node: i,
                    label: g,
                });
            }
        }
        if failure.is_none() && !missing.is_empty() {
            failure = Some(format!(
                "node {i} is missing {} labels, first {}",
                missing.len(),
                missing[0]
            ));
        }
    }

    let total_units: Rational64 = per_node_units.iter().copied().sum();
    let report = NclReport {
        total_units,
        ncl: total_units / Rational64::from_integer(n as i64),
        ticks: schedule.ticks.len(),
        per_node_units,
        complete: failure.is_none(),
        failure,
    };
    Ok(SimOutcome {
        ledger,
        report,
        decodes,
        deleted: deleted_log,
        final_known: nodes.into_iter().map(|nd| nd.known).collect(),
    })
}

/// Sum of packet sizes over `n`.
pub fn ncl_of(ledger: &[TransmissionRecord], n: usize) -> Rational64 {
    let total: Rational64 = ledger.iter().map(|r| r.size_units).sum();
    total / Rational64::from_integer(n as i64)
}

/// Result of [`closure_oracle`]: which required labels each node still lacks.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OracleVerdict {
    pub complete: bool,
    pub deficits: BTreeMap<usize, Vec<IvLabel>>,
    pub closure: Vec<BTreeSet<IvLabel>>,
}

/// Fixed-point peeling over every packet a node ever heard, in any order and
/// with nothing ever forgotten.
pub fn closure_oracle(
    topo: &RingTopology,
    placement: &Placement,
    ledger: &[TransmissionRecord],
    requirement: &Requirement,
) -> OracleVerdict {
    let n = topo.n();
    let d = topo.d();
    let problem = requirement.problem();

    fn holds(set: &BTreeSet<IvLabel>, l: IvLabel) -> bool {
        if set.contains(&l) {
            return true;
        }
        match l.half() {
            Some(_) => set.contains(&l.full()),
            None => {
                set.contains(&l.with_half(Half::First)) && set.contains(&l.with_half(Half::Second))
            }
        }
    }

    let mut heard: Vec<Vec<&[IvLabel]>> = vec![Vec::new(); n];
    for rec in ledger {
        for j in 1..=n {
            let dist = ring_distance(rec.sender, j, n);
            if dist >= 1 && dist <= d {
                heard[j - 1].push(&rec.labels);
            }
        }
    }

    let mut closure: Vec<BTreeSet<IvLabel>> = (1..=n)
        .map(|i| problem.mapped(placement, i).into_iter().collect())
        .collect();
    for i in 0..n {
        let set = &mut closure[i];
        loop {
            let mut grew = false;
            for pkt in &heard[i] {
                let mut unknown = pkt.iter().filter(|l| !holds(set, **l));
                if let (Some(&one), None) = (unknown.next(), unknown.next()) {
                    set.insert(one);
                    if let Some(h) = one.half() {
                        if holds(set, one.with_half(h.complement())) {
                            set.insert(one.full());
                        }
                    }
                    grew = true;
                }
            }
            if !grew {
                break;
            }
        }
    }

    let mut deficits = BTreeMap::new();
    for i in 1..=n {
        let missing: Vec<IvLabel> = requirement
            .of(i)
            .iter()
            .copied()
            .filter(|l| !holds(&closure[i - 1], *l))
            .collect();
        if !missing.is_empty() {
            deficits.insert(i, missing);
        }
    }
    OracleVerdict {
        complete: deficits.is_empty(),
        deficits,
        closure,
    }
}

/// `tick,round,step,sender,labels,size_units`, labels joined by `+`.
pub fn ledger_csv(ledger: &[TransmissionRecord]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["tick", "round", "step", "sender", "labels", "size_units"])
        .expect("write to memory");
    for r in ledger {
        let labels: Vec<String> = r.labels.iter().map(|l| l.to_string()).collect();
        w.write_record([
            r.tick.to_string(),
            r.round.map(|x| x.to_string()).unwrap_or_default(),
            r.step.map(|x| x.to_string()).unwrap_or_default(),
            r.sender.to_string(),
            labels.join("+"),
            render_ratio(r.size_units),
        ])
        .expect("write to memory");
    }
    String::from_utf8(w.into_inner().expect("flush to memory")).expect("ascii csv")
}
