//! The small worked examples rendered as plain-text tables, plus the
//! hand-transcribed reference copies they are compared against.

use std::collections::BTreeMap;

use crate::allgather::build_allgather;
use crate::alltoall::{build_alltoall_appendix_c, build_alltoall_d1, AllToAllPlan};
use crate::error::SchemeError;
use crate::packet::IvLabel;
use crate::ring::{normalize, Placement};
use crate::sim::TransmissionRecord;

pub const DECODE_ORDER: &str = include_str!("../goldens/decode_order.txt");
pub const UNIT_DISTANCE_EXCHANGE: &str = include_str!("../goldens/unit_distance_exchange.txt");
pub const LARGE_LOAD_PLACEMENT: &str = include_str!("../goldens/large_load_placement.txt");
pub const LARGE_LOAD_NODE4: &str = include_str!("../goldens/large_load_node4.txt");

fn grid(col: char, n: usize, cell: impl Fn(usize, usize) -> String) -> String {
    let mut out = String::from("    ");
    let header: Vec<String> = (1..=n).map(|j| format!("{col}{j}")).collect();
    out.push_str(&pad_row(&header));
    out.push('\n');
    for i in 1..=n {
        let cells: Vec<String> = (1..=n).map(|j| cell(i, j)).collect();
        out.push_str(&format!("{:<4}{}\n", format!("n{i}"), pad_row(&cells)));
    }
    out
}

fn pad_row(cells: &[String]) -> String {
    cells
        .iter()
        .map(|c| format!("{c:<3}"))
        .collect::<String>()
        .trim_end()
        .to_string()
}

/// Which batch each node decoded each `V_j` in, `*` for symbols it computes,
/// for `n = 8`, `r = 2`, `d = 3`.
pub fn render_decode_order() -> Result<String, SchemeError> {
    let plan = build_allgather(8, 2, 3)?;
    let out = plan.run()?;
    let mut batch: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    for e in &out.decodes {
        batch.insert((e.node, e.label.source()), e.batch);
    }
    Ok(grid('V', 8, |i, j| {
        if plan.placement.caches(i, j) {
            "*".to_string()
        } else {
            batch.get(&(i, j)).map_or("-".to_string(), |b| b.to_string())
        }
    }))
}

fn packet_text(labels: &[IvLabel]) -> String {
    labels
        .iter()
        .map(|l| l.full().to_string())
        .collect::<Vec<_>>()
        .join(" + ")
}

/// Per tick, one line per node: what it sends, what it hears from its
/// left neighbour, what it hears from its right neighbour.
fn render_exchange(plan: &AllToAllPlan, nodes: &[usize], ledger: &[TransmissionRecord]) -> String {
    let n = plan.topo.n();
    let mut by_tick: BTreeMap<usize, BTreeMap<usize, &TransmissionRecord>> = BTreeMap::new();
    for rec in ledger {
        by_tick.entry(rec.tick).or_default().insert(rec.sender, rec);
    }
    let mut blocks = Vec::new();
    for sent in by_tick.values() {
        let any = sent.values().next().expect("non-empty tick");
        let mut block = match plan.regime {
            crate::alltoall::Regime::AppendixC => format!("step {}\n", any.round.unwrap_or(0)),
            _ => format!(
                "round {} step {}\n",
                any.round.unwrap_or(0),
                any.step.unwrap_or(0)
            ),
        };
        for &i in nodes {
            let left = normalize(i as i64 - 1, n);
            let right = normalize(i as i64 + 1, n);
            let show = |s: usize| sent.get(&s).map_or("-".to_string(), |r| packet_text(&r.labels));
            block.push_str(&format!("n{i} | {} | {} | {}\n", show(i), show(left), show(right)));
        }
        blocks.push(block);
    }
    blocks.join("\n")
}

/// Broadcast lists of the `n = 8`, `r = 3`, `d = 1` exchange, halves shown
/// as the IV they belong to.
pub fn render_unit_distance_exchange() -> Result<String, SchemeError> {
    let plan = build_alltoall_d1(8, 3)?;
    let out = plan.run()?;
    Ok(render_exchange(&plan, &(1..=8).collect::<Vec<_>>(), &out.ledger))
}

/// Node 4's sends and receptions for `n = 8`, `r = 4`, `d = 1`.
pub fn render_large_load_node4() -> Result<String, SchemeError> {
    let plan = build_alltoall_appendix_c(8, 4)?;
    let out = plan.run()?;
    Ok(render_exchange(&plan, &[4], &out.ledger))
}

/// The large-load placement for `n = 8`, `r = 4`.
pub fn render_large_load_placement() -> Result<String, SchemeError> {
    let p = Placement::appendix_c(8, 4)?;
    Ok(grid('w', 8, |i, j| {
        if p.caches(i, j) { "*" } else { "." }.to_string()
    }))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GoldenCheck {
    pub name: &'static str,
    pub expected: &'static str,
    pub actual: String,
}

impl GoldenCheck {
    pub fn matches(&self) -> bool {
        self.expected == self.actual
    }

    /// Line-by-line differences as `-expected` / `+actual` pairs.
    pub fn diff(&self) -> String {
        let exp: Vec<&str> = self.expected.lines().collect();
        let act: Vec<&str> = self.actual.lines().collect();
        let mut out = String::new();
        for k in 0..exp.len().max(act.len()) {
            let (e, a) = (exp.get(k), act.get(k));
            if e != a {
                if let Some(e) = e {
                    out.push_str(&format!("{}:-{e}\n", k + 1));
                }
                if let Some(a) = a {
                    out.push_str(&format!("{}:+{a}\n", k + 1));
                }
            }
        }
        out
    }
}

/// Renders every worked example and pairs it with its reference copy.
pub fn check_goldens() -> Result<Vec<GoldenCheck>, SchemeError> {
    Ok(vec![
        GoldenCheck {
            name: "decode-order",
            expected: DECODE_ORDER,
            actual: render_decode_order()?,
        },
        GoldenCheck {
            name: "unit-distance-exchange",
            expected: UNIT_DISTANCE_EXCHANGE,
            actual: render_unit_distance_exchange()?,
        },
        GoldenCheck {
            name: "large-load-placement",
            expected: LARGE_LOAD_PLACEMENT,
            actual: render_large_load_placement()?,
        },
        GoldenCheck {
            name: "large-load-node4",
            expected: LARGE_LOAD_NODE4,
            actual: render_large_load_node4()?,
        },
    ])
}
