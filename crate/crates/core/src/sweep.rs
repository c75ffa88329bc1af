//! Parameter sweeps over `(n, r, d)` producing one CSV row per triple.

use num_rational::Rational64;
use rayon::prelude::*;

use crate::allgather::{allgather_lower_bound, allgather_ncl_formula, build_allgather};
use crate::alltoall::{alltoall_exact, best_lower_bound, build_alltoall, build_alltoall_appendix_c, lb_arbitrary_d1};
use crate::baselines::{build_uncoded, uncode};
use crate::error::SchemeError;
use crate::rational::{int, render_float, render_ratio};
use crate::sim::{Problem, SimOutcome};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PlacementKind {
    Cyclic,
    AppendixC,
}

impl PlacementKind {
    pub fn name(self) -> &'static str {
        match self {
            PlacementKind::Cyclic => "cyclic",
            PlacementKind::AppendixC => "appendix-c",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SchemeKind {
    Coded,
    Uncoded,
}

impl SchemeKind {
    pub fn name(self) -> &'static str {
        match self {
            SchemeKind::Coded => "coded",
            SchemeKind::Uncoded => "uncoded",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SweepSpec {
    pub problem: Problem,
    pub ns: Vec<usize>,
    pub r_min: usize,
    /// Clamped to `n` for each ring size.
    pub r_max: usize,
    pub ds: Vec<usize>,
    pub placement: PlacementKind,
    pub scheme: SchemeKind,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SweepRow {
    pub problem: Problem,
    pub n: usize,
    pub r: usize,
    pub d: usize,
    pub placement: PlacementKind,
    pub scheme: SchemeKind,
    /// Simulated load.
    pub ncl: Rational64,
    pub lb: Option<Rational64>,
    /// Twice the closed-form coded load.
    pub uncoded: Rational64,
    pub ticks: usize,
    pub complete: bool,
}

impl SweepSpec {
    /// Every valid `(n, r, d)` in canonical order.
    pub fn triples(&self) -> Vec<(usize, usize, usize)> {
        let mut out = Vec::new();
        for &n in &self.ns {
            if n < 3 {
                continue;
            }
            for r in self.r_min.max(1)..=self.r_max.min(n) {
                for &d in &self.ds {
                    if d == 0 || d > n / 2 {
                        continue;
                    }
                    if self.placement == PlacementKind::AppendixC
                        && (self.problem != Problem::AllToAll || d != 1 || r < n.div_ceil(2))
                    {
                        continue;
                    }
                    out.push((n, r, d));
                }
            }
        }
        out.sort();
        out.dedup();
        out
    }
}

fn simulate(spec: &SweepSpec, n: usize, r: usize, d: usize) -> Result<SimOutcome, SchemeError> {
    match (spec.problem, spec.placement, spec.scheme) {
        (Problem::AllGather, _, SchemeKind::Coded) => build_allgather(n, r, d)?.run(),
        (Problem::AllToAll, PlacementKind::Cyclic, SchemeKind::Coded) => build_alltoall(n, r, d)?.run(),
        (Problem::AllToAll, PlacementKind::AppendixC, SchemeKind::Coded) => {
            build_alltoall_appendix_c(n, r)?.run()
        }
        (Problem::AllToAll, PlacementKind::AppendixC, SchemeKind::Uncoded) => {
            let mut plan = build_alltoall_appendix_c(n, r)?;
            plan.schedule = uncode(&plan.schedule);
            plan.run()
        }
        (problem, _, SchemeKind::Uncoded) => build_uncoded(problem, n, r, d)?.run(),
    }
}

fn row(spec: &SweepSpec, n: usize, r: usize, d: usize) -> SweepRow {
    let (ach, lb) = match (spec.problem, spec.placement) {
        (Problem::AllGather, _) => (allgather_ncl_formula(n, r, d), Some(allgather_lower_bound(n, r, d))),
        (Problem::AllToAll, PlacementKind::Cyclic) => (alltoall_exact(n, r, d), best_lower_bound(n, r, d)),
        (Problem::AllToAll, PlacementKind::AppendixC) => {
            (int((n - r).div_ceil(2) as i64), lb_arbitrary_d1(n, r))
        }
    };
    let (ncl, ticks, complete) = match simulate(spec, n, r, d) {
        Ok(out) => (out.report.ncl, out.report.ticks, out.report.complete),
        Err(_) => (int(0), 0, false),
    };
    SweepRow {
        problem: spec.problem,
        n,
        r,
        d,
        placement: spec.placement,
        scheme: spec.scheme,
        ncl,
        lb,
        uncoded: ach * int(2),
        ticks,
        complete,
    }
}

/// Simulates every triple in parallel; rows come back in canonical order.
pub fn run_sweep(spec: &SweepSpec) -> Vec<SweepRow> {
    let triples = spec.triples();
    triples
        .par_iter()
        .map(|&(n, r, d)| row(spec, n, r, d))
        .collect()
}

pub const SWEEP_HEADER: [&str; 13] = [
    "problem",
    "n",
    "r",
    "d",
    "placement",
    "scheme",
    "ncl_exact",
    "ncl_float",
    "lb_exact",
    "lb_float",
    "uncoded_exact",
    "ticks",
    "complete",
];

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(SWEEP_HEADER).expect("write to memory");
    for r in rows {
        w.write_record([
            r.problem.name().to_string(),
            r.n.to_string(),
            r.r.to_string(),
            r.d.to_string(),
            r.placement.name().to_string(),
            r.scheme.name().to_string(),
            render_ratio(r.ncl),
            render_float(r.ncl),
            r.lb.map(render_ratio).unwrap_or_default(),
            r.lb.map(render_float).unwrap_or_default(),
            render_ratio(r.uncoded),
            r.ticks.to_string(),
            r.complete.to_string(),
        ])
        .expect("write to memory");
    }
    String::from_utf8(w.into_inner().expect("flush to memory")).expect("ascii csv")
}
