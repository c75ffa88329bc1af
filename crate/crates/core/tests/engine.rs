use std::collections::BTreeSet;

use ring_cdc::allgather::build_allgather;
use ring_cdc::alltoall::{build_alltoall, build_alltoall_appendix_c};
use ring_cdc::packet::Half;
use ring_cdc::rational::{frac, int};
use ring_cdc::sim::{
    closure_oracle, ledger_csv, ncl_of, run_schedule, Intent, Problem, Requirement, Schedule,
    SimOptions, SimOutcome, Tick, TransmissionRecord,
};
use ring_cdc::{IvLabel, Placement, RingTopology, SimError};

fn held(set: &BTreeSet<IvLabel>, l: IvLabel) -> bool {
    set.contains(&l)
        || set.contains(&l.full())
        || (l.half().is_none()
            && set.contains(&l.with_half(Half::First))
            && set.contains(&l.with_half(Half::Second)))
}

/// Every label a node decoded by tick `t` must follow from what was on air
/// up to `t`, and the closure over the full ledger must be complete.
fn check_against_oracle(topo: &RingTopology, placement: &Placement, req: &Requirement, out: &SimOutcome) {
    let verdict = closure_oracle(topo, placement, &out.ledger, req);
    assert_eq!(verdict.complete, out.report.complete, "{:?}", verdict.deficits);
    let last = out.ledger.last().map_or(0, |r| r.tick);
    for t in 1..=last {
        let prefix: Vec<TransmissionRecord> = out.ledger.iter().filter(|r| r.tick <= t).cloned().collect();
        let v = closure_oracle(topo, placement, &prefix, req);
        for e in out.decodes.iter().filter(|e| e.tick == t) {
            assert!(held(&v.closure[e.node - 1], e.label), "node {} tick {t} {}", e.node, e.label);
        }
    }
    for (k, known) in out.final_known.iter().enumerate() {
        for l in known.iter() {
            assert!(held(&verdict.closure[k], *l), "node {} holds {l}", k + 1);
        }
    }
}

#[test]
fn scheme_runs_agree_with_the_oracle() {
    for (n, r, d) in [(8, 2, 3), (9, 1, 1), (11, 3, 2), (12, 4, 5)] {
        let plan = build_allgather(n, r, d).unwrap();
        let out = plan.run_with(SimOptions::verified()).unwrap();
        assert!(out.report.complete);
        check_against_oracle(&plan.topo, &plan.placement, &plan.requirement(), &out);
    }
    for (n, r, d) in [(8, 3, 1), (9, 2, 1), (12, 1, 2), (13, 3, 2), (14, 2, 5), (11, 4, 4)] {
        let plan = build_alltoall(n, r, d).unwrap();
        let out = plan.run_with(SimOptions::verified()).unwrap();
        assert!(out.report.complete, "({n},{r},{d})");
        check_against_oracle(&plan.topo, &plan.placement, &plan.requirement(), &out);
    }
    for (n, r) in [(8, 4), (10, 5), (9, 6)] {
        let plan = build_alltoall_appendix_c(n, r).unwrap();
        let out = plan.run().unwrap();
        check_against_oracle(&plan.topo, &plan.placement, &plan.requirement(), &out);
    }
}

#[test]
fn dropping_a_broadcast_leaves_a_deficit() {
    let plan = build_allgather(8, 2, 3).unwrap();
    let out = plan.run().unwrap();
    let req = plan.requirement();
    assert!(closure_oracle(&plan.topo, &plan.placement, &out.ledger, &req).complete);
    let without: Vec<TransmissionRecord> = out.ledger.iter().filter(|r| r.sender != 1).cloned().collect();
    let v = closure_oracle(&plan.topo, &plan.placement, &without, &req);
    assert!(!v.complete);
    assert!(v.deficits.values().any(|m| m.contains(&IvLabel::gather(1))));
}

#[test]
fn full_replication_needs_no_traffic() {
    for problem in [Problem::AllGather, Problem::AllToAll] {
        let topo = RingTopology::new(6, 1).unwrap();
        let placement = Placement::cyclic(6, 6).unwrap();
        let req = Requirement::new(problem, 6);
        let out = run_schedule(&topo, &placement, &Schedule::default(), &req, SimOptions::default()).unwrap();
        assert!(out.report.complete);
        assert_eq!(out.report.ncl, int(0));
        assert!(closure_oracle(&topo, &placement, &[], &req).complete);
    }
}

#[test]
fn runs_are_deterministic() {
    let a = build_alltoall(13, 3, 2).unwrap().run_with(SimOptions::verified()).unwrap();
    let b = build_alltoall(13, 3, 2).unwrap().run_with(SimOptions::verified()).unwrap();
    assert_eq!(ledger_csv(&a.ledger), ledger_csv(&b.ledger));
    assert_eq!(a.report.to_json(), b.report.to_json());
    assert_eq!(a.decodes, b.decodes);
}

#[test]
fn load_is_exact() {
    let out = build_allgather(8, 2, 3).unwrap().run().unwrap();
    assert_eq!(out.ledger.len(), 8);
    assert_eq!(ncl_of(&out.ledger, 8), int(1));
    assert_eq!(out.report.ncl * int(8), out.report.total_units);
    let out = build_alltoall(8, 3, 1).unwrap().run().unwrap();
    assert_eq!(ncl_of(&out.ledger, 8), frac(11, 2));
    assert_eq!(ncl_of(&[], 8), int(0));
    for rec in &out.ledger {
        assert!(rec.size_units == int(1) || rec.size_units == frac(1, 2));
    }
}

#[test]
fn sending_an_unknown_label_is_rejected() {
    let topo = RingTopology::new(6, 1).unwrap();
    let placement = Placement::cyclic(6, 1).unwrap();
    let req = Requirement::new(Problem::AllGather, 6);
    let mut t = Tick::at(1, 1);
    t.intents.push(Intent::new(1, [IvLabel::gather(3)]));
    let err = run_schedule(&topo, &placement, &Schedule { ticks: vec![t] }, &req, SimOptions::default()).unwrap_err();
    assert!(matches!(err, SimError::EncodeFromUnknown { sender: 1, .. }));
}

#[test]
fn bystanders_decode_what_they_overhear() {
    let topo = RingTopology::new(7, 2).unwrap();
    let placement = Placement::cyclic(7, 1).unwrap();
    let req = Requirement::new(Problem::AllGather, 7);
    let mut t = Tick::at(1, 1);
    t.intents.push(Intent::new(4, [IvLabel::gather(4)]));
    let out = run_schedule(&topo, &placement, &Schedule { ticks: vec![t] }, &req, SimOptions::default()).unwrap();
    let got: BTreeSet<usize> = out.decodes.iter().map(|e| e.node).collect();
    assert_eq!(got, BTreeSet::from([2, 3, 5, 6]));
    assert!(!out.report.complete);
}
