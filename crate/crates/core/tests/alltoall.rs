use std::collections::{BTreeMap, BTreeSet};

use ring_cdc::alltoall::{
    alltoall_formulas, build_alltoall, build_alltoall_appendix_c, build_alltoall_d1,
    build_alltoall_mid, build_alltoall_wide, distance_classes, lb_arbitrary_d1, lb_cyclic,
    AllToAllPlan, Regime,
};
use ring_cdc::rational::{frac, int, Ratio};
use ring_cdc::sim::{closure_oracle, SimOptions, SimOutcome};
use ring_cdc::{IvLabel, Placement, RingTopology, SchemeError};

fn wrap(a: i64, n: usize) -> usize {
    (a - 1).rem_euclid(n as i64) as usize + 1
}

fn v(s: usize, t: usize) -> IvLabel {
    IvLabel::unicast(s, t)
}

fn certified(plan: &AllToAllPlan) -> SimOutcome {
    let out = plan.run().unwrap();
    assert!(out.report.complete, "{:?}", out.report.failure);
    let verdict = closure_oracle(&plan.topo, &plan.placement, &out.ledger, &plan.requirement());
    assert!(verdict.complete, "{:?}", verdict.deficits);
    out
}

/// Units sent per round, divided by `n`.
fn per_round(out: &SimOutcome, n: usize) -> Vec<Ratio> {
    let mut by: BTreeMap<usize, Ratio> = BTreeMap::new();
    for rec in &out.ledger {
        *by.entry(rec.round.unwrap()).or_insert(int(0)) += rec.size_units;
    }
    by.into_values().map(|u| u / int(n as i64)).collect()
}

fn triangle_sum(n: usize, r: usize) -> Ratio {
    let rounds = (n - r).div_ceil(2) as i64;
    let half = if (n - r) % 2 == 1 { frac(1, 2) } else { int(0) };
    int(rounds * (rounds + 1) / 2) - half
}

#[test]
fn classes_cover_every_missing_iv() {
    for (n, r) in [(9, 2), (8, 3), (10, 3), (11, 5)] {
        let topo = RingTopology::new(n, 1).unwrap();
        let p = Placement::cyclic(n, r).unwrap();
        let w = distance_classes(&topo, &p).unwrap();
        let top = (n - r).div_ceil(2);
        let mut count: BTreeMap<IvLabel, usize> = BTreeMap::new();
        for (&(j, l), set) in &w {
            assert!((1..=top).contains(&l));
            if l < top || (n - r) % 2 == 0 {
                let expect = BTreeSet::from([v(j, wrap((j + l) as i64, n)), v(wrap((j + r - 1) as i64, n), wrap(j as i64 - l as i64, n))]);
                assert_eq!(set, &expect, "n={n} r={r} j={j} l={l}");
            }
            for &lab in set {
                *count.entry(lab).or_default() += 1;
            }
        }
        for f in 1..=n {
            for t in 1..=n {
                let c = count.get(&v(f, t)).copied().unwrap_or(0);
                if p.caches(t, f) {
                    assert_eq!(c, 0);
                } else {
                    assert!(c >= 1, "n={n} r={r} v{f}^{t}");
                }
            }
        }
        let dup: BTreeSet<usize> = w
            .iter()
            .filter(|(_, set)| set.iter().any(|lab| count[lab] > 1))
            .map(|(&(_, l), _)| l)
            .collect();
        assert!(dup.iter().all(|&l| l == top), "n={n} r={r} {dup:?}");
        assert_eq!(!dup.is_empty(), (n - r) % 2 == 1);
    }
    let full = distance_classes(&RingTopology::new(6, 1).unwrap(), &Placement::cyclic(6, 6).unwrap()).unwrap();
    assert!(full.is_empty());
}

#[test]
fn every_pair_has_exactly_one_builder() {
    for n in 3..=20 {
        for r in 1..=n {
            for d in 1..=n / 2 {
                let regime = Regime::classify(r, d);
                let via = [
                    build_alltoall_d1(n, r).is_ok() && d == 1 && regime == Regime::DEq1,
                    build_alltoall_mid(n, r, d).is_ok() && regime == Regime::Mid,
                    build_alltoall_wide(n, r, d).is_ok() && regime == Regime::Wide,
                ];
                assert_eq!(via.iter().filter(|&&b| b).count(), 1, "n={n} r={r} d={d}");
                assert_eq!(build_alltoall(n, r, d).unwrap().regime, regime);
            }
        }
    }
}

#[test]
fn wrong_regime_is_rejected() {
    assert!(matches!(build_alltoall_d1(8, 1), Err(SchemeError::Precondition { .. })));
    assert!(matches!(build_alltoall_mid(12, 2, 3), Err(SchemeError::Precondition { .. })));
    assert!(matches!(build_alltoall_wide(12, 3, 2), Err(SchemeError::Precondition { .. })));
    assert!(build_alltoall_appendix_c(10, 4).is_err());
}

#[test]
fn unit_distance_loads_are_triangle_sums() {
    for n in 5..=14 {
        for r in 2..n {
            let plan = build_alltoall_d1(n, r).unwrap();
            let out = certified(&plan);
            assert_eq!(out.report.ncl, triangle_sum(n, r), "n={n} r={r}");
            let rounds = (n - r).div_ceil(2);
            let mut expect: Vec<Ratio> = (1..=rounds).map(|j| int(j as i64)).collect();
            if (n - r) % 2 == 1 {
                *expect.last_mut().unwrap() -= frac(1, 2);
            }
            assert_eq!(per_round(&out, n), expect);
            if rounds >= 3 {
                assert!(!out.deleted.is_empty());
            }
        }
    }
}

#[test]
fn unit_distance_payloads_survive_cache_deletion() {
    for (n, r) in [(8, 3), (11, 2), (13, 4)] {
        let out = build_alltoall_d1(n, r).unwrap().run_with(SimOptions::verified()).unwrap();
        assert!(out.report.complete);
    }
}

#[test]
fn relays_pair_what_they_heard() {
    let plan = build_alltoall_d1(8, 3).unwrap();
    let out = plan.run().unwrap();
    let sent = |round, step, node| -> BTreeSet<IvLabel> {
        out.ledger
            .iter()
            .find(|t| t.round == Some(round) && t.step == Some(step) && t.sender == node)
            .map(|t| t.labels.iter().map(|l| l.full()).collect())
            .unwrap()
    };
    assert_eq!(sent(3, 1, 1), BTreeSet::from([v(1, 4), v(3, 6)]));
    assert_eq!(sent(1, 1, 1), BTreeSet::from([v(1, 2), v(3, 8)]));
    for j in 2..=3 {
        for k in 2..=j {
            for i in 1..=8 {
                let s = (k - 1) as i64;
                let expect = BTreeSet::from([
                    v(wrap(i as i64 - s, 8), wrap(i as i64 - s + j as i64, 8)),
                    v(wrap(i as i64 + 2 + s, 8), wrap(i as i64 + s - j as i64, 8)),
                ]);
                assert_eq!(sent(j, k, i), expect, "round {j} step {k} node {i}");
            }
        }
    }
}

#[test]
fn small_even_gap_has_no_half_round() {
    let plan = build_alltoall_d1(6, 2).unwrap();
    let out = certified(&plan);
    assert_eq!(out.report.ncl, int(3));
    assert!(out.ledger.iter().all(|t| t.size_units == int(1)));
}

#[test]
fn mid_range_example() {
    let plan = build_alltoall(20, 4, 3).unwrap();
    assert_eq!(plan.regime, Regime::Mid);
    let out = certified(&plan);
    let expect: Vec<Ratio> = [1, 1, 1, 2, 2, 2, 3, 3].into_iter().map(int).collect();
    assert_eq!(per_round(&out, 20), expect);
    assert_eq!(out.report.ncl, int(15));
    for rec in out.ledger.iter().filter(|t| t.round.unwrap() <= 3) {
        assert_eq!(rec.step, Some(1));
    }
    let d1 = 3;
    for rec in out.ledger.iter().filter(|t| t.round.unwrap() > 3 && t.step == Some(2)) {
        let (i, j) = (rec.sender as i64, rec.round.unwrap() as i64);
        let from_left = v(wrap(i - d1, 20), wrap(i - d1 + j, 20));
        let from_right = v(wrap(i + d1 + 3, 20), wrap(i + d1 - j, 20));
        let got: BTreeSet<IvLabel> = rec.labels.iter().map(|l| l.full()).collect();
        assert_eq!(got, BTreeSet::from([from_left, from_right]), "node {i} round {j}");
    }
}

#[test]
fn wide_range_example() {
    let plan = build_alltoall(12, 1, 2).unwrap();
    assert_eq!(plan.regime, Regime::Wide);
    let out = certified(&plan);
    let mut expect: Vec<Ratio> = (1..=6).map(|j: i64| int((j + 1) / 2 + 1)).collect();
    *expect.last_mut().unwrap() -= frac(1, 2);
    assert_eq!(per_round(&out, 12), expect);
    assert_eq!(out.report.ncl, frac(35, 2));
    for rec in out.ledger.iter().filter(|t| t.step.unwrap() <= 1) {
        assert_eq!(rec.labels.len(), 1);
    }
}

#[test]
fn every_cyclic_plan_decodes() {
    for n in 5..=14 {
        for r in 1..n {
            for d in 1..=n / 2 {
                let plan = build_alltoall(n, r, d).unwrap();
                let out = certified(&plan);
                assert_eq!(out.report.ncl, alltoall_formulas(n, r, d).ach_exact, "n={n} r={r} d={d}");
                if let Some(lb) = lb_cyclic(n, r, d) {
                    assert!(out.report.ncl >= lb);
                }
            }
        }
    }
}

#[test]
fn large_load_scheme() {
    let plan = build_alltoall_appendix_c(10, 5).unwrap();
    let out = certified(&plan);
    assert_eq!(out.report.ncl, int(3));

    let plan = build_alltoall_appendix_c(8, 4).unwrap();
    let out = certified(&plan);
    assert_eq!(out.report.ncl, int(2));
    let sent: Vec<BTreeSet<IvLabel>> = out
        .ledger
        .iter()
        .filter(|t| t.sender == 4)
        .map(|t| t.labels.iter().copied().collect())
        .collect();
    assert_eq!(sent, vec![BTreeSet::from([v(4, 5), v(5, 3)]), BTreeSet::from([v(8, 5), v(1, 3)])]);
    let got: BTreeSet<IvLabel> = out.decodes.iter().filter(|e| e.node == 4).map(|e| e.label).filter(|l| l.dest() == Some(4)).collect();
    assert_eq!(got, BTreeSet::from([v(3, 4), v(7, 4), v(6, 4), v(2, 4)]));

    let plan = build_alltoall_appendix_c(9, 9).unwrap();
    assert!(plan.schedule.ticks.iter().all(|t| t.intents.is_empty()));
    assert_eq!(certified(&plan).report.ncl, int(0));

    for n in 6usize..=14 {
        for r in n.div_ceil(2)..=n {
            let out = certified(&build_alltoall_appendix_c(n, r).unwrap());
            let lb = lb_arbitrary_d1(n, r).unwrap();
            assert_eq!(out.report.ncl, int((n - r).div_ceil(2) as i64));
            assert!(lb <= out.report.ncl && out.report.ncl < lb + int(1));
        }
    }
}

#[test]
fn closed_forms() {
    let f = alltoall_formulas(8, 3, 1);
    assert_eq!(f.ach_exact, frac(11, 2));
    assert_eq!(f.lb_cyclic, Some(int(4)));
    assert_eq!(f.uncoded, int(11));
    assert_eq!(f.appendix_c, None);
    assert_eq!(lb_arbitrary_d1(8, 4), Some(int(2)));
    assert_eq!(alltoall_formulas(8, 4, 1).appendix_c, Some(int(2)));
    assert_eq!(lb_cyclic(8, 4, 1), None);
    assert_eq!(alltoall_formulas(20, 4, 3).ach_exact, int(15));
    assert_eq!(alltoall_formulas(12, 1, 2).ach_exact, frac(35, 2));
    assert_eq!(alltoall_formulas(7, 7, 3).ach_exact, int(0));
}
