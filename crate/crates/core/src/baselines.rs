//! Reference schemes: network-coded broadcasting for `r = d = 1` and plain
//! forwarding of the coded schedules.

use std::collections::BTreeSet;

use num_rational::Rational64;

use crate::allgather::build_allgather;
use crate::alltoall::build_alltoall;
use crate::error::SchemeError;
use crate::packet::IvLabel;
use crate::rational::int;
use crate::ring::{normalize, Placement, RingTopology};
use crate::sim::{
    run_schedule, Intent, Problem, Requirement, Schedule, SimOptions, SimOutcome, Tick,
};

/// A schedule together with the network it runs on.
#[derive(Clone, Debug)]
pub struct BaselinePlan {
    pub topo: RingTopology,
    pub placement: Placement,
    pub problem: Problem,
    pub schedule: Schedule,
}

impl BaselinePlan {
    pub fn run(&self) -> Result<SimOutcome, SchemeError> {
        self.run_with(SimOptions::default())
    }

    pub fn run_with(&self, opts: SimOptions) -> Result<SimOutcome, SchemeError> {
        Ok(run_schedule(
            &self.topo,
            &self.placement,
            &self.schedule,
            &Requirement::new(self.problem, self.topo.n()),
            opts,
        )?)
    }
}

/// Two-phase rounds on a ring with `r = d = 1`.
///
/// Even `n`: odd nodes originate first; in phase `p` the nodes of the active
/// parity send `V_{x-(p-1)} + V_{x+(p-1)}`, restricted to the current
/// originators, until every node has them; then the even nodes originate.
/// Odd `n`: both originator classes run interleaved, odd nodes sending in
/// phase 1 and even nodes in phase 2 of each round, for `(n-1)/2` rounds.
pub fn build_fragouli(n: usize) -> Result<BaselinePlan, SchemeError> {
    if n < 4 {
        return Err(SchemeError::Precondition {
            scheme: "network-coded broadcasting",
            requirement: "n >= 4",
            n,
            r: 1,
            d: 1,
        });
    }
    let topo = RingTopology::new(n, 1)?;
    let placement = Placement::cyclic(n, 1)?;
    let pair = |x: usize, p: usize| -> Vec<usize> {
        let a = normalize(x as i64 - (p as i64 - 1), n);
        let b = normalize((x + p - 1) as i64, n);
        if a == b {
            vec![a]
        } else {
            vec![a, b]
        }
    };
    let per_pass_cap = n.div_ceil(4) + 1;
    let mut ticks = Vec::new();

    if n % 2 == 1 {
        for round in 1..=(n - 1) / 2 {
            for phase in 1..=2 {
                let mut t = Tick::at(round, phase);
                for x in (1..=n).filter(|x| (x % 2 == 1) == (phase == 1)) {
                    t.intents
                        .push(Intent::new(x, pair(x, round).into_iter().map(IvLabel::gather)));
                }
                ticks.push(t);
            }
        }
        if (n - 1) / 2 > 2 * per_pass_cap {
            return Err(SchemeError::RoundCapExceeded {
                n,
                cap: 2 * per_pass_cap,
            });
        }
        return Ok(BaselinePlan {
            topo,
            placement,
            problem: Problem::AllGather,
            schedule: Schedule { ticks },
        });
    }

    let requirement = Requirement::new(Problem::AllGather, n);
    let mut round_base = 0;
    for parity in [1, 0] {
        let origins: BTreeSet<usize> = (1..=n).filter(|x| x % 2 == parity).collect();
        let mut phase: usize = 0;
        loop {
            let sched = Schedule {
                ticks: ticks.clone(),
            };
            let out = run_schedule(&topo, &placement, &sched, &requirement, SimOptions::default())?;
            if out
                .final_known
                .iter()
                .all(|k| origins.iter().all(|&o| k.contains(IvLabel::gather(o))))
            {
                break;
            }
            phase += 1;
            let round = phase.div_ceil(2);
            if round > per_pass_cap {
                return Err(SchemeError::RoundCapExceeded {
                    n,
                    cap: per_pass_cap,
                });
            }
            let mut t = Tick::at(round_base + round, 2 - phase % 2);
            for x in (1..=n).filter(|x| (x % 2 == parity) == (phase % 2 == 1)) {
                let labels: Vec<IvLabel> = pair(x, phase)
                    .into_iter()
                    .filter(|o| origins.contains(o))
                    .map(IvLabel::gather)
                    .collect();
                if !labels.is_empty() {
                    t.intents.push(Intent::new(x, labels));
                }
            }
            ticks.push(t);
        }
        round_base += phase.div_ceil(2);
    }
    Ok(BaselinePlan {
        topo,
        placement,
        problem: Problem::AllGather,
        schedule: Schedule { ticks },
    })
}

/// Replaces every coded packet by its constituents sent one by one in the
/// same tick.
pub fn uncode(schedule: &Schedule) -> Schedule {
    Schedule {
        ticks: schedule
            .ticks
            .iter()
            .map(|t| Tick {
                intents: t
                    .intents
                    .iter()
                    .flat_map(|i| i.labels.iter().map(|&l| Intent::new(i.sender, [l])))
                    .collect(),
                ..t.clone()
            })
            .collect(),
    }
}

/// The cyclic-placement coded scheme with every XOR split into plain sends.
pub fn build_uncoded(problem: Problem, n: usize, r: usize, d: usize) -> Result<BaselinePlan, SchemeError> {
    let (topo, placement, schedule) = match problem {
        Problem::AllGather => {
            let p = build_allgather(n, r, d)?;
            (p.topo, p.placement, p.schedule)
        }
        Problem::AllToAll => {
            let p = build_alltoall(n, r, d)?;
            (p.topo, p.placement, p.schedule)
        }
    };
    Ok(BaselinePlan {
        topo,
        placement,
        problem,
        schedule: uncode(&schedule),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CodingGain {
    Ratio(Rational64),
    /// The coded scheme sends nothing, which happens only at full replication.
    FullReplication,
}

/// Uncoded load over coded load for the cyclic schemes.
pub fn coding_gain(problem: Problem, n: usize, r: usize, d: usize) -> Result<CodingGain, SchemeError> {
    let coded = match problem {
        Problem::AllGather => build_allgather(n, r, d)?.schedule.total_units(),
        Problem::AllToAll => build_alltoall(n, r, d)?.schedule.total_units(),
    };
    let uncoded = build_uncoded(problem, n, r, d)?.schedule.total_units();
    Ok(if coded == int(0) {
        CodingGain::FullReplication
    } else {
        CodingGain::Ratio(uncoded / coded)
    })
}
