//! Coded data exchange on ring networks with bounded broadcast distance.
//!
//! Every node of an `n`-node ring maps a subset of the input files and must
//! then collect intermediate values (IVs) held elsewhere. A broadcast reaches
//! the `2d` nodes within `d` hops, and nodes may send XOR combinations of IVs.
//! This crate builds transmission schedules for the two exchange problems,
//! runs them through a tick-synchronous simulator, and evaluates the
//! closed-form loads and bounds they are measured against.
//!
//! ```
//! use ring_cdc::allgather::build_allgather;
//! use num_rational::Rational64;
//!
//! let plan = build_allgather(8, 2, 3).unwrap();
//! let outcome = plan.run().unwrap();
//! assert!(outcome.report.complete);
//! assert_eq!(outcome.report.ncl, Rational64::from_integer(1));
//! ```
//!
//! * [`ring`]: topology arithmetic and file placements.
//! * [`packet`]: IV labels, XOR packets and peeling.
//! * [`sim`]: the simulator, ledgers, reports and the closure oracle.
//! * [`allgather`] and [`alltoall`]: schedule builders and load formulas.
//! * [`baselines`]: network-coded broadcasting for `r = d = 1` and uncoded forwarding.
//! * [`sweep`]: parameter sweeps emitting CSV.
//! * [`goldens`]: the worked examples rendered as text tables.

pub mod allgather;
pub mod alltoall;
pub mod baselines;
pub mod error;
pub mod goldens;
pub mod packet;
pub mod rational;
pub mod ring;
pub mod sim;
pub mod sweep;

pub use error::{PacketError, RingError, SchemeError, SimError};
pub use packet::{Half, IvLabel, KnownSet, Packet, PacketConfig};
pub use ring::{Placement, RingTopology};
pub use sim::{NclReport, Problem, Requirement, Schedule, SimOutcome};
