//! Compiles and runs every code sample of the guide under `book/src`.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/ring.md")]
pub mod ring {}

#[doc = include_str!("../../../book/src/packets.md")]
pub mod packets {}

#[doc = include_str!("../../../book/src/simulator.md")]
pub mod simulator {}

#[doc = include_str!("../../../book/src/allgather.md")]
pub mod allgather {}

#[doc = include_str!("../../../book/src/alltoall.md")]
pub mod alltoall {}

#[doc = include_str!("../../../book/src/baselines.md")]
pub mod baselines {}

#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
