use thiserror::Error;

use crate::packet::IvLabel;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RingError {
    #[error("need n >= 3 and 1 <= d <= n/2, got n={n}, d={d}")]
    InvalidTopology { n: usize, d: usize },
    #[error("load r={r} is outside 1..={n}")]
    LoadOutOfRange { n: usize, r: usize },
    #[error("load r={r} is outside ceil(n/2)..=n for n={n}")]
    LoadBelowHalf { n: usize, r: usize },
    #[error("malformed placement: {0}")]
    MalformedPlacement(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PacketError {
    #[error("cannot mix all-gather and all-to-all labels in one packet")]
    FlavorMismatch,
    #[error("packet has {unknown_count} unknown labels")]
    NotDecodable { unknown_count: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SimError {
    #[error("tick {tick}: node {sender} encodes {label} without knowing it")]
    EncodeFromUnknown {
        tick: usize,
        sender: usize,
        label: IvLabel,
    },
    #[error("tick {tick}: node {node} deleted {label} but still needs it")]
    DeletedLabelNeeded {
        tick: usize,
        node: usize,
        label: IvLabel,
    },
    #[error("tick {tick}: bad intent from node {sender}: {reason}")]
    MalformedIntent {
        tick: usize,
        sender: usize,
        reason: String,
    },
    #[error("tick {tick}: node {node} recovered a wrong payload for {label}")]
    PayloadMismatch {
        tick: usize,
        node: usize,
        label: IvLabel,
    },
    #[error("placement has {placement} nodes but the ring has {ring}")]
    SizeMismatch { placement: usize, ring: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SchemeError {
    #[error(transparent)]
    Ring(#[from] RingError),
    #[error("{scheme} needs {requirement}, got n={n}, r={r}, d={d}")]
    Precondition {
        scheme: &'static str,
        requirement: &'static str,
        n: usize,
        r: usize,
        d: usize,
    },
    #[error("placement is not cyclic")]
    NotCyclic,
    #[error("successive decoding stalled at node {node} with {remaining} packets left")]
    ChainBroken { node: usize, remaining: usize },
    #[error("broadcast did not finish within {cap} rounds on {n} nodes")]
    RoundCapExceeded { n: usize, cap: usize },
    #[error(transparent)]
    Sim(#[from] SimError),
}
