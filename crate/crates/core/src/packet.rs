//! Labelled intermediate values and their XOR combinations.
//!
//! A [`Packet`] carries both a symbolic label set and a byte payload. The label
//! set decides decodability; the payload is there to check end to end that the
//! symbols really cancel.

use std::collections::HashSet;
use std::fmt;

use num_rational::Rational64;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::PacketError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Half {
    First,
    Second,
}

impl Half {
    pub fn complement(self) -> Half {
        match self {
            Half::First => Half::Second,
            Half::Second => Half::First,
        }
    }
}

/// `V_s` (no destination) or `v_s^t`, optionally restricted to one half.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct IvLabel {
    dest: Option<u32>,
    source: u32,
    half: Option<Half>,
}

impl IvLabel {
    /// `V_source`, needed by every node.
    pub fn gather(source: usize) -> Self {
        Self {
            dest: None,
            source: source as u32,
            half: None,
        }
    }

    /// `v_source^dest`, needed only by node `dest`.
    pub fn unicast(source: usize, dest: usize) -> Self {
        Self {
            dest: Some(dest as u32),
            source: source as u32,
            half: None,
        }
    }

    pub fn with_half(self, half: Half) -> Self {
        Self {
            half: Some(half),
            ..self
        }
    }

    pub fn full(self) -> Self {
        Self { half: None, ..self }
    }

    pub fn source(&self) -> usize {
        self.source as usize
    }

    pub fn dest(&self) -> Option<usize> {
        self.dest.map(|d| d as usize)
    }

    pub fn half(&self) -> Option<Half> {
        self.half
    }

    pub fn is_unicast(&self) -> bool {
        self.dest.is_some()
    }

    /// 1 for a whole IV, 1/2 for a half.
    pub fn size_units(&self) -> Rational64 {
        match self.half {
            None => Rational64::from_integer(1),
            Some(_) => Rational64::new(1, 2),
        }
    }

    /// Parses the canonical text form produced by `Display`.
    pub fn parse(text: &str) -> Option<Self> {
        let (body, half) = match text.split_once(':') {
            Some((b, "h1")) => (b, Some(Half::First)),
            Some((b, "h2")) => (b, Some(Half::Second)),
            Some(_) => return None,
            None => (text, None),
        };
        let label = if let Some(rest) = body.strip_prefix('V') {
            Self::gather(rest.parse().ok()?)
        } else {
            let rest = body.strip_prefix('v')?;
            let (s, t) = rest.split_once('^')?;
            Self::unicast(s.parse().ok()?, t.parse().ok()?)
        };
        if label.source == 0 || label.dest == Some(0) {
            return None;
        }
        Some(match half {
            Some(h) => label.with_half(h),
            None => label,
        })
    }
}

impl fmt::Display for IvLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.dest {
            None => write!(f, "V{}", self.source)?,
            Some(t) => write!(f, "v{}^{}", self.source, t)?,
        }
        match self.half {
            None => Ok(()),
            Some(Half::First) => f.write_str(":h1"),
            Some(Half::Second) => f.write_str(":h2"),
        }
    }
}

/// Payload size and generator seed for synthetic IVs.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PacketConfig {
    pub payload_bytes: usize,
    pub seed: u64,
}

impl Default for PacketConfig {
    fn default() -> Self {
        Self {
            payload_bytes: 64,
            seed: 0,
        }
    }
}

impl PacketConfig {
    /// The bytes of `label`. Halves are the leading `ceil(B/2)` and trailing
    /// `floor(B/2)` bytes of the full IV.
    pub fn payload(&self, label: IvLabel) -> Vec<u8> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(stream_id(label.full()));
        let mut bytes = vec![0u8; self.payload_bytes];
        rng.fill_bytes(&mut bytes);
        let split = self.payload_bytes.div_ceil(2);
        match label.half {
            None => bytes,
            Some(Half::First) => bytes[..split].to_vec(),
            Some(Half::Second) => bytes[split..].to_vec(),
        }
    }

    pub fn payload_len(&self, label: IvLabel) -> usize {
        match label.half {
            None => self.payload_bytes,
            Some(Half::First) => self.payload_bytes.div_ceil(2),
            Some(Half::Second) => self.payload_bytes / 2,
        }
    }
}

fn stream_id(label: IvLabel) -> u64 {
    let kind = u64::from(label.dest.is_some());
    (kind << 63) | (u64::from(label.source) << 32) | u64::from(label.dest.unwrap_or(0))
}

/// A GF(2) combination of IVs.
#[derive(Clone, Debug)]
pub struct Packet {
    labels: Vec<IvLabel>,
    payload: Vec<u8>,
}

impl Packet {
    pub fn empty() -> Self {
        Self {
            labels: Vec::new(),
            payload: Vec::new(),
        }
    }

    /// The singleton packet holding `label`.
    pub fn make_iv(label: IvLabel, cfg: &PacketConfig) -> Self {
        Self {
            labels: vec![label],
            payload: cfg.payload(label),
        }
    }

    /// Labels in the order they were first combined.
    pub fn labels(&self) -> &[IvLabel] {
        &self.labels
    }

    pub fn payload(&self) -> &[u8] {
        &self.payload
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Largest constituent size; 0 for the empty packet.
    pub fn size_units(&self) -> Rational64 {
        self.labels
            .iter()
            .map(IvLabel::size_units)
            .max()
            .unwrap_or_else(|| Rational64::from_integer(0))
    }

    pub fn xor(&self, other: &Packet) -> Result<Packet, PacketError> {
        let mine = self.labels.first().map(IvLabel::is_unicast);
        let theirs = other.labels.first().map(IvLabel::is_unicast);
        if let (Some(a), Some(b)) = (mine, theirs) {
            if a != b {
                return Err(PacketError::FlavorMismatch);
            }
        }
        let mut labels = self.labels.clone();
        for l in &other.labels {
            match labels.iter().position(|x| x == l) {
                Some(pos) => {
                    labels.remove(pos);
                }
                None => labels.push(*l),
            }
        }
        let mut payload = self.payload.clone();
        xor_into(&mut payload, &other.payload);
        if labels.is_empty() {
            payload.clear();
        }
        Ok(Packet { labels, payload })
    }

    /// The one label of `self` missing from `known`.
    pub fn peel(&self, known: &KnownSet) -> Result<IvLabel, PacketError> {
        let unknown: Vec<IvLabel> = self
            .labels
            .iter()
            .copied()
            .filter(|l| !known.contains(*l))
            .collect();
        match unknown.as_slice() {
            [one] => Ok(*one),
            _ => Err(PacketError::NotDecodable {
                unknown_count: unknown.len(),
            }),
        }
    }

    /// XORs the payloads of every other constituent out of this packet and
    /// returns what is left, cut to the length of `target`.
    pub fn recover(&self, target: IvLabel, cfg: &PacketConfig) -> Vec<u8> {
        let mut bytes = self.payload.clone();
        for l in self.labels.iter().filter(|l| **l != target) {
            xor_into(&mut bytes, &cfg.payload(*l));
        }
        bytes.resize(cfg.payload_len(target), 0);
        bytes
    }

    /// True when the payload is the XOR of the generator output for every label.
    pub fn is_consistent(&self, cfg: &PacketConfig) -> bool {
        let mut expect = Vec::new();
        for l in &self.labels {
            xor_into(&mut expect, &cfg.payload(*l));
        }
        trim_zeros(&expect) == trim_zeros(&self.payload)
    }
}

impl PartialEq for Packet {
    fn eq(&self, other: &Self) -> bool {
        let mut a = self.labels.clone();
        let mut b = other.labels.clone();
        a.sort();
        b.sort();
        a == b && trim_zeros(&self.payload) == trim_zeros(&other.payload)
    }
}

impl Eq for Packet {}

impl fmt::Display for Packet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.labels.is_empty() {
            return f.write_str("0");
        }
        for (k, l) in self.labels.iter().enumerate() {
            if k > 0 {
                f.write_str(" + ")?;
            }
            write!(f, "{l}")?;
        }
        Ok(())
    }
}

/// Byte-wise XOR of `src` into `dst`, zero-extending `dst` as needed.
pub fn xor_into(dst: &mut Vec<u8>, src: &[u8]) {
    if dst.len() < src.len() {
        dst.resize(src.len(), 0);
    }
    for (d, s) in dst.iter_mut().zip(src) {
        *d ^= s;
    }
}

fn trim_zeros(bytes: &[u8]) -> &[u8] {
    let end = bytes.iter().rposition(|&b| b != 0).map_or(0, |p| p + 1);
    &bytes[..end]
}

/// A node's knowledge, aware that a full IV and its two halves determine each other.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct KnownSet {
    inner: HashSet<IvLabel>,
}

impl KnownSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn contains(&self, label: IvLabel) -> bool {
        if self.inner.contains(&label) {
            return true;
        }
        match label.half {
            Some(_) => self.inner.contains(&label.full()),
            None => {
                self.inner.contains(&label.with_half(Half::First))
                    && self.inner.contains(&label.with_half(Half::Second))
            }
        }
    }

    /// Adds `label`; returns whether it was new. A half whose complement is
    /// already known also completes the full label.
    pub fn insert(&mut self, label: IvLabel) -> bool {
        let fresh = !self.contains(label);
        self.inner.insert(label);
        if let Some(h) = label.half {
            if self.contains(label.with_half(h.complement())) {
                self.inner.insert(label.full());
            }
        }
        fresh
    }

    /// Forgets `label` and, for a full label, both of its halves.
    pub fn remove(&mut self, label: IvLabel) {
        self.inner.remove(&label);
        if label.half.is_none() {
            self.inner.remove(&label.with_half(Half::First));
            self.inner.remove(&label.with_half(Half::Second));
        }
    }

    /// Stored labels, in no particular order.
    pub fn iter(&self) -> impl Iterator<Item = &IvLabel> {
        self.inner.iter()
    }

    pub fn len(&self) -> usize {
        self.inner.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inner.is_empty()
    }
}

impl FromIterator<IvLabel> for KnownSet {
    fn from_iter<T: IntoIterator<Item = IvLabel>>(iter: T) -> Self {
        let mut k = KnownSet::new();
        for l in iter {
            k.insert(l);
        }
        k
    }
}
