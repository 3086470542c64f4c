//! Reproducible Bernoulli edge sampling.
//!
//! Every random draw is a pure function of a [`SampleKey`] and a 64-bit
//! counter, so any edge of any trial can be regenerated in isolation and
//! trials can run on any number of workers with identical results.
//!
//! # Generator
//!
//! `mix64` is the SplitMix64 finalizer:
//!
//! ```text
//! z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9
//! z = (z ^ (z >> 27)) * 0x94d049bb133111eb
//! z =  z ^ (z >> 31)
//! ```
//!
//! A key is first folded into a 64-bit stream constant:
//!
//! ```text
//! h      = mix64(seed ^ 0x9e3779b97f4a7c15)
//! tag    = (trial << 8) | round
//! stream = mix64((h + tag * 0xd1b54a32d192ed03) ^ 0xa0761d6478bd642f)
//! ```
//!
//! and the 64 output bits for `counter` are
//!
//! ```text
//! bits = mix64(mix64(stream + counter * 0x9e3779b97f4a7c15) ^ rotl(stream, 32))
//! ```
//!
//! with all arithmetic wrapping modulo 2^64. The uniform variate is the top
//! 53 bits scaled by 2^-53, which lies in `[0, 1)` exactly. Edge `e` of a
//! sample is open iff `uniform01(key, e) < p`.

use std::io::{Read, Write};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::hypercube::CubeGraph;

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;
const TAG_MUL: u64 = 0xd1b5_4a32_d192_ed03;
const STREAM_XOR: u64 = 0xa076_1d64_78bd_642f;

#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Identifies one independent random stream. Round 0 is a single-round
/// sample; rounds 1 and 2 are the two sprinkling rounds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SampleKey {
    pub seed: u64,
    pub trial: u32,
    pub round: u8,
}

impl SampleKey {
    pub fn new(seed: u64, trial: u32, round: u8) -> Self {
        SampleKey { seed, trial, round }
    }

    pub fn with_round(self, round: u8) -> Self {
        SampleKey { round, ..self }
    }

    #[inline]
    fn stream(&self) -> u64 {
        let h = mix64(self.seed ^ GOLDEN);
        let tag = (u64::from(self.trial) << 8) | u64::from(self.round);
        mix64(h.wrapping_add(tag.wrapping_mul(TAG_MUL)) ^ STREAM_XOR)
    }

    /// A generator with the stream constant precomputed.
    pub fn generator(&self) -> KeyedUniform {
        KeyedUniform {
            stream: self.stream(),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct KeyedUniform {
    stream: u64,
}

impl KeyedUniform {
    #[inline]
    pub fn bits(&self, counter: u64) -> u64 {
        let x = mix64(self.stream.wrapping_add(counter.wrapping_mul(GOLDEN)));
        mix64(x ^ self.stream.rotate_left(32))
    }

    #[inline]
    pub fn uniform01(&self, counter: u64) -> f64 {
        (self.bits(counter) >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}

pub fn uniform01(key: SampleKey, counter: u64) -> f64 {
    key.generator().uniform01(counter)
}

fn check_probability(p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::input(format!("probability {p} outside [0, 1]")))
    }
}

/// Packed membership bitmap over the edge indices of one cube.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OpenEdges {
    d: u32,
    words: Vec<u64>,
}

impl OpenEdges {
    pub fn empty(g: &CubeGraph) -> Self {
        OpenEdges {
            d: g.dimension(),
            words: vec![0; word_count(g.edge_count())],
        }
    }

    pub fn full(g: &CubeGraph) -> Self {
        let mut open = Self::empty(g);
        for e in 0..g.edge_count() {
            open.insert(e);
        }
        open
    }

    pub fn from_indices(g: &CubeGraph, indices: impl IntoIterator<Item = u64>) -> Result<Self> {
        let mut open = Self::empty(g);
        for e in indices {
            if e >= g.edge_count() {
                return Err(Error::input(format!("edge index {e} out of range")));
            }
            open.insert(e);
        }
        Ok(open)
    }

    pub fn dimension(&self) -> u32 {
        self.d
    }

    pub fn edge_count(&self) -> u64 {
        u64::from(self.d) << (self.d - 1)
    }

    #[inline]
    pub fn contains(&self, e: u64) -> bool {
        self.words[(e >> 6) as usize] >> (e & 63) & 1 == 1
    }

    pub fn insert(&mut self, e: u64) {
        self.words[(e >> 6) as usize] |= 1 << (e & 63);
    }

    pub fn count(&self) -> u64 {
        self.words.iter().map(|w| u64::from(w.count_ones())).sum()
    }

    /// Open edge indices in increasing order.
    pub fn iter(&self) -> impl Iterator<Item = u64> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut rest = w;
            std::iter::from_fn(move || {
                if rest == 0 {
                    return None;
                }
                let bit = rest.trailing_zeros();
                rest &= rest - 1;
                Some(((wi as u64) << 6) | u64::from(bit))
            })
        })
    }

    pub fn union(&self, other: &OpenEdges) -> Result<OpenEdges> {
        if self.d != other.d {
            return Err(Error::input(format!(
                "cannot union samples of dimensions {} and {}",
                self.d, other.d
            )));
        }
        Ok(OpenEdges {
            d: self.d,
            words: self
                .words
                .iter()
                .zip(&other.words)
                .map(|(a, b)| a | b)
                .collect(),
        })
    }
}

fn word_count(m: u64) -> usize {
    m.div_ceil(64) as usize
}

/// One percolation draw: the open edges together with the key and
/// probability that produced them.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeSample {
    pub key: SampleKey,
    pub p: f64,
    pub open: OpenEdges,
}

/// Opens edge `e` iff `uniform01(key, e) < p`, testing every edge.
pub fn sample_edges(g: &CubeGraph, key: SampleKey, p: f64) -> Result<EdgeSample> {
    check_probability(p)?;
    let m = g.edge_count();
    let gen = key.generator();
    let mut words = vec![0u64; word_count(m)];
    words.par_iter_mut().enumerate().for_each(|(wi, word)| {
        let start = (wi as u64) << 6;
        let end = (start + 64).min(m);
        let mut w = 0u64;
        for e in start..end {
            if gen.uniform01(e) < p {
                w |= 1 << (e - start);
            }
        }
        *word = w;
    });
    Ok(EdgeSample {
        key,
        p,
        open: OpenEdges {
            d: g.dimension(),
            words,
        },
    })
}

pub fn union_samples(a: &EdgeSample, b: &EdgeSample) -> Result<OpenEdges> {
    a.open.union(&b.open)
}

/// Two-round exposure with `(1 - p1)(1 - p2) = 1 - p`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SprinklingSplit {
    pub p: f64,
    pub p1: f64,
    pub p2: f64,
}

pub fn split_probability(p: f64, p2: f64) -> Result<SprinklingSplit> {
    check_probability(p)?;
    check_probability(p2)?;
    if p2 >= 1.0 {
        return Err(Error::input("second-round probability must be below 1"));
    }
    if p2 > p {
        return Err(Error::input(format!(
            "second-round probability {p2} exceeds total probability {p}"
        )));
    }
    let p1 = if p2 == 0.0 {
        p
    } else {
        (1.0 - (1.0 - p) / (1.0 - p2)).clamp(0.0, p)
    };
    Ok(SprinklingSplit { p, p1, p2 })
}

/// Default second-round probability `d^(-exponent)`.
pub fn default_p2(d: u32, exponent: f64) -> f64 {
    f64::from(d).powf(-exponent)
}

/// Answers "is this edge open?" during an exploration, one random bit per
/// query.
pub trait EdgeOracle {
    fn query(&mut self, edge_index: u64) -> bool;
    fn consumed(&self) -> u64;
}

/// Sequential bit source: the i-th query returns `uniform01(key, i) < p`
/// regardless of which edge is asked about.
#[derive(Debug, Clone)]
pub struct BitStream {
    gen: KeyedUniform,
    p: f64,
    consumed: u64,
    ones: u64,
    window: Option<TrailingWindow>,
}

#[derive(Debug, Clone)]
struct TrailingWindow {
    len: usize,
    ring: Vec<bool>,
    ones: u64,
    max_ones: u64,
}

impl BitStream {
    pub fn new(key: SampleKey, p: f64) -> Self {
        BitStream {
            gen: key.generator(),
            p,
            consumed: 0,
            ones: 0,
            window: None,
        }
    }

    /// Also tracks the largest number of ones seen in any run of `len`
    /// consecutive bits (or fewer, before `len` bits have been drawn).
    pub fn with_window(key: SampleKey, p: f64, len: usize) -> Self {
        let mut s = Self::new(key, p);
        if len > 0 {
            s.window = Some(TrailingWindow {
                len,
                ring: vec![false; len],
                ones: 0,
                max_ones: 0,
            });
        }
        s
    }

    pub fn next_bit(&mut self) -> bool {
        let i = self.consumed;
        let bit = self.gen.uniform01(i) < self.p;
        self.consumed += 1;
        self.ones += u64::from(bit);
        if let Some(w) = &mut self.window {
            let slot = (i % w.len as u64) as usize;
            w.ones -= u64::from(w.ring[slot]);
            w.ring[slot] = bit;
            w.ones += u64::from(bit);
            w.max_ones = w.max_ones.max(w.ones);
        }
        bit
    }

    pub fn ones(&self) -> u64 {
        self.ones
    }

    pub fn max_window_ones(&self) -> Option<u64> {
        self.window.as_ref().map(|w| w.max_ones)
    }
}

impl EdgeOracle for BitStream {
    fn query(&mut self, _edge_index: u64) -> bool {
        self.next_bit()
    }

    fn consumed(&self) -> u64 {
        self.consumed
    }
}

/// Per-edge randomness: answers with the same formula as [`sample_edges`],
/// so an exploration sees exactly the sampled subgraph.
#[derive(Debug, Clone)]
pub struct KeyedEdgeStream {
    gen: KeyedUniform,
    p: f64,
    consumed: u64,
}

impl KeyedEdgeStream {
    pub fn new(key: SampleKey, p: f64) -> Self {
        KeyedEdgeStream {
            gen: key.generator(),
            p,
            consumed: 0,
        }
    }
}

impl EdgeOracle for KeyedEdgeStream {
    fn query(&mut self, edge_index: u64) -> bool {
        self.consumed += 1;
        self.gen.uniform01(edge_index) < self.p
    }

    fn consumed(&self) -> u64 {
        self.consumed
    }
}

/// Bytes in the dump header: d (u32), seed (u64), trial (u32), round (u8),
/// p (f64), all little-endian.
pub const DUMP_HEADER_LEN: usize = 25;

/// Writes the header followed by `ceil(m / 8)` bitmap bytes; edge `e` is bit
/// `e % 8` (least significant first) of byte `e / 8`.
pub fn write_dump<W: Write>(sample: &EdgeSample, mut out: W) -> std::io::Result<()> {
    let m = sample.open.edge_count();
    let mut buf = Vec::with_capacity(DUMP_HEADER_LEN + m.div_ceil(8) as usize);
    buf.extend_from_slice(&sample.open.d.to_le_bytes());
    buf.extend_from_slice(&sample.key.seed.to_le_bytes());
    buf.extend_from_slice(&sample.key.trial.to_le_bytes());
    buf.push(sample.key.round);
    buf.extend_from_slice(&sample.p.to_le_bytes());
    let bytes = m.div_ceil(8) as usize;
    buf.extend(
        sample
            .open
            .words
            .iter()
            .flat_map(|w| w.to_le_bytes())
            .take(bytes),
    );
    out.write_all(&buf)
}

pub fn read_dump<R: Read>(mut input: R) -> Result<EdgeSample> {
    let malformed = |message: String| Error::Parse {
        what: "edge dump",
        message,
    };
    let mut header = [0u8; DUMP_HEADER_LEN];
    input
        .read_exact(&mut header)
        .map_err(|e| malformed(format!("header: {e}")))?;
    let d = u32::from_le_bytes(header[0..4].try_into().unwrap());
    let seed = u64::from_le_bytes(header[4..12].try_into().unwrap());
    let trial = u32::from_le_bytes(header[12..16].try_into().unwrap());
    let round = header[16];
    let p = f64::from_le_bytes(header[17..25].try_into().unwrap());
    let g = CubeGraph::new(d)?;
    check_probability(p)?;
    let m = g.edge_count();
    let mut bytes = vec![0u8; m.div_ceil(8) as usize];
    input
        .read_exact(&mut bytes)
        .map_err(|e| malformed(format!("bitmap: {e}")))?;
    let mut words: Vec<u64> = bytes
        .chunks(8)
        .map(|chunk| {
            let mut w = [0u8; 8];
            w[..chunk.len()].copy_from_slice(chunk);
            u64::from_le_bytes(w)
        })
        .collect();
    words.resize(word_count(m), 0);
    if m % 64 != 0 {
        let last = words.len() - 1;
        if words[last] >> (m % 64) != 0 {
            return Err(malformed("bits set beyond the last edge".into()));
        }
    }
    Ok(EdgeSample {
        key: SampleKey::new(seed, trial, round),
        p,
        open: OpenEdges { d, words },
    })
}
