//! Connected components of a percolated cube and the statistics measured on
//! them.

use std::collections::{BTreeMap, HashSet, VecDeque};
use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hypercube::{CubeGraph, Vertex};
use crate::sampler::{BitStream, EdgeOracle, OpenEdges, SampleKey};

/// Disjoint sets over `0..n` with union by size and path halving.
#[derive(Debug, Clone)]
pub struct UnionFind {
    parent: Vec<u32>,
    size: Vec<u32>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n as u32).collect(),
            size: vec![1; n],
        }
    }

    #[inline]
    pub fn find(&mut self, mut x: u32) -> u32 {
        while self.parent[x as usize] != x {
            let grand = self.parent[self.parent[x as usize] as usize];
            self.parent[x as usize] = grand;
            x = grand;
        }
        x
    }

    /// Returns false when `a` and `b` were already joined.
    #[inline]
    pub fn union(&mut self, a: u32, b: u32) -> bool {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        if self.size[ra as usize] < self.size[rb as usize] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb as usize] = ra;
        self.size[ra as usize] += self.size[rb as usize];
        true
    }

    pub fn set_size(&mut self, x: u32) -> u32 {
        let r = self.find(x);
        self.size[r as usize]
    }
}

/// Vertex to component map. Each component is labeled by its smallest
/// vertex id.
#[derive(Debug, Clone)]
pub struct ComponentLabeling {
    d: u32,
    labels: Vec<u32>,
    /// Indexed by label; zero for ids that are not labels.
    sizes: Vec<u32>,
    component_count: u64,
    l1: u64,
    l2: u64,
    histogram: BTreeMap<u64, u64>,
}

impl ComponentLabeling {
    pub fn dimension(&self) -> u32 {
        self.d
    }

    pub fn vertex_count(&self) -> u64 {
        self.labels.len() as u64
    }

    pub fn label(&self, v: Vertex) -> u32 {
        self.labels[v as usize]
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    /// Size of the component containing `v`.
    pub fn component_size(&self, v: Vertex) -> u64 {
        u64::from(self.sizes[self.labels[v as usize] as usize])
    }

    /// `(label, size)` pairs in increasing label order.
    pub fn components(&self) -> impl Iterator<Item = (u32, u64)> + '_ {
        self.sizes
            .iter()
            .enumerate()
            .filter(|(_, &s)| s > 0)
            .map(|(label, &s)| (label as u32, u64::from(s)))
    }

    pub fn component_count(&self) -> u64 {
        self.component_count
    }

    pub fn l1(&self) -> u64 {
        self.l1
    }

    /// Second-largest component size; 0 when there is a single component.
    pub fn l2(&self) -> u64 {
        self.l2
    }

    /// Component size to number of components of that size.
    pub fn histogram(&self) -> &BTreeMap<u64, u64> {
        &self.histogram
    }

    pub fn write_histogram_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "size,count")?;
        for (size, count) in &self.histogram {
            writeln!(out, "{size},{count}")?;
        }
        Ok(())
    }
}

pub fn label_components(g: &CubeGraph, open: &OpenEdges) -> Result<ComponentLabeling> {
    if open.dimension() != g.dimension() {
        return Err(Error::input(format!(
            "open set has dimension {}, graph has {}",
            open.dimension(),
            g.dimension()
        )));
    }
    let n = g.vertex_count() as usize;
    let mut uf = UnionFind::new(n);
    for e in open.iter() {
        let (a, b) = g.edge_from_index_unchecked(e).endpoints();
        uf.union(a, b);
    }

    // Scanning vertices in increasing order meets each root's smallest
    // member first.
    const UNSET: u32 = u32::MAX;
    let mut root_label = vec![UNSET; n];
    let mut labels = vec![0u32; n];
    let mut sizes = vec![0u32; n];
    for v in 0..n as u32 {
        let r = uf.find(v) as usize;
        if root_label[r] == UNSET {
            root_label[r] = v;
        }
        let label = root_label[r];
        labels[v as usize] = label;
        sizes[label as usize] += 1;
    }

    let mut histogram = BTreeMap::new();
    let (mut l1, mut l2, mut component_count) = (0u64, 0u64, 0u64);
    for &s in sizes.iter().filter(|&&s| s > 0) {
        let s = u64::from(s);
        *histogram.entry(s).or_insert(0) += 1;
        component_count += 1;
        if s > l1 {
            l2 = l1;
            l1 = s;
        } else if s > l2 {
            l2 = s;
        }
    }

    Ok(ComponentLabeling {
        d: g.dimension(),
        labels,
        sizes,
        component_count,
        l1,
        l2,
        histogram,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ExplorationResult {
    pub start: Vertex,
    pub size: u64,
    pub cap_hit: bool,
    pub edges_queried: u64,
    pub open_found: u64,
}

/// Breadth-first exploration of the component of `v`, deciding each edge on
/// demand from `oracle`.
///
/// A dequeued vertex queries its edges in increasing direction order. Edges
/// leading to an already discovered vertex are not queried, so every query
/// asks about a fresh edge and every open answer discovers a new vertex.
/// Stops once `cap` vertices are discovered or the queue empties.
pub fn explore_component<O: EdgeOracle>(
    g: &CubeGraph,
    v: Vertex,
    oracle: &mut O,
    cap: u64,
) -> Result<ExplorationResult> {
    if !g.contains(v) {
        return Err(Error::input(format!("start vertex {v} out of range")));
    }
    if cap == 0 {
        return Err(Error::input("exploration cap must be at least 1"));
    }
    let mut discovered: HashSet<Vertex> = HashSet::new();
    let mut queue = VecDeque::new();
    discovered.insert(v);
    queue.push_back(v);
    let mut edges_queried = 0u64;
    let mut open_found = 0u64;

    'bfs: while let Some(u) = queue.pop_front() {
        if discovered.len() as u64 >= cap {
            break;
        }
        for dir in 0..g.dimension() {
            let w = u ^ (1 << dir);
            if discovered.contains(&w) {
                continue;
            }
            edges_queried += 1;
            if oracle.query(g.edge_index_unchecked(g.edge_at(u, dir))) {
                open_found += 1;
                discovered.insert(w);
                queue.push_back(w);
                if discovered.len() as u64 >= cap {
                    break 'bfs;
                }
            }
        }
    }

    let size = discovered.len() as u64;
    Ok(ExplorationResult {
        start: v,
        size,
        cap_hit: size >= cap,
        edges_queried,
        open_found,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HitEstimate {
    pub estimate: f64,
    pub std_error: f64,
    pub hits: u64,
    pub trials: u64,
}

impl HitEstimate {
    pub fn from_counts(hits: u64, trials: u64) -> Self {
        let q = hits as f64 / trials as f64;
        HitEstimate {
            estimate: q,
            std_error: (q * (1.0 - q) / trials as f64).sqrt(),
            hits,
            trials,
        }
    }
}

/// Explorations from vertex 0, one per trial, each driven by its own bit
/// stream keyed `(seed, trial, 0)`.
pub fn explore_trials(
    g: &CubeGraph,
    p: f64,
    cap: u64,
    trials: u32,
    seed: u64,
) -> Result<Vec<ExplorationResult>> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::input(format!("probability {p} outside [0, 1]")));
    }
    (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut stream = BitStream::new(SampleKey::new(seed, t, 0), p);
            explore_component(g, 0, &mut stream, cap)
        })
        .collect()
}

/// Estimates `Pr[|C(v)| >= threshold]` from `trials` capped explorations.
pub fn hit_probability(
    g: &CubeGraph,
    p: f64,
    threshold: u64,
    trials: u32,
    seed: u64,
) -> Result<HitEstimate> {
    if threshold == 0 {
        return Err(Error::input("threshold must be at least 1"));
    }
    if trials == 0 {
        return Err(Error::input("at least one trial is required"));
    }
    let hits = explore_trials(g, p, threshold, trials, seed)?
        .iter()
        .filter(|r| r.cap_hit)
        .count() as u64;
    Ok(HitEstimate::from_counts(hits, u64::from(trials)))
}

/// Dense bitset over the vertices of one cube.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VertexSet {
    n: u64,
    words: Vec<u64>,
}

impl VertexSet {
    pub fn empty(n: u64) -> Self {
        VertexSet {
            n,
            words: vec![0; n.div_ceil(64) as usize],
        }
    }

    pub fn from_vertices(n: u64, vs: impl IntoIterator<Item = Vertex>) -> Self {
        let mut set = Self::empty(n);
        for v in vs {
            set.insert(v);
        }
        set
    }

    pub fn universe(&self) -> u64 {
        self.n
    }

    pub fn insert(&mut self, v: Vertex) {
        self.words[(v >> 6) as usize] |= 1 << (v & 63);
    }

    #[inline]
    pub fn contains(&self, v: Vertex) -> bool {
        self.words[(v >> 6) as usize] >> (v & 63) & 1 == 1
    }

    pub fn len(&self) -> u64 {
        self.words.iter().map(|w| u64::from(w.count_ones())).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn iter(&self) -> impl Iterator<Item = Vertex> + '_ {
        (0..self.n as Vertex).filter(|&v| self.contains(v))
    }
}

/// Vertices whose component has at least `threshold` vertices.
#[derive(Debug, Clone)]
pub struct WSet {
    pub threshold: u64,
    pub members: VertexSet,
    pub density: f64,
}

pub fn w_set(labeling: &ComponentLabeling, threshold: u64) -> Result<WSet> {
    if threshold == 0 {
        return Err(Error::input("W-set threshold must be at least 1"));
    }
    let n = labeling.vertex_count();
    let mut members = VertexSet::empty(n);
    for v in 0..n as Vertex {
        if labeling.component_size(v) >= threshold {
            members.insert(v);
        }
    }
    let density = members.len() as f64 / n as f64;
    Ok(WSet {
        threshold,
        members,
        density,
    })
}

/// Number of components whose size lies in `[lo, hi]`.
pub fn size_gap_count(labeling: &ComponentLabeling, lo: u64, hi: u64) -> Result<u64> {
    if lo > hi {
        return Err(Error::input(format!("empty size window [{lo}, {hi}]")));
    }
    Ok(labeling.histogram().range(lo..=hi).map(|(_, &c)| c).sum())
}

#[derive(Debug, Clone)]
pub struct SetDistances {
    pub distances: Vec<u8>,
    pub max: u32,
}

/// Multi-source BFS in the full cube from every member of `members`.
pub fn distance_to_set(g: &CubeGraph, members: &VertexSet) -> Result<SetDistances> {
    if members.universe() != g.vertex_count() {
        return Err(Error::input("vertex set does not match the cube"));
    }
    if members.is_empty() {
        return Err(Error::input("distance to an empty set is undefined"));
    }
    const UNSEEN: u8 = u8::MAX;
    let n = g.vertex_count() as usize;
    let mut distances = vec![UNSEEN; n];
    let mut frontier: Vec<Vertex> = members.iter().collect();
    for &v in &frontier {
        distances[v as usize] = 0;
    }
    let mut level = 0u8;
    while !frontier.is_empty() {
        let mut next = Vec::new();
        for &u in &frontier {
            for w in g.neighbor_iter(u) {
                if distances[w as usize] == UNSEEN {
                    distances[w as usize] = level + 1;
                    next.push(w);
                }
            }
        }
        if !next.is_empty() {
            level += 1;
        }
        frontier = next;
    }
    Ok(SetDistances {
        distances,
        max: u32::from(level),
    })
}
