//! Exhaustive checks at tiny scale.
//!
//! Nothing here is fast; everything here is exact. The fast paths in
//! [`crate::sampler`] and [`crate::components`] are tested against these.

use std::collections::{BTreeMap, HashSet};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::hypercube::{CubeGraph, Vertex};

pub const MAX_SMALL_VERTICES: usize = 24;
pub const MAX_HARPER_DIMENSION: u32 = 4;
pub const MAX_SUBTREE_SIZE: u64 = 8;
pub const MAX_EXACT_EDGES: usize = 20;

/// A simple undirected graph on at most 24 vertices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SmallGraph {
    adjacency: Vec<Vec<usize>>,
    edges: Vec<(usize, usize)>,
    max_degree: usize,
}

impl SmallGraph {
    pub fn new(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        if n > MAX_SMALL_VERTICES {
            return Err(Error::capacity(format!(
                "small graphs are limited to {MAX_SMALL_VERTICES} vertices, got {n}"
            )));
        }
        let mut adjacency = vec![Vec::new(); n];
        let mut canonical = Vec::with_capacity(edges.len());
        for &(a, b) in edges {
            if a >= n || b >= n {
                return Err(Error::input(format!("edge ({a}, {b}) out of range")));
            }
            if a == b {
                return Err(Error::input(format!("self-loop at {a}")));
            }
            if adjacency[a].contains(&b) {
                return Err(Error::input(format!("duplicate edge ({a}, {b})")));
            }
            adjacency[a].push(b);
            adjacency[b].push(a);
            canonical.push((a.min(b), a.max(b)));
        }
        for nbrs in &mut adjacency {
            nbrs.sort_unstable();
        }
        canonical.sort_unstable();
        let max_degree = adjacency.iter().map(Vec::len).max().unwrap_or(0);
        Ok(SmallGraph {
            adjacency,
            edges: canonical,
            max_degree,
        })
    }

    pub fn from_cube(g: &CubeGraph) -> Result<Self> {
        let n = g.vertex_count() as usize;
        if n > MAX_SMALL_VERTICES {
            return Err(Error::capacity(format!(
                "Q^{} has {n} vertices, more than {MAX_SMALL_VERTICES}",
                g.dimension()
            )));
        }
        let edges: Vec<(usize, usize)> = g
            .edges()
            .map(|e| (e.base as usize, e.top() as usize))
            .collect();
        Self::new(n, &edges)
    }

    pub fn vertex_count(&self) -> usize {
        self.adjacency.len()
    }

    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adjacency[v]
    }

    /// Edges as `(low, high)` pairs in lexicographic order.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }
}

/// Number of cube edges with exactly one endpoint in `s`.
pub fn edge_boundary(g: &CubeGraph, s: impl IntoIterator<Item = Vertex>) -> Result<u64> {
    let mut inside = vec![false; g.vertex_count() as usize];
    let mut members = Vec::new();
    for v in s {
        if !g.contains(v) {
            return Err(Error::input(format!("vertex {v} out of range")));
        }
        if !inside[v as usize] {
            inside[v as usize] = true;
            members.push(v);
        }
    }
    Ok(members
        .iter()
        .flat_map(|&v| g.neighbor_iter(v))
        .filter(|&w| !inside[w as usize])
        .count() as u64)
}

fn mask_boundary(g: &CubeGraph, mask: u64) -> u64 {
    let mut count = 0;
    for v in 0..g.vertex_count() as Vertex {
        if mask >> v & 1 == 1 {
            count += g.neighbor_iter(v).filter(|&w| mask >> w & 1 == 0).count() as u64;
        }
    }
    count
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HarperViolation {
    /// Bit `v` set iff vertex `v` is in the subset.
    pub subset: u64,
    pub size: u64,
    pub boundary: u64,
    pub bound: f64,
    /// True when only the weaker `boundary >= |S|` fails.
    pub weak_form: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HarperReport {
    pub d: u32,
    pub subsets_checked: u64,
    pub violations: Vec<HarperViolation>,
}

/// Checks `e(S, S^c) >= |S| (d - log2 |S|)` and `e(S, S^c) >= |S|` for every
/// nonempty `S` with `|S| <= 2^(d-1)`.
pub fn harper_check(d: u32) -> Result<HarperReport> {
    if d > MAX_HARPER_DIMENSION {
        return Err(Error::capacity(format!(
            "exhaustive Harper check limited to d <= {MAX_HARPER_DIMENSION}, got {d}"
        )));
    }
    let g = CubeGraph::new(d)?;
    let n = g.vertex_count();
    let half = n / 2;
    let mut subsets_checked = 0;
    let mut violations = Vec::new();
    for mask in 1u64..(1 << n) {
        let size = u64::from(mask.count_ones());
        if size > half {
            continue;
        }
        subsets_checked += 1;
        let boundary = mask_boundary(&g, mask);
        let sz = size as f64;
        let bound = sz * (f64::from(d) - sz.log2());
        let strong_ok = boundary as f64 >= bound - 1e-9;
        let weak_ok = boundary >= size;
        if !strong_ok || !weak_ok {
            violations.push(HarperViolation {
                subset: mask,
                size,
                boundary,
                bound,
                weak_form: strong_ok,
            });
        }
    }
    Ok(HarperReport {
        d,
        subsets_checked,
        violations,
    })
}

/// Number of distinct trees (as edge sets) on `k` vertices of `g` that
/// contain `v`.
///
/// Trees are grown one edge at a time from `{v}`; each level is
/// deduplicated on its sorted edge list.
pub fn count_subtrees(g: &SmallGraph, v: usize, k: u64) -> Result<u64> {
    if k > MAX_SUBTREE_SIZE {
        return Err(Error::capacity(format!(
            "subtree enumeration limited to k <= {MAX_SUBTREE_SIZE}, got {k}"
        )));
    }
    if v >= g.vertex_count() {
        return Err(Error::input(format!("vertex {v} out of range")));
    }
    if k == 0 {
        return Ok(0);
    }

    struct Tree {
        vertices: u32,
        edges: Vec<(u8, u8)>,
    }

    let mut level = vec![Tree {
        vertices: 1 << v,
        edges: Vec::new(),
    }];
    for _ in 1..k {
        let mut seen: HashSet<Vec<(u8, u8)>> = HashSet::new();
        let mut next = Vec::new();
        for tree in &level {
            for u in 0..g.vertex_count() {
                if tree.vertices >> u & 1 == 0 {
                    continue;
                }
                for &w in g.neighbors(u) {
                    if tree.vertices >> w & 1 == 1 {
                        continue;
                    }
                    let mut edges = tree.edges.clone();
                    let e = (u.min(w) as u8, u.max(w) as u8);
                    let at = edges.partition_point(|&x| x < e);
                    edges.insert(at, e);
                    if seen.insert(edges.clone()) {
                        next.push(Tree {
                            vertices: tree.vertices | 1 << w,
                            edges,
                        });
                    }
                }
            }
        }
        level = next;
    }
    Ok(level.len() as u64)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JointProbability {
    pub l1: usize,
    pub components: usize,
    pub probability: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct L1Probability {
    pub l1: usize,
    pub probability: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExactDistribution {
    pub p: f64,
    /// Joint law of (largest component, component count), sorted.
    pub joint: Vec<JointProbability>,
    /// Marginal law of the largest component, by increasing size.
    pub l1: Vec<L1Probability>,
    pub expected_l1: f64,
    pub total_probability: f64,
}

impl ExactDistribution {
    pub fn l1_probability(&self, l1: usize) -> f64 {
        self.l1
            .iter()
            .find(|e| e.l1 == l1)
            .map_or(0.0, |e| e.probability)
    }
}

/// Component sizes of `g` restricted to the edges selected by `mask`, via
/// depth-first search.
fn component_sizes(g: &SmallGraph, mask: u64) -> Vec<usize> {
    let n = g.vertex_count();
    let mut open_adj = vec![Vec::new(); n];
    for (i, &(a, b)) in g.edges().iter().enumerate() {
        if mask >> i & 1 == 1 {
            open_adj[a].push(b);
            open_adj[b].push(a);
        }
    }
    let mut seen = vec![false; n];
    let mut sizes = Vec::new();
    for s in 0..n {
        if seen[s] {
            continue;
        }
        seen[s] = true;
        let mut stack = vec![s];
        let mut size = 0;
        while let Some(u) = stack.pop() {
            size += 1;
            for &w in &open_adj[u] {
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        sizes.push(size);
    }
    sizes
}

/// Exact law of the largest component and the component count under bond
/// percolation, by enumerating all `2^|E|` edge subsets.
pub fn exact_percolation_distribution(g: &SmallGraph, p: f64) -> Result<ExactDistribution> {
    let m = g.edges().len();
    if m > MAX_EXACT_EDGES {
        return Err(Error::capacity(format!(
            "exact distribution limited to {MAX_EXACT_EDGES} edges, got {m}"
        )));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::input(format!("probability {p} outside [0, 1]")));
    }
    let weight: Vec<f64> = (0..=m)
        .map(|open| p.powi(open as i32) * (1.0 - p).powi((m - open) as i32))
        .collect();
    let mut joint: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    for mask in 0u64..(1 << m) {
        let w = weight[mask.count_ones() as usize];
        if w == 0.0 {
            continue;
        }
        let sizes = component_sizes(g, mask);
        let l1 = sizes.iter().copied().max().unwrap_or(0);
        *joint.entry((l1, sizes.len())).or_insert(0.0) += w;
    }

    let mut l1_marginal: BTreeMap<usize, f64> = BTreeMap::new();
    for (&(l1, _), &pr) in &joint {
        *l1_marginal.entry(l1).or_insert(0.0) += pr;
    }
    let expected_l1 = l1_marginal.iter().map(|(&l1, &pr)| l1 as f64 * pr).sum();
    let total_probability = joint.values().sum();
    Ok(ExactDistribution {
        p,
        joint: joint
            .into_iter()
            .map(|((l1, components), probability)| JointProbability {
                l1,
                components,
                probability,
            })
            .collect(),
        l1: l1_marginal
            .into_iter()
            .map(|(l1, probability)| L1Probability { l1, probability })
            .collect(),
        expected_l1,
        total_probability,
    })
}
