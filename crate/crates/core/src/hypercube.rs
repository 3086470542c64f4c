//! The binary cube Q^d.
//!
//! Vertices are integers in `[0, 2^d)` whose bit `i` is coordinate `i`. An
//! edge joins two vertices differing in exactly one coordinate and is named
//! by its lower endpoint (`base`, with bit `dir` clear) and the flipped
//! direction `dir`.
//!
//! Edges are indexed as `dir * 2^(d-1) + dropbit(base, dir)`, where `dropbit`
//! removes bit `dir` and shifts the higher bits down. The sampler keys its
//! randomness on this index, so the formula is frozen.

use crate::error::{Error, Result};

/// Largest supported dimension; labels are stored in 32-bit arrays.
pub const MAX_DIMENSION: u32 = 30;

/// Largest dimension for which explicit adjacency lists are built.
pub const MAX_ADJACENCY_DIMENSION: u32 = 14;

pub type Vertex = u32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct CubeGraph {
    d: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EdgeRef {
    pub base: Vertex,
    pub dir: u32,
}

impl EdgeRef {
    pub fn new(base: Vertex, dir: u32) -> Self {
        EdgeRef { base, dir }
    }

    /// The endpoint with coordinate `dir` set.
    pub fn top(&self) -> Vertex {
        self.base | (1 << self.dir)
    }

    pub fn endpoints(&self) -> (Vertex, Vertex) {
        (self.base, self.top())
    }
}

impl CubeGraph {
    pub fn new(d: u32) -> Result<Self> {
        if d == 0 {
            return Err(Error::input("dimension must be positive"));
        }
        if d > MAX_DIMENSION {
            return Err(Error::capacity(format!(
                "dimension {d} exceeds the maximum of {MAX_DIMENSION}"
            )));
        }
        Ok(CubeGraph { d })
    }

    pub fn dimension(&self) -> u32 {
        self.d
    }

    pub fn vertex_count(&self) -> u64 {
        1u64 << self.d
    }

    pub fn edge_count(&self) -> u64 {
        u64::from(self.d) << (self.d - 1)
    }

    /// Edges per direction class, `2^(d-1)`.
    pub fn edges_per_direction(&self) -> u64 {
        1u64 << (self.d - 1)
    }

    pub fn contains(&self, v: Vertex) -> bool {
        u64::from(v) < self.vertex_count()
    }

    fn check_vertex(&self, v: Vertex) -> Result<()> {
        if self.contains(v) {
            Ok(())
        } else {
            Err(Error::input(format!(
                "vertex {v} out of range for d = {}",
                self.d
            )))
        }
    }

    /// `v XOR 2^i` for `i = 0..d`, in increasing `i`.
    pub fn neighbors(&self, v: Vertex) -> Result<Vec<Vertex>> {
        self.check_vertex(v)?;
        Ok(self.neighbor_iter(v).collect())
    }

    /// Unchecked neighbor iteration for hot loops; `v` must be in range.
    pub fn neighbor_iter(&self, v: Vertex) -> impl Iterator<Item = Vertex> {
        (0..self.d).map(move |i| v ^ (1 << i))
    }

    /// The edge between `v` and `v XOR 2^dir`.
    pub fn edge_at(&self, v: Vertex, dir: u32) -> EdgeRef {
        EdgeRef {
            base: v & !(1 << dir),
            dir,
        }
    }

    pub fn edge_index(&self, e: EdgeRef) -> Result<u64> {
        if e.dir >= self.d {
            return Err(Error::input(format!(
                "direction {} out of range for d = {}",
                e.dir, self.d
            )));
        }
        self.check_vertex(e.base)?;
        if e.base & (1 << e.dir) != 0 {
            return Err(Error::input(format!(
                "edge base {} has bit {} set",
                e.base, e.dir
            )));
        }
        Ok(self.edge_index_unchecked(e))
    }

    #[inline]
    pub fn edge_index_unchecked(&self, e: EdgeRef) -> u64 {
        (u64::from(e.dir) << (self.d - 1)) | u64::from(drop_bit(e.base, e.dir))
    }

    pub fn edge_from_index(&self, index: u64) -> Result<EdgeRef> {
        if index >= self.edge_count() {
            return Err(Error::input(format!(
                "edge index {index} out of range for d = {}",
                self.d
            )));
        }
        Ok(self.edge_from_index_unchecked(index))
    }

    #[inline]
    pub fn edge_from_index_unchecked(&self, index: u64) -> EdgeRef {
        let dir = (index >> (self.d - 1)) as u32;
        let low = (index & (self.edges_per_direction() - 1)) as u32;
        EdgeRef {
            base: insert_zero_bit(low, dir),
            dir,
        }
    }

    /// All edges in index order.
    pub fn edges(&self) -> impl Iterator<Item = EdgeRef> + '_ {
        (0..self.edge_count()).map(|i| self.edge_from_index_unchecked(i))
    }

    pub fn export_adjacency(&self) -> Result<Vec<Vec<Vertex>>> {
        if self.d > MAX_ADJACENCY_DIMENSION {
            return Err(Error::capacity(format!(
                "adjacency export limited to d <= {MAX_ADJACENCY_DIMENSION}, got {}",
                self.d
            )));
        }
        Ok((0..self.vertex_count() as Vertex)
            .map(|v| self.neighbor_iter(v).collect())
            .collect())
    }
}

/// Removes bit `pos` from `x`, shifting the higher bits down by one.
#[inline]
pub fn drop_bit(x: u32, pos: u32) -> u32 {
    let low_mask = (1u32 << pos) - 1;
    (x & low_mask) | ((x >> 1) & !low_mask)
}

/// Inverse of [`drop_bit`] on values whose bit `pos` is clear.
#[inline]
pub fn insert_zero_bit(x: u32, pos: u32) -> u32 {
    let low_mask = (1u32 << pos) - 1;
    (x & low_mask) | ((x & !low_mask) << 1)
}

#[inline]
pub fn hamming_distance(u: Vertex, v: Vertex) -> u32 {
    (u ^ v).count_ones()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn cube(d: u32) -> CubeGraph {
        CubeGraph::new(d).unwrap()
    }

    #[test]
    fn counts() {
        let g = cube(3);
        assert_eq!(g.vertex_count(), 8);
        assert_eq!(g.edge_count(), 12);
        assert_eq!(cube(30).edge_count(), 30 << 29);
    }

    #[test]
    fn dimension_limits() {
        assert!(matches!(CubeGraph::new(0), Err(Error::Input(_))));
        assert!(matches!(CubeGraph::new(31), Err(Error::Capacity(_))));
    }

    #[test]
    fn neighbor_examples() {
        assert_eq!(cube(3).neighbors(0).unwrap(), vec![1, 2, 4]);
        assert_eq!(cube(3).neighbors(5).unwrap(), vec![4, 7, 1]);
        assert_eq!(cube(1).neighbors(0).unwrap(), vec![1]);
        assert!(cube(3).neighbors(8).is_err());
    }

    #[test]
    fn edge_index_examples() {
        let g = cube(3);
        assert_eq!(g.edge_index(EdgeRef::new(0, 0)).unwrap(), 0);
        assert_eq!(g.edge_index(EdgeRef::new(2, 0)).unwrap(), 1);
        assert_eq!(g.edge_index(EdgeRef::new(1, 2)).unwrap(), 9);
        assert!(g.edge_index(EdgeRef::new(1, 0)).is_err());
        assert!(g.edge_index(EdgeRef::new(0, 3)).is_err());
    }

    #[test]
    fn hamming_examples() {
        assert_eq!(hamming_distance(0, 0), 0);
        assert_eq!(hamming_distance(0, 5), 2);
        assert_eq!(hamming_distance(3, 4), 3);
    }

    #[test]
    fn adjacency_examples() {
        let c4 = cube(2).export_adjacency().unwrap();
        assert_eq!(c4, vec![vec![1, 2], vec![0, 3], vec![3, 0], vec![2, 1]]);
        assert_eq!(cube(1).export_adjacency().unwrap(), vec![vec![1], vec![0]]);
        let q3 = cube(3).export_adjacency().unwrap();
        assert!(q3.iter().all(|nbrs| nbrs.len() == 3));
        assert_eq!(q3.iter().map(Vec::len).sum::<usize>() / 2, 12);
        assert!(matches!(
            cube(15).export_adjacency(),
            Err(Error::Capacity(_))
        ));
    }

    #[test]
    fn edge_index_is_bijective_exhaustive() {
        for d in 1..=10 {
            let g = cube(d);
            let mut seen = vec![false; g.edge_count() as usize];
            for v in 0..g.vertex_count() as Vertex {
                for dir in 0..d {
                    if v & (1 << dir) != 0 {
                        continue;
                    }
                    let e = EdgeRef::new(v, dir);
                    let idx = g.edge_index(e).unwrap();
                    assert!(!seen[idx as usize]);
                    seen[idx as usize] = true;
                    assert_eq!(g.edge_from_index(idx).unwrap(), e);
                }
            }
            assert!(seen.iter().all(|&s| s));
            for idx in 0..g.edge_count() {
                let e = g.edge_from_index(idx).unwrap();
                assert_eq!(g.edge_index(e).unwrap(), idx);
            }
        }
    }

    #[test]
    fn degree_regularity_exhaustive() {
        for d in 1..=10 {
            let g = cube(d);
            let mut degree = vec![0u32; g.vertex_count() as usize];
            for e in g.edges() {
                let (a, b) = e.endpoints();
                assert_eq!(hamming_distance(a, b), 1);
                degree[a as usize] += 1;
                degree[b as usize] += 1;
            }
            assert!(degree.iter().all(|&k| k == d));
        }
    }

    proptest! {
        #[test]
        fn neighbors_are_distinct_and_adjacent(d in 1u32..=10, raw in any::<u32>()) {
            let g = cube(d);
            let v = raw % g.vertex_count() as u32;
            let nbrs = g.neighbors(v).unwrap();
            prop_assert_eq!(nbrs.len(), d as usize);
            let mut sorted = nbrs.clone();
            sorted.sort_unstable();
            sorted.dedup();
            prop_assert_eq!(sorted.len(), d as usize);
            for u in nbrs {
                prop_assert_eq!(hamming_distance(u, v), 1);
                prop_assert_eq!(g.edge_at(u, (u ^ v).trailing_zeros()), g.edge_at(v, (u ^ v).trailing_zeros()));
            }
        }
    }
}
