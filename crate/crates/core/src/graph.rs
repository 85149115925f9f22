//! Undirected graphs with a canonical edge order, plus hop-distance utilities.
//!
//! Edges are stored as `(i, j)` with `i < j`, sorted lexicographically. Every
//! matrix built from a graph (bearing function, rigidity matrices) uses this
//! order for its row blocks.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Undirected simple graph on vertices `0..vertex_count`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawGraph", into = "RawGraph")]
pub struct Graph {
    vertex_count: usize,
    edges: Vec<(usize, usize)>,
    adjacency: Vec<Vec<usize>>,
}

#[derive(Serialize, Deserialize)]
struct RawGraph {
    vertex_count: usize,
    edges: Vec<[usize; 2]>,
}

impl TryFrom<RawGraph> for Graph {
    type Error = Error;

    fn try_from(raw: RawGraph) -> Result<Self> {
        Graph::new(raw.vertex_count, raw.edges.iter().map(|e| (e[0], e[1])))
    }
}

impl From<Graph> for RawGraph {
    fn from(g: Graph) -> Self {
        RawGraph {
            vertex_count: g.vertex_count,
            edges: g.edges.iter().map(|&(i, j)| [i, j]).collect(),
        }
    }
}

impl Graph {
    /// Builds a graph, rejecting self-loops, duplicates (in either
    /// orientation) and out-of-range endpoints.
    pub fn new(vertex_count: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut canon = Vec::new();
        for (a, b) in edges {
            if a == b {
                return Err(Error::InvalidGraph(format!("self-loop at vertex {a}")));
            }
            if a >= vertex_count || b >= vertex_count {
                return Err(Error::InvalidGraph(format!(
                    "edge {{{a}, {b}}} out of range for {vertex_count} vertices"
                )));
            }
            canon.push((a.min(b), a.max(b)));
        }
        canon.sort_unstable();
        if let Some(w) = canon.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::InvalidGraph(format!(
                "duplicate edge {{{}, {}}}",
                w[0].0, w[0].1
            )));
        }
        Ok(Self::from_sorted(vertex_count, canon))
    }

    /// Builds a graph from edges that may repeat; duplicates are merged.
    pub fn from_edges_dedup(
        vertex_count: usize,
        edges: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self> {
        let mut canon: Vec<_> = edges.into_iter().map(|(a, b)| (a.min(b), a.max(b))).collect();
        canon.sort_unstable();
        canon.dedup();
        Self::new(vertex_count, canon)
    }

    fn from_sorted(vertex_count: usize, edges: Vec<(usize, usize)>) -> Self {
        let mut adjacency = vec![Vec::new(); vertex_count];
        for &(i, j) in &edges {
            adjacency[i].push(j);
            adjacency[j].push(i);
        }
        for nbrs in &mut adjacency {
            nbrs.sort_unstable();
        }
        Self {
            vertex_count,
            edges,
            adjacency,
        }
    }

    pub fn empty(vertex_count: usize) -> Self {
        Self::from_sorted(vertex_count, Vec::new())
    }

    pub fn complete(vertex_count: usize) -> Self {
        let edges = (0..vertex_count)
            .flat_map(|i| ((i + 1)..vertex_count).map(move |j| (i, j)))
            .collect();
        Self::from_sorted(vertex_count, edges)
    }

    pub fn path(vertex_count: usize) -> Self {
        let edges = (1..vertex_count).map(|i| (i - 1, i)).collect();
        Self::from_sorted(vertex_count, edges)
    }

    pub fn cycle(vertex_count: usize) -> Self {
        assert!(vertex_count >= 3, "a cycle needs at least 3 vertices");
        Self::new(vertex_count, (0..vertex_count).map(|i| (i, (i + 1) % vertex_count)))
            .expect("cycle edges are valid")
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    /// Edges in canonical order.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Sorted neighbor list of `i`.
    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.adjacency[i]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.adjacency[i].len()
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.edge_index(i, j).is_some()
    }

    /// Row-block index of edge `{i, j}` in the canonical order.
    pub fn edge_index(&self, i: usize, j: usize) -> Option<usize> {
        self.edges.binary_search(&(i.min(j), i.max(j))).ok()
    }

    /// Induced subgraph on `vertices` (given as global ids). Local vertex `k`
    /// corresponds to `vertices[k]`.
    pub fn induced(&self, vertices: &[usize]) -> Graph {
        let mut local = vec![usize::MAX; self.vertex_count];
        for (k, &v) in vertices.iter().enumerate() {
            local[v] = k;
        }
        let mut edges: Vec<_> = self
            .edges
            .iter()
            .filter(|&&(i, j)| local[i] != usize::MAX && local[j] != usize::MAX)
            .map(|&(i, j)| {
                let (a, b) = (local[i], local[j]);
                (a.min(b), a.max(b))
            })
            .collect();
        edges.sort_unstable();
        Self::from_sorted(vertices.len(), edges)
    }

    /// Hop distances from `source`; `None` marks unreachable vertices.
    pub fn bfs(&self, source: usize) -> Vec<Option<usize>> {
        self.bfs_bounded(source, usize::MAX)
    }

    /// Hop distances from `source`, exploring no further than `max_hops`.
    pub fn bfs_bounded(&self, source: usize, max_hops: usize) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.vertex_count];
        let mut queue = VecDeque::new();
        dist[source] = Some(0);
        queue.push_back(source);
        while let Some(u) = queue.pop_front() {
            let du = dist[u].unwrap();
            if du == max_hops {
                continue;
            }
            for &v in &self.adjacency[u] {
                if dist[v].is_none() {
                    dist[v] = Some(du + 1);
                    queue.push_back(v);
                }
            }
        }
        dist
    }

    /// All-pairs hop distances by repeated BFS.
    pub fn distances(&self) -> HopDistances {
        let n = self.vertex_count;
        let mut table = vec![HopDistances::INF; n * n];
        for s in 0..n {
            for (t, d) in self.bfs(s).into_iter().enumerate() {
                if let Some(d) = d {
                    table[s * n + t] = d as u32;
                }
            }
        }
        HopDistances { n, table }
    }

    pub fn is_connected(&self) -> bool {
        self.vertex_count == 0 || self.bfs(0).iter().all(Option::is_some)
    }

    /// Largest hop distance; errors when the graph is disconnected.
    pub fn diameter(&self) -> Result<usize> {
        self.distances().diameter()
    }
}

/// All-pairs hop-distance table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HopDistances {
    n: usize,
    table: Vec<u32>,
}

impl HopDistances {
    const INF: u32 = u32::MAX;

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    /// `None` when `j` is unreachable from `i`.
    pub fn get(&self, i: usize, j: usize) -> Option<usize> {
        match self.table[i * self.n + j] {
            Self::INF => None,
            d => Some(d as usize),
        }
    }

    pub fn diameter(&self) -> Result<usize> {
        if self.table.contains(&Self::INF) {
            return Err(Error::DisconnectedGraph);
        }
        Ok(self.table.iter().copied().max().unwrap_or(0) as usize)
    }
}

/// Directed graph stored as a sorted arc list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiGraph {
    vertex_count: usize,
    arcs: Vec<(usize, usize)>,
}

impl DiGraph {
    pub fn new(vertex_count: usize, mut arcs: Vec<(usize, usize)>) -> Self {
        arcs.sort_unstable();
        arcs.dedup();
        Self { vertex_count, arcs }
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn arcs(&self) -> &[(usize, usize)] {
        &self.arcs
    }

    pub fn has_arc(&self, i: usize, j: usize) -> bool {
        self.arcs.binary_search(&(i, j)).is_ok()
    }

    /// Undirected version: `{i, j}` present iff `(i, j)` or `(j, i)` is.
    pub fn to_undirected(&self) -> Graph {
        Graph::from_edges_dedup(self.vertex_count, self.arcs.iter().copied())
            .expect("arcs of a digraph are valid edges")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_malformed_edges() {
        assert!(Graph::new(3, [(0, 0)]).is_err());
        assert!(Graph::new(3, [(0, 3)]).is_err());
        assert!(Graph::new(3, [(0, 1), (1, 0)]).is_err());
    }

    #[test]
    fn edges_are_canonically_ordered() {
        let g = Graph::new(4, [(3, 2), (1, 0), (2, 0)]).unwrap();
        assert_eq!(g.edges(), &[(0, 1), (0, 2), (2, 3)]);
        assert_eq!(g.edge_index(3, 2), Some(2));
        assert_eq!(g.edge_index(1, 3), None);
    }

    #[test]
    fn path_diameter() {
        assert_eq!(Graph::path(4).diameter().unwrap(), 3);
    }

    #[test]
    fn complete_diameter() {
        assert_eq!(Graph::complete(6).diameter().unwrap(), 1);
    }

    #[test]
    fn cycle_opposite_vertices() {
        let d = Graph::cycle(6).distances();
        assert_eq!(d.get(0, 3), Some(3));
        assert_eq!(d.get(1, 4), Some(3));
        assert_eq!(d.diameter().unwrap(), 3);
    }

    #[test]
    fn disconnected_has_no_diameter() {
        let g = Graph::new(4, [(0, 1), (2, 3)]).unwrap();
        assert_eq!(g.distances().get(0, 2), None);
        assert_eq!(g.diameter(), Err(Error::DisconnectedGraph));
        assert!(!g.is_connected());
    }

    #[test]
    fn induced_subgraph_relabels() {
        let g = Graph::path(5);
        let sub = g.induced(&[1, 2, 3]);
        assert_eq!(sub.edges(), &[(0, 1), (1, 2)]);
    }

    #[test]
    fn digraph_union_semantics() {
        let dg = DiGraph::new(3, vec![(0, 1), (1, 0), (2, 1)]);
        let g = dg.to_undirected();
        assert_eq!(g.edges(), &[(0, 1), (1, 2)]);
    }
}
