//! Finite simple connected graphs with site potentials, and their cycle
//! structure relative to a spanning tree.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::{Error, Result};

/// An undirected edge stored as `(u, v)` with `u < v`.
pub type Edge = (usize, usize);

/// A directed edge `(from, to)`.
pub type Arc = (usize, usize);

/// A connected simple graph together with a real potential on its vertices.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    n: usize,
    edges: Vec<Edge>,
    potential: Vec<f64>,
    adjacency: Vec<Vec<usize>>,
}

impl Graph {
    /// Validates and canonicalizes a graph: each edge is oriented `u < v` and
    /// the edge list is sorted lexicographically.
    pub fn new(n: usize, edges: &[(usize, usize)], potential: Vec<f64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptyGraph);
        }
        if potential.len() != n {
            return Err(Error::DimensionMismatch {
                what: "potential",
                got: potential.len(),
                expected: n,
            });
        }
        if let Some(vertex) = potential.iter().position(|q| !q.is_finite()) {
            return Err(Error::NonFinitePotential { vertex });
        }
        let mut seen = BTreeSet::new();
        for (index, &(a, b)) in edges.iter().enumerate() {
            for vertex in [a, b] {
                if vertex >= n {
                    return Err(Error::VertexOutOfRange { index, vertex, n });
                }
            }
            if a == b {
                return Err(Error::LoopEdge { index, vertex: a });
            }
            let e = (a.min(b), a.max(b));
            if !seen.insert(e) {
                return Err(Error::DuplicateEdge { index, u: e.0, v: e.1 });
            }
        }
        let edges: Vec<Edge> = seen.into_iter().collect();
        let mut adjacency = vec![Vec::new(); n];
        for &(u, v) in &edges {
            adjacency[u].push(v);
            adjacency[v].push(u);
        }
        for list in &mut adjacency {
            list.sort_unstable();
        }
        let graph = Graph {
            n,
            edges,
            potential,
            adjacency,
        };
        if let Some(unreached) = graph.first_unreached() {
            return Err(Error::Disconnected { unreached });
        }
        Ok(graph)
    }

    pub fn n_vertices(&self) -> usize {
        self.n
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    /// Canonical (sorted, `u < v`) edge list.
    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn potential(&self) -> &[f64] {
        &self.potential
    }

    /// Sorted neighbours of `u`.
    pub fn neighbors(&self, u: usize) -> &[usize] {
        &self.adjacency[u]
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        a < self.n && self.adjacency[a].binary_search(&b).is_ok()
    }

    /// Position of the edge `{a, b}` in [`Graph::edges`].
    pub fn edge_index(&self, a: usize, b: usize) -> Option<usize> {
        self.edges.binary_search(&(a.min(b), a.max(b))).ok()
    }

    /// First Betti number `|E| - |V| + 1`.
    pub fn betti(&self) -> usize {
        self.edges.len() + 1 - self.n
    }

    /// Same graph with a different potential.
    pub fn with_potential(&self, potential: Vec<f64>) -> Result<Self> {
        Graph::new(self.n, &self.edges, potential)
    }

    fn first_unreached(&self) -> Option<usize> {
        let mut seen = vec![false; self.n];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(u) = stack.pop() {
            for &w in &self.adjacency[u] {
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        seen.iter().position(|s| !s)
    }
}

/// A spanning tree, the complementary surplus edges `S`, and for every
/// surplus edge the oriented cycle it closes through the tree.
#[derive(Debug, Clone, PartialEq)]
pub struct CycleStructure {
    tree_edges: Vec<Edge>,
    surplus_edges: Vec<Edge>,
    cycle_basis: Vec<Vec<Arc>>,
}

impl CycleStructure {
    /// Cycle structure of `g`.
    ///
    /// Without a seed the tree is grown depth-first from vertex 0, always
    /// descending into the lowest-index unvisited neighbour. With a seed the
    /// tree is a Kruskal tree over a seeded random edge order.
    pub fn new(g: &Graph, tree_seed: Option<u64>) -> Self {
        let tree_edges = match tree_seed {
            None => depth_first_tree(g),
            Some(seed) => random_tree(g, seed),
        };
        let in_tree: BTreeSet<Edge> = tree_edges.iter().copied().collect();
        let surplus_edges: Vec<Edge> = g
            .edges()
            .iter()
            .copied()
            .filter(|e| !in_tree.contains(e))
            .collect();

        let (parent, depth) = root_tree(g.n_vertices(), &tree_edges);
        let cycle_basis = surplus_edges
            .iter()
            .map(|&(u, v)| {
                // (u -> v) followed by the tree path v -> u
                let mut cycle = vec![(u, v)];
                let mut a = v;
                let mut b = u;
                let mut tail = Vec::new();
                while a != b {
                    if depth[a] >= depth[b] {
                        cycle.push((a, parent[a]));
                        a = parent[a];
                    } else {
                        tail.push((parent[b], b));
                        b = parent[b];
                    }
                }
                cycle.extend(tail.into_iter().rev());
                cycle
            })
            .collect();

        let mut tree_edges = tree_edges;
        tree_edges.sort_unstable();
        CycleStructure {
            tree_edges,
            surplus_edges,
            cycle_basis,
        }
    }

    pub fn tree_edges(&self) -> &[Edge] {
        &self.tree_edges
    }

    /// The ordered surplus edge set `S`; index `j` here is the index of the
    /// phase `alpha_j` and cut parameter `gamma_j`.
    pub fn surplus_edges(&self) -> &[Edge] {
        &self.surplus_edges
    }

    pub fn betti(&self) -> usize {
        self.surplus_edges.len()
    }

    /// Oriented cycle closed by surplus edge `j`, starting with `(u_j, v_j)`.
    pub fn cycle(&self, j: usize) -> &[Arc] {
        &self.cycle_basis[j]
    }

    pub fn cycle_basis(&self) -> &[Vec<Arc>] {
        &self.cycle_basis
    }

    pub fn surplus_index_of(&self, edge: Edge) -> Option<usize> {
        let e = (edge.0.min(edge.1), edge.0.max(edge.1));
        self.surplus_edges.iter().position(|&s| s == e)
    }

    /// Resolves an edge to its surplus index, rejecting tree edges.
    pub fn require_surplus(&self, g: &Graph, edge: Edge) -> Result<usize> {
        let (u, v) = (edge.0.min(edge.1), edge.0.max(edge.1));
        if !g.has_edge(u, v) {
            return Err(Error::UnknownEdge { u, v });
        }
        self.surplus_index_of((u, v))
            .ok_or(Error::RequestedEdgeNotSurplus { u, v })
    }

    pub(crate) fn check_index(&self, j: usize) -> Result<()> {
        if j < self.betti() {
            Ok(())
        } else {
            Err(Error::SurplusIndexOutOfRange {
                index: j,
                betti: self.betti(),
            })
        }
    }
}

fn depth_first_tree(g: &Graph) -> Vec<Edge> {
    let n = g.n_vertices();
    let mut visited = vec![false; n];
    let mut tree = Vec::with_capacity(n - 1);
    let mut stack: Vec<(usize, usize)> = vec![(0, 0)];
    visited[0] = true;
    while let Some(top) = stack.last_mut() {
        let (u, next) = *top;
        let nbrs = g.neighbors(u);
        if next == nbrs.len() {
            stack.pop();
            continue;
        }
        top.1 += 1;
        let w = nbrs[next];
        if !visited[w] {
            visited[w] = true;
            tree.push((u.min(w), u.max(w)));
            stack.push((w, 0));
        }
    }
    tree
}

fn random_tree(g: &Graph, seed: u64) -> Vec<Edge> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<Edge> = g.edges().to_vec();
    order.shuffle(&mut rng);
    let mut sets = DisjointSets::new(g.n_vertices());
    order
        .into_iter()
        .filter(|&(u, v)| sets.union(u, v))
        .collect()
}

/// Parent pointers and depths of a tree rooted at vertex 0.
fn root_tree(n: usize, tree: &[Edge]) -> (Vec<usize>, Vec<usize>) {
    let mut adj = vec![Vec::new(); n];
    for &(u, v) in tree {
        adj[u].push(v);
        adj[v].push(u);
    }
    let mut parent = vec![usize::MAX; n];
    let mut depth = vec![0; n];
    parent[0] = 0;
    let mut stack = vec![0];
    while let Some(u) = stack.pop() {
        for &w in &adj[u] {
            if parent[w] == usize::MAX {
                parent[w] = u;
                depth[w] = depth[u] + 1;
                stack.push(w);
            }
        }
    }
    (parent, depth)
}

pub(crate) struct DisjointSets {
    parent: Vec<usize>,
}

impl DisjointSets {
    pub(crate) fn new(n: usize) -> Self {
        DisjointSets {
            parent: (0..n).collect(),
        }
    }

    pub(crate) fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Returns false if `a` and `b` were already joined.
    pub(crate) fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.parent[ra.max(rb)] = ra.min(rb);
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn triangle() -> Graph {
        Graph::new(3, &[(0, 1), (1, 2), (0, 2)], vec![0.0; 3]).unwrap()
    }

    #[test]
    fn path_graph_is_valid() {
        let g = Graph::new(2, &[(1, 0)], vec![0.0, 0.0]).unwrap();
        assert_eq!(g.edges(), &[(0, 1)]);
        assert_eq!(g.betti(), 0);
    }

    #[test]
    fn edges_are_canonical_and_sorted() {
        let g = Graph::new(3, &[(2, 1), (2, 0), (1, 0)], vec![0.0; 3]).unwrap();
        assert_eq!(g.edges(), &[(0, 1), (0, 2), (1, 2)]);
        assert_eq!(g.edge_index(2, 0), Some(1));
    }

    #[test]
    fn rejects_malformed_graphs() {
        assert_eq!(
            Graph::new(4, &[(0, 1), (2, 3)], vec![0.0; 4]),
            Err(Error::Disconnected { unreached: 2 })
        );
        assert_eq!(
            Graph::new(2, &[(0, 0), (0, 1)], vec![0.0; 2]),
            Err(Error::LoopEdge { index: 0, vertex: 0 })
        );
        assert_eq!(
            Graph::new(2, &[(0, 1), (1, 0)], vec![0.0; 2]),
            Err(Error::DuplicateEdge { index: 1, u: 0, v: 1 })
        );
        assert!(matches!(
            Graph::new(2, &[(0, 1)], vec![0.0; 3]),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(matches!(
            Graph::new(2, &[(0, 5)], vec![0.0; 2]),
            Err(Error::VertexOutOfRange { vertex: 5, .. })
        ));
        assert_eq!(Graph::new(0, &[], vec![]), Err(Error::EmptyGraph));
    }

    #[test]
    fn single_vertex_graph() {
        let g = Graph::new(1, &[], vec![5.0]).unwrap();
        let cs = CycleStructure::new(&g, None);
        assert_eq!(cs.betti(), 0);
        assert!(cs.tree_edges().is_empty());
    }

    #[test]
    fn triangle_default_tree() {
        let cs = CycleStructure::new(&triangle(), None);
        assert_eq!(cs.tree_edges(), &[(0, 1), (1, 2)]);
        assert_eq!(cs.surplus_edges(), &[(0, 2)]);
        assert_eq!(cs.betti(), 1);
        assert_eq!(cs.cycle(0), &[(0, 2), (2, 1), (1, 0)]);
    }

    #[test]
    fn k4_has_three_cycles() {
        let edges: Vec<_> = (0..4)
            .flat_map(|u| (u + 1..4).map(move |v| (u, v)))
            .collect();
        let g = Graph::new(4, &edges, vec![0.0; 4]).unwrap();
        let cs = CycleStructure::new(&g, None);
        assert_eq!(cs.betti(), 3);
        for (j, cycle) in cs.cycle_basis().iter().enumerate() {
            assert_eq!(cycle[0], cs.surplus_edges()[j]);
            // closed walk
            for w in cycle.windows(2) {
                assert_eq!(w[0].1, w[1].0);
            }
            assert_eq!(cycle.last().unwrap().1, cycle[0].0);
            let surplus_hits = cycle
                .iter()
                .filter(|&&(a, b)| cs.surplus_index_of((a, b)).is_some())
                .count();
            assert_eq!(surplus_hits, 1);
        }
    }

    #[test]
    fn tree_edge_is_not_surplus() {
        let g = triangle();
        let cs = CycleStructure::new(&g, None);
        assert_eq!(
            cs.require_surplus(&g, (1, 0)),
            Err(Error::RequestedEdgeNotSurplus { u: 0, v: 1 })
        );
        assert_eq!(cs.require_surplus(&g, (2, 0)), Ok(0));
    }

    #[test]
    fn seeded_trees_differ_but_keep_betti() {
        let edges: Vec<_> = (0..5)
            .flat_map(|u| (u + 1..5).map(move |v| (u, v)))
            .collect();
        let g = Graph::new(5, &edges, vec![0.0; 5]).unwrap();
        let trees: BTreeSet<Vec<Edge>> = (0..10)
            .map(|s| CycleStructure::new(&g, Some(s)).tree_edges().to_vec())
            .collect();
        assert!(trees.len() > 1);
        for s in 0..10 {
            assert_eq!(CycleStructure::new(&g, Some(s)).betti(), 6);
        }
    }
}
