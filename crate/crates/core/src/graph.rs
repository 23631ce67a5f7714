// Licensed under the Apache License, Version 2.0 (the "License"); you may
// not use this file except in compliance with the License. You may obtain
// a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS, WITHOUT
// WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied. See the
// License for the specific language governing permissions and limitations
// under the License.

//! Small undirected graphs shared by the partitioner, topology and selector.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

fn ordered(u: usize, v: usize) -> (usize, usize) {
    if u < v {
        (u, v)
    } else {
        (v, u)
    }
}

/// Unweighted undirected simple graph on vertices `0..order`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Graph {
    order: usize,
    edges: BTreeSet<(usize, usize)>,
}

impl Graph {
    pub fn new(order: usize) -> Self {
        Self {
            order,
            edges: BTreeSet::new(),
        }
    }

    /// Builds a graph from an edge list. Self-loops and out-of-range
    /// endpoints are rejected.
    pub fn from_edges(order: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Option<Self> {
        let mut g = Self::new(order);
        for (u, v) in edges {
            if !g.add_edge(u, v) {
                return None;
            }
        }
        Some(g)
    }

    /// Returns false if the edge is a self-loop or out of range.
    pub fn add_edge(&mut self, u: usize, v: usize) -> bool {
        if u == v || u >= self.order || v >= self.order {
            return false;
        }
        self.edges.insert(ordered(u, v));
        true
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Edges as `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.edges.contains(&ordered(u, v))
    }

    pub fn degree(&self, v: usize) -> usize {
        self.edges.iter().filter(|&&(a, b)| a == v || b == v).count()
    }

    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.order];
        for &(u, v) in &self.edges {
            adj[u].push(v);
            adj[v].push(u);
        }
        adj
    }

    /// Connected in the usual sense; the empty graph and single vertices count
    /// as connected.
    pub fn is_connected(&self) -> bool {
        if self.order <= 1 {
            return true;
        }
        let adj = self.adjacency();
        let mut seen = vec![false; self.order];
        let mut queue = VecDeque::from([0]);
        seen[0] = true;
        let mut count = 1;
        while let Some(u) = queue.pop_front() {
            for &w in &adj[u] {
                if !seen[w] {
                    seen[w] = true;
                    count += 1;
                    queue.push_back(w);
                }
            }
        }
        count == self.order
    }

    /// All-pairs shortest path lengths by BFS; `usize::MAX` marks unreachable.
    pub fn distance_matrix(&self) -> Vec<Vec<usize>> {
        let adj = self.adjacency();
        (0..self.order)
            .map(|src| {
                let mut dist = vec![usize::MAX; self.order];
                dist[src] = 0;
                let mut queue = VecDeque::from([src]);
                while let Some(u) = queue.pop_front() {
                    for &w in &adj[u] {
                        if dist[w] == usize::MAX {
                            dist[w] = dist[u] + 1;
                            queue.push_back(w);
                        }
                    }
                }
                dist
            })
            .collect()
    }

    /// Image of the graph under `perm`, where vertex `v` becomes `perm[v]`.
    pub fn relabel(&self, perm: &[usize]) -> Self {
        debug_assert_eq!(perm.len(), self.order);
        let mut g = Self::new(self.order);
        for &(u, v) in &self.edges {
            g.add_edge(perm[u], perm[v]);
        }
        g
    }

    /// Subgraph induced by `vertices`, relabeled to `0..vertices.len()` in
    /// the given order.
    pub fn induced(&self, vertices: &[usize]) -> Self {
        let mut g = Self::new(vertices.len());
        for (i, &a) in vertices.iter().enumerate() {
            for (j, &b) in vertices.iter().enumerate().skip(i + 1) {
                if self.has_edge(a, b) {
                    g.add_edge(i, j);
                }
            }
        }
        g
    }
}

/// Index of the unordered pair `(u, v)` in the length `k(k-1)/2` edge vector
/// of a graph of order `k` (row-major upper triangle).
pub fn pair_index(k: usize, u: usize, v: usize) -> usize {
    let (u, v) = ordered(u, v);
    u * (2 * k - u - 1) / 2 + (v - u - 1)
}

/// Undirected graph with positive integer edge weights (interaction counts).
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct WeightedGraph {
    order: usize,
    weights: BTreeMap<(usize, usize), u64>,
}

impl WeightedGraph {
    pub fn new(order: usize) -> Self {
        Self {
            order,
            weights: BTreeMap::new(),
        }
    }

    /// Adds `w` to the weight of `(u, v)`, creating the edge if absent.
    /// Zero weights and self-loops are ignored.
    pub fn add_weight(&mut self, u: usize, v: usize, w: u64) {
        if u == v || w == 0 {
            return;
        }
        debug_assert!(u < self.order && v < self.order);
        *self.weights.entry(ordered(u, v)).or_insert(0) += w;
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn weight(&self, u: usize, v: usize) -> u64 {
        self.weights.get(&ordered(u, v)).copied().unwrap_or(0)
    }

    pub fn edges(&self) -> impl Iterator<Item = ((usize, usize), u64)> + '_ {
        self.weights.iter().map(|(&e, &w)| (e, w))
    }

    pub fn edge_count(&self) -> usize {
        self.weights.len()
    }

    pub fn total_weight(&self) -> u64 {
        self.weights.values().sum()
    }

    /// Vertex sets restricted to vertices with at least one incident edge.
    pub fn active_vertices(&self) -> BTreeSet<usize> {
        self.weights.keys().flat_map(|&(u, v)| [u, v]).collect()
    }

    /// Forgets the weights.
    pub fn support(&self) -> Graph {
        let mut g = Graph::new(self.order);
        for &(u, v) in self.weights.keys() {
            g.add_edge(u, v);
        }
        g
    }

    /// Weight vector indexed by [`pair_index`].
    pub fn weight_vector(&self) -> Vec<f64> {
        let k = self.order;
        let mut v = vec![0.0; k * k.saturating_sub(1) / 2];
        for (&(a, b), &w) in &self.weights {
            v[pair_index(k, a, b)] = w as f64;
        }
        v
    }

    pub fn relabel(&self, perm: &[usize]) -> Self {
        let mut g = Self::new(self.order);
        for (&(u, v), &w) in &self.weights {
            g.add_weight(perm[u], perm[v], w);
        }
        g
    }

    pub fn scaled(&self, factor: u64) -> Self {
        let mut g = self.clone();
        for w in g.weights.values_mut() {
            *w *= factor;
        }
        g
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pair_index_is_a_bijection() {
        for k in 2..=6 {
            let mut seen = BTreeSet::new();
            for u in 0..k {
                for v in u + 1..k {
                    let i = pair_index(k, u, v);
                    assert!(i < k * (k - 1) / 2);
                    assert!(seen.insert(i));
                    assert_eq!(i, pair_index(k, v, u));
                }
            }
        }
    }

    #[test]
    fn connectivity_and_distances() {
        let path = Graph::from_edges(4, [(0, 1), (1, 2), (2, 3)]).unwrap();
        assert!(path.is_connected());
        assert_eq!(path.distance_matrix()[0][3], 3);
        let split = Graph::from_edges(4, [(0, 1), (2, 3)]).unwrap();
        assert!(!split.is_connected());
        assert!(Graph::from_edges(2, [(1, 1)]).is_none());
    }

    #[test]
    fn weights_accumulate() {
        let mut g = WeightedGraph::new(3);
        g.add_weight(0, 1, 2);
        g.add_weight(1, 0, 1);
        g.add_weight(2, 2, 5);
        assert_eq!(g.weight(0, 1), 3);
        assert_eq!(g.edge_count(), 1);
        assert_eq!(g.weight_vector(), vec![3.0, 0.0, 0.0]);
    }
}
