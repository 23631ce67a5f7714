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

//! Physical coupling graphs and the synthesis subtopologies embedded in them.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Result, TopasError};
use crate::graph::{pair_index, Graph};

/// IBM Falcon 27-qubit heavy-hex coupling map (28 couplers, degree at most 3).
pub const FALCON27_EDGES: [(usize, usize); 28] = [
    (0, 1),
    (1, 2),
    (1, 4),
    (2, 3),
    (3, 5),
    (4, 7),
    (5, 8),
    (6, 7),
    (7, 10),
    (8, 9),
    (8, 11),
    (10, 12),
    (11, 14),
    (12, 13),
    (12, 15),
    (13, 14),
    (14, 16),
    (15, 18),
    (16, 19),
    (17, 18),
    (18, 21),
    (19, 20),
    (19, 22),
    (21, 23),
    (22, 25),
    (23, 24),
    (24, 25),
    (25, 26),
];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum TopologyKind {
    Linear(usize),
    Mesh(usize, usize),
    Falcon27,
    Custom(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhysicalTopology {
    pub kind: TopologyKind,
    pub graph: Graph,
}

impl fmt::Display for PhysicalTopology {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl PhysicalTopology {
    pub fn linear(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(TopasError::UnknownTopology("linear:0".into()));
        }
        let graph = Graph::from_edges(n, (1..n).map(|i| (i - 1, i))).expect("path edges in range");
        Ok(Self {
            kind: TopologyKind::Linear(n),
            graph,
        })
    }

    /// `rows x cols` grid; vertex `(r, c)` is `r * cols + c`.
    pub fn mesh(rows: usize, cols: usize) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(TopasError::UnknownTopology(format!("mesh:{rows}x{cols}")));
        }
        let mut g = Graph::new(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                let v = r * cols + c;
                if c + 1 < cols {
                    g.add_edge(v, v + 1);
                }
                if r + 1 < rows {
                    g.add_edge(v, v + cols);
                }
            }
        }
        Ok(Self {
            kind: TopologyKind::Mesh(rows, cols),
            graph: g,
        })
    }

    pub fn falcon27() -> Self {
        Self {
            kind: TopologyKind::Falcon27,
            graph: Graph::from_edges(27, FALCON27_EDGES).expect("falcon edges in range"),
        }
    }

    /// Parses an edge list with one `u v` pair per line; `#` starts a comment.
    pub fn from_edge_list(name: &str, text: &str) -> Result<Self> {
        let mut edges = Vec::new();
        for (no, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let nums: Vec<usize> = line
                .split_whitespace()
                .map(str::parse)
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| TopasError::UnknownTopology(format!("{name}: bad edge on line {}", no + 1)))?;
            match nums[..] {
                [u, v] if u != v => edges.push((u, v)),
                _ => return Err(TopasError::UnknownTopology(format!("{name}: bad edge on line {}", no + 1))),
            }
        }
        let order = edges.iter().map(|&(u, v)| u.max(v) + 1).max().unwrap_or(0);
        let graph = Graph::from_edges(order, edges).expect("validated edges");
        if order == 0 || !graph.is_connected() {
            return Err(TopasError::UnknownTopology(format!("{name}: graph is empty or disconnected")));
        }
        Ok(Self {
            kind: TopologyKind::Custom(name.to_string()),
            graph,
        })
    }

    pub fn name(&self) -> String {
        match &self.kind {
            TopologyKind::Linear(n) => format!("linear:{n}"),
            TopologyKind::Mesh(r, c) => format!("mesh:{r}x{c}"),
            TopologyKind::Falcon27 => "falcon27".into(),
            TopologyKind::Custom(name) => format!("custom:{name}"),
        }
    }

    /// Topology family used to key routability data (`linear`, `mesh`,
    /// `falcon27`, or the custom name).
    pub fn family(&self) -> String {
        match &self.kind {
            TopologyKind::Linear(_) => "linear".into(),
            TopologyKind::Mesh(..) => "mesh".into(),
            TopologyKind::Falcon27 => "falcon27".into(),
            TopologyKind::Custom(name) => format!("custom:{name}"),
        }
    }

    pub fn size(&self) -> usize {
        self.graph.order()
    }
}

/// Builds a device graph from `linear:N`, `mesh:RxC`, `falcon27`, or
/// `file:<path>` (edge list).
pub fn build_topology(spec: &str) -> Result<PhysicalTopology> {
    let unknown = || TopasError::UnknownTopology(spec.to_string());
    let spec = spec.trim();
    if spec == "falcon27" || spec == "falcon" {
        return Ok(PhysicalTopology::falcon27());
    }
    if let Some(n) = spec.strip_prefix("linear:") {
        return PhysicalTopology::linear(n.parse().map_err(|_| unknown())?);
    }
    if let Some(dims) = spec.strip_prefix("mesh:") {
        let (r, c) = dims.split_once(['x', 'X']).ok_or_else(unknown)?;
        return PhysicalTopology::mesh(r.parse().map_err(|_| unknown())?, c.parse().map_err(|_| unknown())?);
    }
    if let Some(path) = spec.strip_prefix("file:") {
        let text = std::fs::read_to_string(path)?;
        let name = Path::new(path)
            .file_stem()
            .map_or_else(|| path.to_string(), |s| s.to_string_lossy().into_owned());
        return PhysicalTopology::from_edge_list(&name, &text);
    }
    Err(unknown())
}

/// Adjacency bit code in [`pair_index`] order.
fn code(g: &Graph) -> u64 {
    g.edges().map(|(u, v)| 1u64 << pair_index(g.order(), u, v)).sum()
}

/// Calls `f` on every permutation of `0..n` in lexicographic order.
pub(crate) fn for_each_permutation(n: usize, mut f: impl FnMut(&[usize])) {
    let mut perm: Vec<usize> = (0..n).collect();
    loop {
        f(&perm);
        // next lexicographic permutation
        let Some(i) = (1..n).rev().find(|&i| perm[i - 1] < perm[i]) else {
            return;
        };
        let j = (i..n).rev().find(|&j| perm[j] > perm[i - 1]).expect("successor exists");
        perm.swap(i - 1, j);
        perm[i..].reverse();
    }
}

/// Canonical representative of the isomorphism class: the relabeling with the
/// smallest adjacency code. Exhaustive over permutations, intended for order
/// at most 6.
pub fn canonical_form(g: &Graph) -> Graph {
    let mut best: Option<(u64, Graph)> = None;
    for_each_permutation(g.order(), |perm| {
        let h = g.relabel(perm);
        let c = code(&h);
        if best.as_ref().is_none_or(|(bc, _)| c < *bc) {
            best = Some((c, h));
        }
    });
    best.map_or_else(|| g.clone(), |(_, h)| h)
}

pub fn is_isomorphic(a: &Graph, b: &Graph) -> bool {
    a.order() == b.order() && a.edge_count() == b.edge_count() && canonical_form(a) == canonical_form(b)
}

/// Named shapes in preference order for tie-breaking.
pub const SUBTOPOLOGY_NAMES: [&str; 6] = ["line", "star", "ring", "kite", "theta", "complete"];

/// Reference drawing of a named shape on `order` vertices, if the name
/// applies at that order.
pub fn named_graph(name: &str, order: usize) -> Option<Graph> {
    let edges: Vec<(usize, usize)> = match (name, order) {
        ("line", n) if n >= 2 => (1..n).map(|i| (i - 1, i)).collect(),
        ("star", n) if n >= 4 => (1..n).map(|i| (0, i)).collect(),
        ("ring", n) if n >= 3 => (1..n).map(|i| (i - 1, i)).chain([(0, n - 1)]).collect(),
        ("kite", 4) => vec![(0, 1), (1, 2), (0, 2), (2, 3)],
        ("theta", 4) => vec![(0, 1), (1, 2), (2, 3), (0, 3), (0, 2)],
        ("complete", n) if n >= 4 => (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect(),
        _ => return None,
    };
    Graph::from_edges(order, edges)
}

/// Name of the isomorphism class of `g`, or a code-based name when it is not
/// one of the named shapes.
pub fn subtopology_name(g: &Graph) -> String {
    for name in SUBTOPOLOGY_NAMES {
        if let Some(h) = named_graph(name, g.order()) {
            if is_isomorphic(g, &h) {
                return name.to_string();
            }
        }
    }
    format!("g{}_{}", g.order(), code(&canonical_form(g)))
}

/// Rank used for deterministic ordering: named shapes first in
/// [`SUBTOPOLOGY_NAMES`] order.
pub fn name_rank(name: &str) -> usize {
    SUBTOPOLOGY_NAMES
        .iter()
        .position(|n| *n == name)
        .unwrap_or(SUBTOPOLOGY_NAMES.len())
}

/// A candidate synthesis graph with its class name.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Subtopology {
    pub name: String,
    pub graph: Graph,
}

impl Subtopology {
    pub fn from_graph(g: &Graph) -> Self {
        let name = subtopology_name(g);
        let graph = named_graph(&name, g.order()).unwrap_or_else(|| canonical_form(g));
        Self { name, graph }
    }
}

/// All connected graphs of exactly `order` vertices, one per isomorphism
/// class, ordered by name rank then edge count then code.
pub fn connected_classes(order: usize) -> Vec<Subtopology> {
    let pairs: Vec<(usize, usize)> = (0..order).flat_map(|u| (u + 1..order).map(move |v| (u, v))).collect();
    let mut classes: BTreeMap<u64, Graph> = BTreeMap::new();
    for mask in 0u64..(1 << pairs.len()) {
        let edges = pairs.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, &e)| e);
        let g = Graph::from_edges(order, edges).expect("pairs in range");
        if order > 1 && !g.is_connected() {
            continue;
        }
        let c = canonical_form(&g);
        classes.entry(code(&c)).or_insert(c);
    }
    let mut out: Vec<Subtopology> = classes.values().map(Subtopology::from_graph).collect();
    out.sort_by(|a, b| {
        (name_rank(&a.name), a.graph.edge_count(), code(&canonical_form(&a.graph)))
            .cmp(&(name_rank(&b.name), b.graph.edge_count(), code(&canonical_form(&b.graph))))
    });
    out
}

/// Connected subtopologies of exactly `k` vertices that occur as subgraphs of
/// the device.
pub fn embedded_subtopologies(phys: &PhysicalTopology, k: usize) -> Vec<Subtopology> {
    if k == 0 || k > phys.size() {
        return Vec::new();
    }
    connected_classes(k)
        .into_iter()
        .filter(|s| embeds(&s.graph, phys))
        .collect()
}

/// Whether an injective vertex map carries every edge of `g` onto an edge of
/// the device (subgraph monomorphism, backtracking).
pub fn embeds(g: &Graph, phys: &PhysicalTopology) -> bool {
    embedding(g, &phys.graph).is_some()
}

/// One embedding of `g` into `host` as `map[v] = host vertex`.
pub fn embedding(g: &Graph, host: &Graph) -> Option<Vec<usize>> {
    let n = g.order();
    if n > host.order() {
        return None;
    }
    if n == 0 {
        return Some(Vec::new());
    }
    let gadj = g.adjacency();
    let hadj = host.adjacency();
    // place vertices in BFS-ish order so that each has a placed neighbor early
    let mut order: Vec<usize> = Vec::with_capacity(n);
    let mut placed = vec![false; n];
    while order.len() < n {
        let start = (0..n)
            .filter(|&v| !placed[v])
            .max_by_key(|&v| (gadj[v].len(), std::cmp::Reverse(v)))
            .expect("unplaced vertex");
        placed[start] = true;
        order.push(start);
        let mut i = order.len() - 1;
        while i < order.len() {
            let v = order[i];
            for &w in &gadj[v] {
                if !placed[w] {
                    placed[w] = true;
                    order.push(w);
                }
            }
            i += 1;
        }
    }
    let mut map = vec![usize::MAX; n];
    let mut used = vec![false; host.order()];
    fn extend(
        idx: usize,
        order: &[usize],
        gadj: &[Vec<usize>],
        hadj: &[Vec<usize>],
        host: &Graph,
        map: &mut [usize],
        used: &mut [bool],
    ) -> bool {
        if idx == order.len() {
            return true;
        }
        let v = order[idx];
        for h in 0..host.order() {
            if used[h] || hadj[h].len() < gadj[v].len() {
                continue;
            }
            let ok = gadj[v]
                .iter()
                .all(|&w| map[w] == usize::MAX || host.has_edge(h, map[w]));
            if !ok {
                continue;
            }
            map[v] = h;
            used[h] = true;
            if extend(idx + 1, order, gadj, hadj, host, map, used) {
                return true;
            }
            map[v] = usize::MAX;
            used[h] = false;
        }
        false
    }
    extend(0, &order, &gadj, &hadj, host, &mut map, &mut used).then_some(map)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names(v: &[Subtopology]) -> Vec<&str> {
        v.iter().map(|s| s.name.as_str()).collect()
    }

    #[test]
    fn builds_standard_topologies() {
        let l = build_topology("linear:4").unwrap();
        assert_eq!(l.graph.edges().collect::<Vec<_>>(), vec![(0, 1), (1, 2), (2, 3)]);
        let m = build_topology("mesh:2x2").unwrap();
        assert_eq!(m.graph.edge_count(), 4);
        assert!((0..4).all(|v| m.graph.degree(v) == 2));
        let f = build_topology("falcon27").unwrap();
        assert_eq!(f.size(), 27);
        assert_eq!(f.graph.edge_count(), 28);
        assert_eq!((0..27).map(|v| f.graph.degree(v)).max(), Some(3));
        assert!(f.graph.is_connected());
        assert!(build_topology("torus:3").is_err());
        assert!(build_topology("mesh:3").is_err());
        assert!(build_topology("linear:x").is_err());
    }

    #[test]
    fn edge_list_files() {
        let t = PhysicalTopology::from_edge_list("tri", "# triangle\n0 1\n1 2\n\n2 0 # closing\n").unwrap();
        assert_eq!(t.size(), 3);
        assert_eq!(t.graph.edge_count(), 3);
        assert!(PhysicalTopology::from_edge_list("bad", "0 1 2\n").is_err());
        assert!(PhysicalTopology::from_edge_list("bad", "0 0\n").is_err());
        assert!(PhysicalTopology::from_edge_list("split", "0 1\n2 3\n").is_err());
    }

    #[test]
    fn six_connected_classes_on_four_vertices() {
        let classes = connected_classes(4);
        assert_eq!(names(&classes), SUBTOPOLOGY_NAMES.to_vec());
        assert_eq!(connected_classes(3).len(), 2);
        assert_eq!(connected_classes(2).len(), 1);
    }

    #[test]
    fn canonical_form_identifies_isomorphs() {
        // brute-force isomorphism oracle over all relabelings
        let brute = |a: &Graph, b: &Graph| {
            let mut found = false;
            for_each_permutation(a.order(), |p| found |= a.relabel(p) == *b);
            found
        };
        let pairs: Vec<(usize, usize)> = (0..4).flat_map(|u| (u + 1..4).map(move |v| (u, v))).collect();
        let graphs: Vec<Graph> = (0u32..64)
            .map(|m| Graph::from_edges(4, pairs.iter().enumerate().filter(|(i, _)| m >> i & 1 == 1).map(|(_, &e)| e)).unwrap())
            .collect();
        for a in &graphs {
            for b in &graphs {
                assert_eq!(canonical_form(a) == canonical_form(b), brute(a, b));
            }
        }
    }

    #[test]
    fn embedding_examples() {
        let ring = named_graph("ring", 4).unwrap();
        assert!(embeds(&ring, &build_topology("mesh:3x3").unwrap()));
        let star = named_graph("star", 4).unwrap();
        assert!(!embeds(&star, &build_topology("linear:10").unwrap()));
        let k4 = named_graph("complete", 4).unwrap();
        assert!(!embeds(&k4, &build_topology("mesh:5x5").unwrap()));
        let map = embedding(&ring, &build_topology("mesh:3x3").unwrap().graph).unwrap();
        for (u, v) in ring.edges() {
            assert!(build_topology("mesh:3x3").unwrap().graph.has_edge(map[u], map[v]));
        }
    }

    #[test]
    fn embedded_candidate_sets() {
        let mesh = build_topology("mesh:6x6").unwrap();
        assert_eq!(names(&embedded_subtopologies(&mesh, 4)), ["line", "star", "ring"]);
        let falcon = build_topology("falcon27").unwrap();
        assert_eq!(names(&embedded_subtopologies(&falcon, 4)), ["line", "star"]);
        let lin = build_topology("linear:8").unwrap();
        assert_eq!(names(&embedded_subtopologies(&lin, 4)), ["line"]);
        assert_eq!(names(&embedded_subtopologies(&mesh, 3)), ["line"]);
        assert_eq!(names(&embedded_subtopologies(&mesh, 2)), ["line"]);
    }

    #[test]
    fn permutation_enumeration_is_lexicographic() {
        let mut seen = Vec::new();
        for_each_permutation(3, |p| seen.push(p.to_vec()));
        assert_eq!(seen.len(), 6);
        assert_eq!(seen[0], vec![0, 1, 2]);
        assert_eq!(seen[5], vec![2, 1, 0]);
        let mut sorted = seen.clone();
        sorted.sort();
        assert_eq!(seen, sorted);
    }
}
