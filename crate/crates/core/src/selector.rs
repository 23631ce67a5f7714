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

//! Subtopology selection by biased kernel similarity.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Result, TopasError};
use crate::graph::{Graph, WeightedGraph};
use crate::partitioner::{Partition, PartitionedCircuit};
use crate::topology::{for_each_permutation, name_rank, named_graph, PhysicalTopology, Subtopology, TopologyKind};

/// Multiplier per subtopology name; names absent from the table get 1.0.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct BiasTable(pub BTreeMap<String, f64>);

impl BiasTable {
    /// Mesh weights of line 1.0, star 1.0, ring 0.8; neutral elsewhere.
    pub fn default_for(phys: &PhysicalTopology) -> Self {
        let mut t = BTreeMap::new();
        if matches!(phys.kind, TopologyKind::Mesh(..)) {
            t.insert("line".to_string(), 1.0);
            t.insert("star".to_string(), 1.0);
            t.insert("ring".to_string(), 0.8);
        }
        Self(t)
    }

    pub fn get(&self, name: &str) -> f64 {
        self.0.get(name).copied().unwrap_or(1.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubtopologyAssignment {
    pub partition: usize,
    pub subtopology: Subtopology,
    /// Vertex `v` of the subtopology becomes local qubit `permutation[v]`.
    pub permutation: Vec<usize>,
    pub score: f64,
    pub degenerate: bool,
}

impl SubtopologyAssignment {
    /// The subtopology on the partition's local qubits.
    pub fn permuted_graph(&self) -> Graph {
        self.subtopology.graph.relabel(&self.permutation)
    }
}

/// Normalized inner product `v_P . v_L / sum(v_L)`.
pub fn similarity(v_p: &[f64], v_l: &[f64]) -> Result<f64> {
    if v_p.len() != v_l.len() {
        return Err(TopasError::DimensionMismatch {
            left: v_p.len(),
            right: v_l.len(),
        });
    }
    let total: f64 = v_l.iter().sum();
    if total <= 0.0 {
        return Err(TopasError::InvalidGate("similarity of an edgeless graph".into()));
    }
    Ok(v_p.iter().zip(v_l).map(|(p, l)| p * l).sum::<f64>() / total)
}

/// Indicator vector of `g`'s edges.
pub fn indicator(g: &Graph) -> Vec<f64> {
    let k = g.order();
    let mut v = vec![0.0; k * k.saturating_sub(1) / 2];
    for (a, b) in g.edges() {
        v[crate::graph::pair_index(k, a, b)] = 1.0;
    }
    v
}

/// Interaction counts of `p` plus those of its immediate neighbors on pairs
/// of qubits both shared with `p`, on `p`'s local indices.
pub fn neighbor_aware_graph(p: &Partition, pc: &PartitionedCircuit) -> Result<WeightedGraph> {
    let mut g = p.subcircuit.connectivity_graph();
    let n = pc.neighbor_partitions(p.id)?;
    for id in n.preceding.iter().chain(&n.succeeding) {
        let other = pc.partition(*id)?;
        for ((a, b), w) in other.subcircuit.connectivity_graph().edges() {
            let (ga, gb) = (other.local_to_global(a), other.local_to_global(b));
            if let (Some(la), Some(lb)) = (p.global_to_local(ga), p.global_to_local(gb)) {
                g.add_weight(la, lb, w);
            }
        }
    }
    Ok(g)
}

/// Exhaustive argmax of `bias x similarity` over candidates and relabelings.
///
/// Candidates must all have order `g_l.order()`. Ties prefer fewer edges,
/// then name order, then the lexicographically smallest permutation.
pub fn select_subtopology(
    partition: usize,
    g_l: &WeightedGraph,
    candidates: &[Subtopology],
    bias: &BiasTable,
) -> Result<SubtopologyAssignment> {
    let k = g_l.order();
    if candidates.is_empty() {
        return Err(TopasError::Config(format!("no candidate subtopologies for a {k}-qubit block")));
    }
    if let Some(bad) = candidates.iter().find(|s| s.graph.order() != k) {
        return Err(TopasError::DimensionMismatch {
            left: bad.graph.order(),
            right: k,
        });
    }
    if g_l.edge_count() == 0 {
        let subtopology = candidates
            .iter()
            .find(|s| s.name == "line")
            .cloned()
            .or_else(|| named_graph("line", k).map(|g| Subtopology::from_graph(&g)))
            .unwrap_or_else(|| candidates[0].clone());
        return Ok(SubtopologyAssignment {
            partition,
            subtopology,
            permutation: (0..k).collect(),
            score: 0.0,
            degenerate: true,
        });
    }
    let v_l = g_l.weight_vector();
    let mut best: Option<(f64, usize, usize, Vec<usize>, usize)> = None;
    for (ci, cand) in candidates.iter().enumerate() {
        let b = bias.get(&cand.name);
        let key_edges = cand.graph.edge_count();
        let key_name = name_rank(&cand.name);
        for_each_permutation(k, |perm| {
            let score = b * similarity(&indicator(&cand.graph.relabel(perm)), &v_l).expect("lengths agree");
            let better = match &best {
                None => true,
                Some((bs, be, bn, bp, bi)) => {
                    score > *bs
                        || (score == *bs
                            && (key_edges, key_name, perm, ci) < (*be, *bn, bp.as_slice(), *bi))
                }
            };
            if better {
                best = Some((score, key_edges, key_name, perm.to_vec(), ci));
            }
        });
    }
    let (score, _, _, permutation, ci) = best.expect("nonempty search");
    Ok(SubtopologyAssignment {
        partition,
        subtopology: candidates[ci].clone(),
        permutation,
        score,
        degenerate: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{Circuit, Gate};
    use crate::partitioner::scan_partition;
    use crate::topology::{build_topology, embedded_subtopologies};

    fn wg(k: usize, edges: &[((usize, usize), u64)]) -> WeightedGraph {
        let mut g = WeightedGraph::new(k);
        for &((a, b), w) in edges {
            g.add_weight(a, b, w);
        }
        g
    }

    fn mesh_setup() -> (Vec<Subtopology>, BiasTable) {
        let mesh = build_topology("mesh:6x6").unwrap();
        (embedded_subtopologies(&mesh, 4), BiasTable::default_for(&mesh))
    }

    #[test]
    fn similarity_by_hand() {
        let v_l = wg(4, &[((0, 1), 3), ((1, 2), 2), ((2, 3), 1)]).weight_vector();
        let line = indicator(&named_graph("line", 4).unwrap());
        let star = indicator(&named_graph("star", 4).unwrap());
        assert_eq!(similarity(&line, &v_l).unwrap(), 1.0);
        assert_eq!(similarity(&star, &v_l).unwrap(), 0.5);
        assert_eq!(similarity(&[0.0; 6], &v_l).unwrap(), 0.0);
        assert!(similarity(&[0.0; 6], &[0.0; 6]).is_err());
        assert!(similarity(&[0.0; 3], &v_l).is_err());
    }

    #[test]
    fn line_shaped_block_picks_line() {
        let (cands, bias) = mesh_setup();
        let a = select_subtopology(0, &wg(4, &[((0, 1), 3), ((1, 2), 2), ((2, 3), 1)]), &cands, &bias).unwrap();
        assert_eq!(a.subtopology.name, "line");
        assert_eq!(a.score, 1.0);
        assert_eq!(a.permutation, vec![0, 1, 2, 3]);
    }

    #[test]
    fn star_shaped_block_picks_star_with_hub_at_zero() {
        let (cands, bias) = mesh_setup();
        let a = select_subtopology(0, &wg(4, &[((0, 1), 1), ((0, 2), 1), ((0, 3), 1)]), &cands, &bias).unwrap();
        assert_eq!(a.subtopology.name, "star");
        assert_eq!(a.score, 1.0);
        assert_eq!(a.permuted_graph().degree(0), 3);
    }

    #[test]
    fn single_edge_tie_goes_to_line() {
        let (cands, bias) = mesh_setup();
        let a = select_subtopology(0, &wg(4, &[((0, 1), 5)]), &cands, &bias).unwrap();
        assert_eq!(a.subtopology.name, "line");
        assert_eq!(a.score, 1.0);
    }

    #[test]
    fn edgeless_is_degenerate() {
        let (cands, bias) = mesh_setup();
        let a = select_subtopology(3, &WeightedGraph::new(4), &cands, &bias).unwrap();
        assert!(a.degenerate);
        assert_eq!(a.subtopology.name, "line");
        assert_eq!(a.permutation, vec![0, 1, 2, 3]);
        assert!(select_subtopology(0, &WeightedGraph::new(4), &[], &bias).is_err());
    }

    fn block(id: usize, qubits: &[usize], gates: &[Gate]) -> Partition {
        Partition {
            id,
            qubits: qubits.to_vec(),
            subcircuit: Circuit::from_gates(qubits.len(), gates.iter().cloned()).unwrap(),
            gate_indices: Vec::new(),
        }
    }

    fn pc(parts: Vec<Partition>) -> PartitionedCircuit {
        PartitionedCircuit {
            width: 4,
            partitions: parts,
            source: Circuit::new(4),
        }
    }

    #[test]
    fn lone_partition_keeps_its_own_counts() {
        let c = Circuit::from_gates(3, [Gate::cnot(0, 1), Gate::cnot(0, 1), Gate::cnot(1, 2)]).unwrap();
        let pc = scan_partition(&c, 3).unwrap();
        assert_eq!(pc.len(), 1);
        let g = neighbor_aware_graph(&pc.partitions[0], &pc).unwrap();
        assert_eq!(g, pc.partitions[0].subcircuit.connectivity_graph());
    }

    #[test]
    fn shared_pair_adds_neighbor_weight() {
        let pc = pc(vec![
            block(0, &[0, 1], &[Gate::cnot(0, 1), Gate::cnot(0, 1)]),
            block(1, &[0, 1, 2], &[Gate::cnot(0, 1), Gate::cnot(1, 2)]),
        ]);
        let g = neighbor_aware_graph(&pc.partitions[0], &pc).unwrap();
        assert_eq!(g.weight(0, 1), 3);
        assert_eq!(g.edge_count(), 1);
    }

    #[test]
    fn half_shared_pair_adds_nothing() {
        let pc = pc(vec![
            block(0, &[0, 1], &[Gate::cnot(0, 1)]),
            block(1, &[1, 2], &[Gate::cnot(0, 1)]),
        ]);
        let g = neighbor_aware_graph(&pc.partitions[0], &pc).unwrap();
        assert_eq!(g.weight(0, 1), 1);
        assert_eq!(g.edge_count(), 1);
    }
}
