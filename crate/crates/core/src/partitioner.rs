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

//! Scan partitioning into blocks of at most `k` qubits.
//!
//! The scan repeatedly scores every connected qubit group of the remaining
//! interaction graph by how many unassigned gates it can absorb from the time
//! frontier and commits the best one. Each commit takes a prefix of the
//! remaining gates on every qubit, so concatenating partitions in slot order
//! preserves per-qubit gate order.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::circuit::{Circuit, Gate};
use crate::error::{Result, TopasError};
use crate::graph::WeightedGraph;

/// A time-contiguous block over a few qubits, stored on local indices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Partition {
    pub id: usize,
    /// Sorted global qubits; local qubit `i` is `qubits[i]`.
    pub qubits: Vec<usize>,
    pub subcircuit: Circuit,
    /// Indices of the gates in the partitioned circuit.
    pub gate_indices: Vec<usize>,
}

impl Partition {
    pub fn width(&self) -> usize {
        self.qubits.len()
    }

    pub fn local_to_global(&self, local: usize) -> usize {
        self.qubits[local]
    }

    pub fn global_to_local(&self, global: usize) -> Option<usize> {
        self.qubits.binary_search(&global).ok()
    }

    pub fn cnot_count(&self) -> usize {
        self.subcircuit.cnot_count()
    }

    /// Blocks without two-qubit gates skip selection and synthesis.
    pub fn is_passthrough(&self) -> bool {
        !self.subcircuit.gates().iter().any(Gate::is_two_qubit)
    }

    /// `subcircuit` lifted back onto global indices of a `width`-qubit circuit.
    pub fn global_circuit(&self, block: &Circuit, width: usize) -> Result<Circuit> {
        block.remapped(width, |q| self.qubits[q])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartitionedCircuit {
    pub width: usize,
    pub partitions: Vec<Partition>,
    pub source: Circuit,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Neighbors {
    pub preceding: BTreeSet<usize>,
    pub succeeding: BTreeSet<usize>,
}

/// Debug view of one partition.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartitionSummary {
    pub id: usize,
    pub qubits: Vec<usize>,
    pub gates: usize,
    pub cnots: usize,
    pub preceding: Vec<usize>,
    pub succeeding: Vec<usize>,
}

impl PartitionedCircuit {
    pub fn len(&self) -> usize {
        self.partitions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.partitions.is_empty()
    }

    pub fn partition(&self, id: usize) -> Result<&Partition> {
        self.partitions.get(id).ok_or(TopasError::InvalidPartition(id))
    }

    /// For each qubit of partition `id`, the nearest earlier and later
    /// partitions touching it.
    pub fn neighbor_partitions(&self, id: usize) -> Result<Neighbors> {
        let p = self.partition(id)?;
        let mut out = Neighbors::default();
        for &q in &p.qubits {
            if let Some(prev) = self.partitions[..id].iter().rev().find(|o| o.global_to_local(q).is_some()) {
                out.preceding.insert(prev.id);
            }
            if let Some(next) = self.partitions[id + 1..].iter().find(|o| o.global_to_local(q).is_some()) {
                out.succeeding.insert(next.id);
            }
        }
        Ok(out)
    }

    /// Concatenation of the partitions in slot order, with markers.
    pub fn reassemble(&self) -> Circuit {
        let blocks: Vec<&Circuit> = self.partitions.iter().map(|p| &p.subcircuit).collect();
        self.reassemble_with(&blocks).expect("partition subcircuits are in range")
    }

    /// Reassembles using `blocks[i]` (local indices) in place of partition
    /// `i`'s gates.
    pub fn reassemble_with(&self, blocks: &[&Circuit]) -> Result<Circuit> {
        if blocks.len() != self.partitions.len() {
            return Err(TopasError::InvalidPartition(blocks.len()));
        }
        let mut out = Circuit::new(self.width);
        for (p, block) in self.partitions.iter().zip(blocks) {
            if block.width() != p.width() {
                return Err(TopasError::InvalidPartition(p.id));
            }
            let start = out.len();
            out.append(&p.global_circuit(block, self.width)?)?;
            let end = out.len();
            out.mark_partition(start..end, p.id);
        }
        Ok(out)
    }

    pub fn summaries(&self) -> Vec<PartitionSummary> {
        self.partitions
            .iter()
            .map(|p| {
                let n = self.neighbor_partitions(p.id).expect("own id");
                PartitionSummary {
                    id: p.id,
                    qubits: p.qubits.clone(),
                    gates: p.subcircuit.len(),
                    cnots: p.cnot_count(),
                    preceding: n.preceding.into_iter().collect(),
                    succeeding: n.succeeding.into_iter().collect(),
                }
            })
            .collect()
    }

    pub fn debug_json(&self) -> String {
        serde_json::to_string_pretty(&self.summaries()).expect("summaries serialize")
    }
}

/// All vertex sets of size `2..=k` inducing a connected subgraph of `g`.
pub fn enumerate_groups(g: &WeightedGraph, k: usize) -> BTreeSet<Vec<usize>> {
    let adj = g.support().adjacency();
    let mut all = BTreeSet::new();
    let mut level: BTreeSet<Vec<usize>> = g.edges().map(|((u, v), _)| vec![u, v]).collect();
    for _ in 2..=k {
        if level.is_empty() {
            break;
        }
        let mut next = BTreeSet::new();
        for set in &level {
            for &v in set {
                for &w in &adj[v] {
                    if let Err(pos) = set.binary_search(&w) {
                        let mut grown = set.clone();
                        grown.insert(pos, w);
                        next.insert(grown);
                    }
                }
            }
        }
        all.extend(std::mem::replace(&mut level, next));
    }
    all
}

/// Gates absorbed by one candidate group.
struct Collection {
    qubits: Vec<usize>,
    gates: Vec<usize>,
}

fn collect(gates: &[Gate], remaining: &[usize], group: &[usize], width: usize) -> Option<Collection> {
    let mut in_group = vec![false; width];
    for &q in group {
        in_group[q] = true;
    }
    let mut cut = vec![false; width];
    let mut live = group.len();
    let mut taken = Vec::new();
    for &i in remaining {
        let g = &gates[i];
        if !g.qubits().any(|q| in_group[q]) {
            continue;
        }
        if g.qubits().all(|q| in_group[q] && !cut[q]) {
            taken.push(i);
            continue;
        }
        for q in g.qubits().filter(|&q| in_group[q]) {
            if !cut[q] {
                cut[q] = true;
                live -= 1;
            }
        }
        if live == 0 {
            break;
        }
    }
    // Qubits that only picked up one-qubit gates stay out of the block.
    let mut entangled = vec![false; width];
    for &i in &taken {
        if let Some((a, b)) = gates[i].pair() {
            entangled[a] = true;
            entangled[b] = true;
        }
    }
    let qubits: Vec<usize> = group.iter().copied().filter(|&q| entangled[q]).collect();
    if qubits.is_empty() {
        return None;
    }
    taken.retain(|&i| gates[i].qubits().all(|q| entangled[q]));
    let mut interaction = WeightedGraph::new(width);
    for &i in &taken {
        if let Some((a, b)) = gates[i].pair() {
            interaction.add_weight(a, b, 1);
        }
    }
    // A block whose interactions fall apart is covered by its components.
    let local = interaction.support().induced(&qubits);
    local.is_connected().then_some(Collection { qubits, gates: taken })
}

/// Greedy scan partitioning of a SWAP-free circuit into blocks of at most
/// `k` qubits. One-qubit gates left over on qubits that no later block claims
/// become width-1 pass-through partitions.
pub fn scan_partition(c: &Circuit, k: usize) -> Result<PartitionedCircuit> {
    if k < 2 {
        return Err(TopasError::Config(format!("block size must be at least 2, got {k}")));
    }
    if c.gates().iter().any(|g| matches!(g, Gate::Swap { .. })) {
        return Err(TopasError::InvalidGate("scan_partition expects SWAPs to be decomposed".into()));
    }
    let gates = c.gates();
    let width = c.width();
    let mut remaining: Vec<usize> = (0..gates.len()).collect();
    let mut partitions = Vec::new();
    loop {
        let mut frontier = WeightedGraph::new(width);
        for &i in &remaining {
            if let Some((a, b)) = gates[i].pair() {
                frontier.add_weight(a, b, 1);
            }
        }
        if frontier.edge_count() == 0 {
            break;
        }
        let mut best: Option<Collection> = None;
        for group in enumerate_groups(&frontier, k) {
            let Some(cand) = collect(gates, &remaining, &group, width) else {
                continue;
            };
            let better = match &best {
                None => true,
                Some(b) => {
                    let score = cand.gates.len();
                    let best_score = b.gates.len();
                    score > best_score
                        || (score == best_score
                            && (cand.gates[0], &cand.qubits) < (b.gates[0], &b.qubits))
                }
            };
            if better {
                best = Some(cand);
            }
        }
        let chosen = best.expect("the earliest remaining two-qubit gate is always collectible");
        partitions.push(make_partition(partitions.len(), c, chosen.qubits, chosen.gates.clone())?);
        let taken: BTreeSet<usize> = chosen.gates.into_iter().collect();
        remaining.retain(|i| !taken.contains(i));
    }
    let mut leftovers: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for &i in &remaining {
        leftovers.entry(gates[i].operands().0).or_default().push(i);
    }
    for (q, idx) in leftovers {
        partitions.push(make_partition(partitions.len(), c, vec![q], idx)?);
    }
    Ok(PartitionedCircuit {
        width,
        partitions,
        source: c.clone(),
    })
}

fn make_partition(id: usize, c: &Circuit, mut qubits: Vec<usize>, gate_indices: Vec<usize>) -> Result<Partition> {
    qubits.sort_unstable();
    let local = |q: usize| qubits.binary_search(&q).expect("gate inside partition");
    let sub = Circuit::from_gates(
        qubits.len(),
        gate_indices.iter().map(|&i| c.gates()[i].remap(local)),
    )?;
    Ok(Partition {
        id,
        qubits: qubits.clone(),
        subcircuit: sub,
        gate_indices,
    })
}
