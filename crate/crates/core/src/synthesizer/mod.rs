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

//! Bottom-up synthesis onto a coupling subtopology.
//!
//! A* over ansatz structures: the root is a bare `U3` layer, and each
//! expansion appends one `CNOT + 2 x U3` block on every subtopology edge.
//! Every node is instantiated numerically; the node cost is
//! `distance + block_weight * blocks`. Converged nodes are held back until no
//! cheaper node is left in the open list, so a shorter structure found later
//! still wins; the fewest-block converged node is returned.
//!
//! Prefix freezing (a simplified LEAP rule): once the best node in the current
//! segment improves the checkpoint distance by `leap_factor` and sits at least
//! `leap_gap` blocks past it, the frontier is dropped and the search restarts
//! from that node alone. With `freeze_prefix_params` the prefix parameters are
//! fixed as well and the segment fits `V P^dag` from an empty ansatz. If a
//! search with checkpoints runs out of budget, it is retried without them on
//! the remaining node budget and the better result is kept.
//!
//! With `prune` set, a converged result is then thinned: each block, last
//! first, is removed and the rest refit from the current parameters, and the
//! removal stands if the refit still reaches `epsilon`.

mod ansatz;
mod config;
mod instantiate;

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::circuit::Circuit;
use crate::error::{Result, TopasError};
use crate::graph::Graph;
use crate::numerics::{hs_distance, UnitaryMatrix};

pub(crate) use ansatz::AnsatzOp;
pub use ansatz::AnsatzCircuit;
pub use config::{Optimizer, OptimizerConfig, SynthesisConfig};
pub use instantiate::{instantiate, Instantiation};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SynthesisStatus {
    Converged,
    /// `max_blocks` or `max_nodes` reached first; the result is best-effort.
    BudgetExhausted,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SynthesisLog {
    pub nodes_instantiated: usize,
    pub nodes_expanded: usize,
    pub checkpoints: usize,
    /// Refits tried while pruning a converged result.
    pub prune_attempts: usize,
    pub pruned_blocks: usize,
    /// Distance of each node along the path that produced the output, root
    /// first (frozen segments included).
    pub path_distances: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthesisOutput {
    pub circuit: Circuit,
    /// Re-verified `hs_distance(circuit_unitary(circuit), target)`.
    pub distance: f64,
    pub cnots: usize,
    pub status: SynthesisStatus,
    pub log: SynthesisLog,
}

impl SynthesisOutput {
    pub fn converged(&self) -> bool {
        self.status == SynthesisStatus::Converged
    }
}

/// Deterministic per-node RNG derived from the config seed, the segment index
/// and the block structure.
pub(crate) fn node_rng(seed: u64, segment: usize, blocks: &[(usize, usize)]) -> ChaCha8Rng {
    const FNV_PRIME: u64 = 0x0100_0000_01b3;
    let mut h: u64 = 0xcbf2_9ce4_8422_2325 ^ seed;
    let mut mix = |x: u64| {
        for byte in x.to_le_bytes() {
            h ^= u64::from(byte);
            h = h.wrapping_mul(FNV_PRIME);
        }
    };
    mix(segment as u64);
    for &(c, t) in blocks {
        mix((c as u64) << 32 | t as u64);
    }
    mix(blocks.len() as u64);
    ChaCha8Rng::seed_from_u64(h)
}

struct Node {
    ansatz: AnsatzCircuit,
    params: Vec<f64>,
    distance: f64,
    cost: f64,
    seq: usize,
    /// Distances from the segment root to this node.
    trail: Vec<f64>,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Node {}

impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Node {
    // reversed: BinaryHeap is a max-heap and we pop the lowest cost first
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .cost
            .total_cmp(&self.cost)
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

/// Synthesizes `target` with every CNOT on an edge of `subtopology`.
pub fn synthesize(target: &UnitaryMatrix, subtopology: &Graph, cfg: &SynthesisConfig) -> Result<SynthesisOutput> {
    cfg.validate()?;
    let width = subtopology.order();
    if target.dim() != 1 << width {
        return Err(TopasError::DimensionMismatch {
            left: 1 << width,
            right: target.dim(),
        });
    }
    if !subtopology.is_connected() {
        return Err(TopasError::Config("synthesis subtopology must be connected".into()));
    }
    let edges: Vec<(usize, usize)> = subtopology.edges().collect();
    let mut node_cfg = cfg.clone();
    node_cfg.optimizer.restarts = cfg.node_restarts;
    let mut search = Search {
        cfg,
        node_cfg,
        edges,
        width,
        log: SynthesisLog::default(),
        seq: 0,
        leap: cfg.leap_factor.is_finite(),
    };
    let (mut circuit, mut status) = search.run(target)?;
    if status == SynthesisStatus::BudgetExhausted && search.leap && search.log.nodes_instantiated < cfg.max_nodes {
        // checkpoints can strand the search; retry without them on what is left
        let first = (hs_distance(&circuit.unitary()?, target)?, search.log.path_distances.clone());
        search.leap = false;
        let (retry, retry_status) = search.run(target)?;
        if retry_status == SynthesisStatus::Converged || hs_distance(&retry.unitary()?, target)? < first.0 {
            circuit = retry;
            status = retry_status;
        } else {
            search.log.path_distances = first.1;
        }
    }
    if status == SynthesisStatus::Converged && cfg.prune {
        circuit = prune(&circuit, target, cfg, &mut search.log);
    }
    let distance = hs_distance(&circuit.unitary()?, target)?;
    Ok(SynthesisOutput {
        cnots: circuit.cnot_count(),
        circuit,
        distance,
        status,
        log: search.log,
    })
}

/// Drops blocks, last first, from a converged circuit while the refit still
/// reaches `epsilon`.
fn prune(circuit: &Circuit, target: &UnitaryMatrix, cfg: &SynthesisConfig, log: &mut SynthesisLog) -> Circuit {
    let width = circuit.width();
    let mut ansatz = AnsatzCircuit::with_blocks(width, circuit.gates().iter().filter_map(|g| g.pair()));
    let mut params = match ansatz_params(&ansatz, circuit) {
        Some(p) => p,
        None => {
            // frozen segments leave extra one-qubit layers; refit on the plain ansatz
            let mut rng = node_rng(cfg.seed, usize::MAX, ansatz.blocks());
            let fit = instantiate::instantiate_from(&ansatz, target, cfg, &[vec![0.0; ansatz.num_params()]], &mut rng);
            log.prune_attempts += 1;
            if fit.distance > cfg.epsilon {
                return circuit.clone();
            }
            fit.params.into_inner()
        }
    };
    for i in (0..ansatz.block_count()).rev() {
        let mut blocks = ansatz.blocks().to_vec();
        blocks.remove(i);
        let shorter = AnsatzCircuit::with_blocks(width, blocks);
        let base = 3 * width + 6 * i;
        let warm: Vec<f64> = params[..base].iter().chain(&params[base + 6..]).copied().collect();
        let mut rng = node_rng(cfg.seed, usize::MAX, shorter.blocks());
        let fit = instantiate::instantiate_from(&shorter, target, cfg, &[warm], &mut rng);
        log.prune_attempts += 1;
        if fit.distance <= cfg.epsilon {
            ansatz = shorter;
            params = fit.params.into_inner();
            log.pruned_blocks += 1;
        }
    }
    ansatz.circuit(&params)
}

/// Parameters of `c` if it has exactly the layout of `ansatz`.
fn ansatz_params(ansatz: &AnsatzCircuit, c: &Circuit) -> Option<Vec<f64>> {
    let ops = ansatz.ops();
    if ops.len() != c.len() {
        return None;
    }
    let mut params = vec![0.0; ansatz.num_params()];
    for (op, g) in ops.iter().zip(c.gates()) {
        match (*op, *g) {
            (
                AnsatzOp::U3 { qubit, offset },
                crate::circuit::Gate::U3 {
                    qubit: q,
                    theta,
                    phi,
                    lambda,
                },
            ) if q == qubit => params[offset..offset + 3].copy_from_slice(&[theta, phi, lambda]),
            (AnsatzOp::Cnot { control, target }, crate::circuit::Gate::Cnot { control: c2, target: t2 })
                if (control, target) == (c2, t2) => {}
            _ => return None,
        }
    }
    Some(params)
}

struct Search<'a> {
    cfg: &'a SynthesisConfig,
    /// `cfg` with `node_restarts` as the optimizer's restart count.
    node_cfg: SynthesisConfig,
    edges: Vec<(usize, usize)>,
    width: usize,
    log: SynthesisLog,
    seq: usize,
    leap: bool,
}

impl Search<'_> {
    fn instantiate(
        &mut self,
        ansatz: AnsatzCircuit,
        target: &UnitaryMatrix,
        segment: usize,
        warm: Vec<f64>,
        frozen_blocks: usize,
        trail: &[f64],
    ) -> Node {
        let mut rng = node_rng(self.cfg.seed, segment, ansatz.blocks());
        let fit = instantiate::instantiate_from(&ansatz, target, &self.node_cfg, &[warm], &mut rng);
        self.log.nodes_instantiated += 1;
        self.seq += 1;
        let blocks = frozen_blocks + ansatz.block_count();
        let mut trail = trail.to_vec();
        trail.push(fit.distance);
        Node {
            cost: fit.distance + self.cfg.block_weight * blocks as f64,
            params: fit.params.into_inner(),
            distance: fit.distance,
            ansatz,
            seq: self.seq,
            trail,
        }
    }

    fn run(&mut self, target: &UnitaryMatrix) -> Result<(Circuit, SynthesisStatus)> {
        let cfg = self.cfg;
        let edges = self.edges.clone();
        let mut prefix = Circuit::new(self.width);
        let mut frozen_blocks = 0;
        let mut frozen_trail: Vec<f64> = Vec::new();
        let mut segment = 0;
        let mut seg_target = target.clone();

        let root = self.instantiate(AnsatzCircuit::new(self.width), &seg_target, segment, vec![0.0; 3 * self.width], 0, &[]);
        if root.distance <= cfg.epsilon {
            return self.finish(prefix, &root, &frozen_trail, SynthesisStatus::Converged);
        }
        let mut best = Best::of(&root, 0, &prefix, &frozen_trail);
        let mut checkpoint = (root.distance, 0usize);
        let mut open = BinaryHeap::from([root]);

        // converged nodes wait here until nothing cheaper is left to expand
        let mut goal: Option<Best> = None;
        while let Some(node) = open.pop() {
            if goal.as_ref().is_some_and(|g| g.cost(cfg) <= node.cost) {
                break;
            }
            if self.log.nodes_instantiated >= cfg.max_nodes {
                break;
            }
            if frozen_blocks + node.ansatz.block_count() >= cfg.max_blocks {
                continue;
            }
            self.log.nodes_expanded += 1;
            let mut children = Vec::with_capacity(edges.len());
            for &(c, t) in &edges {
                let mut ansatz = node.ansatz.clone();
                ansatz.push_block(c, t);
                // new block starts near identity on top of the parent's fit
                let mut rng = node_rng(cfg.seed ^ 0x5eed, segment, ansatz.blocks());
                let mut warm = node.params.clone();
                warm.extend((0..6).map(|_| rng.random_range(-1e-2..1e-2)));
                let child = self.instantiate(ansatz, &seg_target, segment, warm, frozen_blocks, &node.trail);
                if child.distance <= cfg.epsilon {
                    if goal.as_ref().is_none_or(|g| g.improved_by(&child, frozen_blocks)) {
                        goal = Some(Best::of(&child, frozen_blocks, &prefix, &frozen_trail));
                    }
                } else {
                    if best.improved_by(&child, frozen_blocks) {
                        best = Best::of(&child, frozen_blocks, &prefix, &frozen_trail);
                    }
                    children.push(child);
                }
                if self.log.nodes_instantiated >= cfg.max_nodes {
                    break;
                }
            }

            let leap = children
                .iter()
                .min_by(|a, b| a.distance.total_cmp(&b.distance))
                .filter(|n| {
                    let blocks = frozen_blocks + n.ansatz.block_count();
                    self.leap && n.distance * cfg.leap_factor <= checkpoint.0 && blocks >= checkpoint.1 + cfg.leap_gap
                })
                .map(|n| n.seq);
            let Some(seq) = leap else {
                open.extend(children);
                continue;
            };
            let frozen = children.into_iter().find(|n| n.seq == seq).expect("leap child present");
            self.log.checkpoints += 1;
            segment += 1;
            if !cfg.freeze_prefix_params {
                // keep the structure, drop the rest of the frontier
                checkpoint = (frozen.distance, frozen.ansatz.block_count());
                open.clear();
                open.push(frozen);
                continue;
            }
            prefix.append(&frozen.ansatz.circuit(&frozen.params))?;
            frozen_blocks += frozen.ansatz.block_count();
            frozen_trail.extend(frozen.trail.iter().copied());
            checkpoint = (frozen.distance, frozen_blocks);
            seg_target = target.matmul(&prefix.unitary()?.adjoint());
            let root = self.instantiate(
                AnsatzCircuit::new(self.width),
                &seg_target,
                segment,
                vec![0.0; 3 * self.width],
                frozen_blocks,
                &[],
            );
            if root.distance <= cfg.epsilon {
                return self.finish(prefix, &root, &frozen_trail, SynthesisStatus::Converged);
            }
            open.clear();
            open.push(root);
        }

        let (best, status) = match goal {
            Some(g) => (g, SynthesisStatus::Converged),
            None => (best, SynthesisStatus::BudgetExhausted),
        };
        let node = Node {
            ansatz: best.ansatz,
            params: best.params,
            distance: best.distance,
            cost: 0.0,
            seq: 0,
            trail: best.trail,
        };
        self.finish(best.prefix, &node, &best.frozen_trail, status)
    }

    fn finish(
        &mut self,
        mut prefix: Circuit,
        node: &Node,
        frozen_trail: &[f64],
        status: SynthesisStatus,
    ) -> Result<(Circuit, SynthesisStatus)> {
        prefix.append(&node.ansatz.circuit(&node.params))?;
        self.log.path_distances = frozen_trail.iter().chain(&node.trail).copied().collect();
        Ok((prefix, status))
    }
}

/// Lowest-distance node seen so far, with the frozen prefix it extends.
struct Best {
    distance: f64,
    blocks: usize,
    ansatz: AnsatzCircuit,
    params: Vec<f64>,
    trail: Vec<f64>,
    prefix: Circuit,
    frozen_trail: Vec<f64>,
}

impl Best {
    fn of(node: &Node, frozen_blocks: usize, prefix: &Circuit, frozen_trail: &[f64]) -> Self {
        Self {
            distance: node.distance,
            blocks: frozen_blocks + node.ansatz.block_count(),
            ansatz: node.ansatz.clone(),
            params: node.params.clone(),
            trail: node.trail.clone(),
            prefix: prefix.clone(),
            frozen_trail: frozen_trail.to_vec(),
        }
    }

    fn cost(&self, cfg: &SynthesisConfig) -> f64 {
        self.distance + cfg.block_weight * self.blocks as f64
    }

    fn improved_by(&self, node: &Node, frozen_blocks: usize) -> bool {
        let blocks = frozen_blocks + node.ansatz.block_count();
        node.distance < self.distance || (node.distance == self.distance && blocks < self.blocks)
    }
}
