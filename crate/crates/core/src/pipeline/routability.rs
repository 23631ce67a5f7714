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

//! Routability of small interaction graphs on a device, measured as the mean
//! number of internal SWAPs per CNOT that SABRE inserts into a block shaped
//! like the graph.
//!
//! The measurement harness draws blocks of `block_cnots` CNOTs, each followed
//! by a `U3` on both of its qubits (the shape synthesis emits), with every
//! CNOT on an edge of the graph. Each block follows random context CNOTs on a
//! wider circuit; the SWAPs that land inside the block's span are counted.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::circuit::{Circuit, Gate};
use crate::error::{Result, TopasError};
use crate::graph::Graph;
use crate::mapper::{derive_seed, sabre_layout_with, sabre_route_with, SabreConfig};
use crate::topology::{build_topology, connected_classes, PhysicalTopology, Subtopology};

pub const TABLE_SCHEMA_VERSION: u32 = 1;

const SHIPPED: &str = include_str!("../../data/routability.json");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HarnessConfig {
    pub corpus_size: usize,
    pub block_cnots: usize,
    /// Random CNOTs placed before and after the block.
    pub context_cnots: usize,
    /// Width of the surrounding circuit (capped by the device).
    pub context_width: usize,
    pub seed: u64,
    pub sabre: SabreConfig,
}

impl Default for HarnessConfig {
    fn default() -> Self {
        Self {
            corpus_size: 200,
            block_cnots: 10,
            context_cnots: 8,
            context_width: 8,
            seed: 0,
            sabre: SabreConfig::default(),
        }
    }
}

/// Mean internal SWAPs per CNOT keyed by topology family, then by
/// `"<order>:<class name>"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoutabilityTable {
    pub schema_version: u32,
    pub harness: HarnessConfig,
    pub entries: BTreeMap<String, BTreeMap<String, f64>>,
}

impl Default for RoutabilityTable {
    fn default() -> Self {
        Self::empty(HarnessConfig::default())
    }
}

/// Device used to measure a family's table.
pub fn representative_device(family: &str) -> Option<PhysicalTopology> {
    let spec = match family {
        "linear" => "linear:16",
        "mesh" => "mesh:6x6",
        "falcon27" => "falcon27",
        _ => return None,
    };
    build_topology(spec).ok()
}

pub fn class_key(s: &Subtopology) -> String {
    format!("{}:{}", s.graph.order(), s.name)
}

impl RoutabilityTable {
    pub fn empty(harness: HarnessConfig) -> Self {
        Self {
            schema_version: TABLE_SCHEMA_VERSION,
            harness,
            entries: BTreeMap::new(),
        }
    }

    /// The table committed in `data/routability.json`.
    pub fn shipped() -> Self {
        Self::from_json(SHIPPED).expect("shipped routability table parses")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let t: Self = serde_json::from_str(text)?;
        if t.schema_version != TABLE_SCHEMA_VERSION {
            return Err(TopasError::Config(format!(
                "routability table schema {} (expected {TABLE_SCHEMA_VERSION})",
                t.schema_version
            )));
        }
        Ok(t)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("table serializes")
    }

    pub fn get(&self, family: &str, key: &str) -> Option<f64> {
        self.entries.get(family)?.get(key).copied()
    }

    pub fn insert(&mut self, family: &str, key: String, value: f64) {
        self.entries.entry(family.to_string()).or_default().insert(key, value);
    }

    /// Looks up `g` (connected, at least one edge), measuring on `phys` and
    /// caching when the entry is missing.
    pub fn lookup_or_measure(&mut self, g: &Graph, phys: &PhysicalTopology) -> f64 {
        let s = Subtopology::from_graph(g);
        let key = class_key(&s);
        let family = phys.family();
        if let Some(v) = self.get(&family, &key) {
            return v;
        }
        let v = measure(&s.graph, phys, &self.harness);
        self.insert(&family, key, v);
        v
    }

    /// Measures every connected class of order `2..=max_order` on `phys` and
    /// stores the results under its family.
    pub fn measure_topology(&mut self, phys: &PhysicalTopology, max_order: usize) {
        let family = phys.family();
        for order in 2..=max_order.min(phys.size()) {
            for s in connected_classes(order) {
                let v = measure(&s.graph, phys, &self.harness);
                self.insert(&family, class_key(&s), v);
            }
        }
    }
}

/// Connected components with at least one edge.
fn edge_components(g: &Graph) -> Vec<Vec<usize>> {
    let adj = g.adjacency();
    let mut seen = vec![false; g.order()];
    let mut out = Vec::new();
    for s in 0..g.order() {
        if seen[s] || adj[s].is_empty() {
            continue;
        }
        let mut comp = vec![s];
        seen[s] = true;
        let mut i = 0;
        while i < comp.len() {
            for &w in &adj[comp[i]] {
                if !seen[w] {
                    seen[w] = true;
                    comp.push(w);
                }
            }
            i += 1;
        }
        comp.sort_unstable();
        out.push(comp);
    }
    out
}

/// Routability of an interaction graph: the worst table value over its
/// components. A graph without edges scores 0.
pub fn routability_score(g: &Graph, phys: &PhysicalTopology, table: &mut RoutabilityTable) -> f64 {
    edge_components(g)
        .iter()
        .map(|comp| table.lookup_or_measure(&g.induced(comp), phys))
        .fold(0.0, f64::max)
}

fn random_u3(q: usize, rng: &mut ChaCha8Rng) -> Gate {
    Gate::u3(q, rng.random_range(0.0..PI), rng.random_range(-PI..PI), rng.random_range(-PI..PI))
}

/// One harness sample: random context CNOTs on `width` wires, then the block
/// (tagged as partition 0) on random wires.
pub fn harness_sample(g: &Graph, width: usize, cfg: &HarnessConfig, rng: &mut ChaCha8Rng) -> (Circuit, Circuit) {
    let edges: Vec<(usize, usize)> = g.edges().collect();
    let mut wires: Vec<usize> = (0..width).collect();
    wires.shuffle(rng);
    let place = &wires[..g.order()];
    let mut context = Circuit::new(width);
    for _ in 0..cfg.context_cnots {
        if width < 2 {
            break;
        }
        let a = rng.random_range(0..width);
        let b = (a + rng.random_range(1..width)) % width;
        context.push(Gate::cnot(a, b)).expect("in range");
    }
    let mut block = Circuit::new(width);
    for &q in place {
        block.push(random_u3(q, rng)).expect("in range");
    }
    for _ in 0..cfg.block_cnots {
        let (mut a, mut b) = edges[rng.random_range(0..edges.len())];
        if rng.random::<bool>() {
            std::mem::swap(&mut a, &mut b);
        }
        block.push(Gate::cnot(place[a], place[b])).expect("in range");
        block.push(random_u3(place[a], rng)).expect("in range");
        block.push(random_u3(place[b], rng)).expect("in range");
    }
    let n = block.len();
    block.mark_partition(0..n, 0);
    (context, block)
}

/// Mean internal SWAPs per CNOT of `g`-shaped blocks routed on `phys`.
///
/// Each sample is laid out as a whole. The context is routed first and the
/// block is then routed on its own from the placement the context left, so
/// the block's span holds only SWAPs serving the block.
pub fn measure(g: &Graph, phys: &PhysicalTopology, cfg: &HarnessConfig) -> f64 {
    if g.edge_count() == 0 || cfg.block_cnots == 0 || cfg.corpus_size == 0 {
        return 0.0;
    }
    let width = cfg.context_width.max(g.order()).min(phys.size());
    let mut total = 0.0;
    for sample in 0..cfg.corpus_size {
        let seed = derive_seed(cfg.seed, sample as u64);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (context, block) = harness_sample(g, width, cfg, &mut rng);
        let mut whole = context.clone();
        whole.append(&block).expect("same width");
        let placement = sabre_layout_with(&whole, phys, &cfg.sabre, seed).expect("width fits the device");
        let arrived = sabre_route_with(&context, phys, &placement, &cfg.sabre, seed)
            .expect("placement fits")
            .final_placement;
        let mc = sabre_route_with(&block, phys, &arrived, &cfg.sabre, seed).expect("placement fits");
        total += mc.internal_swaps.get(&0).copied().unwrap_or(0) as f64 / cfg.block_cnots as f64;
    }
    total / cfg.corpus_size as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topology::named_graph;

    fn small() -> HarnessConfig {
        HarnessConfig {
            corpus_size: 20,
            ..HarnessConfig::default()
        }
    }

    #[test]
    fn embedded_block_alone_routes_without_swaps() {
        let cfg = HarnessConfig {
            context_cnots: 0,
            ..small()
        };
        let mesh = build_topology("mesh:3x3").unwrap();
        for name in ["line", "star", "ring"] {
            let g = named_graph(name, 4).unwrap();
            assert_eq!(measure(&g, &mesh, &cfg), 0.0, "{name}");
        }
    }

    #[test]
    fn complete_is_harder_than_line_on_linear() {
        let lin = build_topology("linear:8").unwrap();
        let line = measure(&named_graph("line", 4).unwrap(), &lin, &small());
        let k4 = measure(&named_graph("complete", 4).unwrap(), &lin, &small());
        assert!(k4 > line, "{k4} vs {line}");
    }

    #[test]
    fn scores_are_deterministic_and_cached() {
        let lin = build_topology("linear:6").unwrap();
        let g = named_graph("star", 4).unwrap();
        let mut t = RoutabilityTable::empty(small());
        let a = routability_score(&g, &lin, &mut t);
        assert!(t.get("linear", "4:star").is_some());
        let mut fresh = RoutabilityTable::empty(small());
        assert_eq!(a, routability_score(&g, &lin, &mut fresh));
    }

    #[test]
    fn edgeless_scores_zero_and_components_take_the_max() {
        let lin = build_topology("linear:6").unwrap();
        let mut t = RoutabilityTable::empty(small());
        assert_eq!(routability_score(&Graph::new(3), &lin, &mut t), 0.0);
        t.insert("linear", "2:line".into(), 0.25);
        let split = Graph::from_edges(4, [(0, 1), (2, 3)]).unwrap();
        assert_eq!(routability_score(&split, &lin, &mut t), 0.25);
    }

    #[test]
    fn shipped_table_covers_candidate_classes() {
        let t = RoutabilityTable::shipped();
        for family in ["linear", "mesh", "falcon27"] {
            for key in ["2:line", "3:line", "3:ring", "4:line", "4:star", "4:ring", "4:complete"] {
                let v = t.get(family, key).unwrap_or_else(|| panic!("{family} {key}"));
                assert!(v >= 0.0);
            }
        }
    }
}
