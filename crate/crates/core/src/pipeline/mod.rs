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

//! End-to-end compilation.
//!
//! `topas` mode: decompose SWAPs, scan-partition, and for every block pick a
//! subtopology from the device's embedded candidates using its neighbor-aware
//! interaction graph, re-synthesize onto it, keep either the synthesized or
//! the original block, reassemble, then SABRE layout and route.
//!
//! `post_mapping` maps first and re-synthesizes blocks of the routed circuit
//! onto the device subgraph they occupy. `map_only` just routes.
//!
//! Every kept synthesized block is within `epsilon` of its original, so the
//! distances in the report sum to at most `N * epsilon`.

pub mod bench;
pub mod routability;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circuit::{Circuit, CircuitStats};
use crate::error::{Result, TopasError};
use crate::mapper::{
    derive_seed, mapped_distance, sabre_layout_with, sabre_route_with, MappedCircuit, RoutingReport, SabreConfig,
};
use crate::partitioner::{scan_partition, Partition, PartitionedCircuit};
use crate::selector::{neighbor_aware_graph, select_subtopology, BiasTable};
use crate::synthesizer::{synthesize, SynthesisConfig, SynthesisOutput, SynthesisStatus};
use crate::topology::{build_topology, embedded_subtopologies, PhysicalTopology, Subtopology};

pub use routability::{routability_score, HarnessConfig, RoutabilityTable};

pub const REPORT_SCHEMA_VERSION: u32 = 1;

const SALT_SYNTHESIS: u64 = 1;
const SALT_LAYOUT: u64 = 2;
const SALT_ROUTE: u64 = 3;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    #[default]
    Topas,
    PostMapping,
    MapOnly,
}

impl Mode {
    pub const ALL: [Mode; 3] = [Mode::Topas, Mode::PostMapping, Mode::MapOnly];

    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Topas => "topas",
            Mode::PostMapping => "post_mapping",
            Mode::MapOnly => "map_only",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Mode {
    type Err = TopasError;

    fn from_str(s: &str) -> Result<Self> {
        match s.replace('-', "_").as_str() {
            "topas" => Ok(Mode::Topas),
            "post_mapping" | "post_mapping_baseline" => Ok(Mode::PostMapping),
            "map_only" | "map_only_baseline" => Ok(Mode::MapOnly),
            _ => Err(TopasError::Config(format!("unknown mode `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    /// `linear:N`, `mesh:RxC`, `falcon27` or `file:<path>`.
    pub topology: String,
    pub block_size: usize,
    pub epsilon: f64,
    /// Subtopology biases; empty means the device default.
    pub bias: BTreeMap<String, f64>,
    pub replacement_threshold: f64,
    pub seed: u64,
    pub mode: Mode,
    pub simulation_cap: usize,
    /// Cancel adjacent identical CNOTs before partitioning.
    pub prepass: bool,
    /// Simulate input and output when the device fits under the cap.
    pub verify: bool,
    /// Worker threads for per-block synthesis; 0 uses the rayon default.
    pub threads: usize,
    /// Search settings; `epsilon` and `seed` are taken from this config.
    pub synthesis: SynthesisConfig,
    pub sabre: SabreConfig,
    /// Used for routability entries missing from the table.
    pub routability: HarnessConfig,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            topology: "mesh:6x6".into(),
            block_size: 4,
            epsilon: 1e-10,
            bias: BTreeMap::new(),
            replacement_threshold: 0.30,
            seed: 0,
            mode: Mode::Topas,
            simulation_cap: crate::circuit::SIMULATION_CAP,
            prepass: false,
            verify: true,
            threads: 0,
            synthesis: SynthesisConfig::default(),
            sabre: SabreConfig::default(),
            routability: HarnessConfig::default(),
        }
    }
}

fn merge_toml(base: &mut toml::Table, over: toml::Table) {
    for (k, v) in over {
        match (base.get_mut(&k), v) {
            (Some(toml::Value::Table(b)), toml::Value::Table(o)) => merge_toml(b, o),
            (_, v) => {
                base.insert(k, v);
            }
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        if !(2..=4).contains(&self.block_size) {
            return Err(TopasError::Config(format!("block_size must be in 2..=4, got {}", self.block_size)));
        }
        if !(self.replacement_threshold > 0.0 && self.replacement_threshold < 1.0) {
            return Err(TopasError::Config("replacement_threshold must lie in (0, 1)".into()));
        }
        if !(self.epsilon > 0.0) {
            return Err(TopasError::Config("epsilon must be positive".into()));
        }
        self.synthesis.validate()
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        Self::default().overlay_toml(text)
    }

    /// Keys present in `text` replace the current values; nested tables merge.
    pub fn overlay_toml(&self, text: &str) -> Result<Self> {
        let over: toml::Table = toml::from_str(text).map_err(|e| TopasError::Config(e.to_string()))?;
        let mut base = toml::Table::try_from(self).map_err(|e| TopasError::Config(e.to_string()))?;
        merge_toml(&mut base, over);
        let cfg: Self = base.try_into().map_err(|e: toml::de::Error| TopasError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn physical(&self) -> Result<PhysicalTopology> {
        build_topology(&self.topology)
    }

    pub fn bias_table(&self, phys: &PhysicalTopology) -> BiasTable {
        let mut t = BiasTable::default_for(phys);
        t.0.extend(self.bias.iter().map(|(k, v)| (k.clone(), *v)));
        t
    }

    fn synthesis_for(&self, partition: usize) -> SynthesisConfig {
        SynthesisConfig {
            epsilon: self.epsilon,
            seed: derive_seed(derive_seed(self.seed, SALT_SYNTHESIS), partition as u64),
            ..self.synthesis.clone()
        }
    }
}

/// What happened to one block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Decision {
    /// No two-qubit gates; copied unchanged.
    Passthrough,
    Synthesized,
    /// The original has clearly fewer CNOTs.
    OriginalFewerCnots,
    /// The original's interaction graph routes better on the device.
    OriginalMoreRoutable,
    /// Synthesis did not reach epsilon.
    OriginalBudgetExhausted,
}

impl Decision {
    pub fn replaced(self) -> bool {
        self == Decision::Synthesized
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Choice {
    pub decision: Decision,
    pub routability_original: Option<f64>,
    pub routability_synthesized: Option<f64>,
}

/// Keeps the original block when it has fewer than `(1 - threshold)` times
/// the synthesized CNOTs, or when its interaction graph scores strictly
/// better on routability; otherwise takes the synthesized block.
pub fn choose_partition(
    original: &Circuit,
    synthesized: &Circuit,
    phys: &PhysicalTopology,
    table: &mut RoutabilityTable,
    threshold: f64,
) -> Choice {
    if (original.cnot_count() as f64) < (1.0 - threshold) * synthesized.cnot_count() as f64 {
        return Choice {
            decision: Decision::OriginalFewerCnots,
            routability_original: None,
            routability_synthesized: None,
        };
    }
    let ro = routability_score(&original.connectivity_graph().support(), phys, table);
    let rs = routability_score(&synthesized.connectivity_graph().support(), phys, table);
    Choice {
        decision: if ro < rs {
            Decision::OriginalMoreRoutable
        } else {
            Decision::Synthesized
        },
        routability_original: Some(ro),
        routability_synthesized: Some(rs),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartitionRecord {
    pub id: usize,
    pub qubits: Vec<usize>,
    pub original_cnots: usize,
    pub subtopology: Option<String>,
    pub permutation: Option<Vec<usize>>,
    pub selection_score: Option<f64>,
    pub synthesized_cnots: Option<usize>,
    pub synthesis_distance: Option<f64>,
    pub synthesis_status: Option<SynthesisStatus>,
    pub nodes_instantiated: Option<usize>,
    pub routability_original: Option<f64>,
    pub routability_synthesized: Option<f64>,
    pub decision: Decision,
    /// Distance this block contributes to the output (0 when kept as is).
    pub distance: f64,
}

impl PartitionRecord {
    fn passthrough(p: &Partition) -> Self {
        Self {
            id: p.id,
            qubits: p.qubits.clone(),
            original_cnots: p.cnot_count(),
            subtopology: None,
            permutation: None,
            selection_score: None,
            synthesized_cnots: None,
            synthesis_distance: None,
            synthesis_status: None,
            nodes_instantiated: None,
            routability_original: None,
            routability_synthesized: None,
            decision: Decision::Passthrough,
            distance: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub mode: Mode,
    pub topology: String,
    pub block_size: usize,
    pub epsilon: f64,
    pub seed: u64,
    pub input: CircuitStats,
    pub output: CircuitStats,
    pub partition_count: usize,
    pub partitions: Vec<PartitionRecord>,
    pub replaced: Vec<usize>,
    /// `partition_count * epsilon`.
    pub error_bound: f64,
    pub distance_sum: f64,
    /// Simulated distance between input and output, permutation tracked.
    pub end_to_end_distance: Option<f64>,
    pub routing: RoutingReport,
    /// Wall-clock seconds per stage; the only nondeterministic field.
    pub timings: BTreeMap<String, f64>,
}

impl RunReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

#[derive(Debug, Clone)]
pub struct CompileOutput {
    pub mapped: MappedCircuit,
    pub report: RunReport,
}

struct Timer {
    start: Instant,
    timings: BTreeMap<String, f64>,
}

impl Timer {
    fn new() -> Self {
        Self {
            start: Instant::now(),
            timings: BTreeMap::new(),
        }
    }

    fn lap(&mut self, stage: &str) {
        let now = Instant::now();
        let total: f64 = self.timings.values().sum();
        self.timings.insert(stage.into(), (now - self.start).as_secs_f64() - total);
    }

    fn finish(mut self) -> BTreeMap<String, f64> {
        let total = self.start.elapsed().as_secs_f64();
        self.timings.insert("total".into(), total);
        self.timings
    }
}

fn in_pool<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| TopasError::Config(e.to_string()))?;
    Ok(pool.install(f))
}

/// Runs the configured mode with the shipped routability table.
pub fn compile(c: &Circuit, cfg: &PipelineConfig) -> Result<CompileOutput> {
    let mut table = RoutabilityTable::shipped();
    table.harness = cfg.routability.clone();
    compile_with_table(c, cfg, &mut table)
}

pub fn compile_with_table(c: &Circuit, cfg: &PipelineConfig, table: &mut RoutabilityTable) -> Result<CompileOutput> {
    match cfg.mode {
        Mode::Topas => run_topas(c, cfg, table),
        Mode::PostMapping | Mode::MapOnly => run_baseline(c, cfg),
    }
}

fn prepare(c: &Circuit, cfg: &PipelineConfig, phys: &PhysicalTopology) -> Result<Circuit> {
    cfg.validate()?;
    if c.width() > phys.size() {
        return Err(TopasError::CircuitTooWide {
            width: c.width(),
            device: phys.size(),
        });
    }
    let c = c.decompose_swaps();
    Ok(if cfg.prepass { c.cancel_adjacent_cnots() } else { c })
}

fn route(c: &Circuit, phys: &PhysicalTopology, cfg: &PipelineConfig) -> Result<MappedCircuit> {
    let placement = sabre_layout_with(c, phys, &cfg.sabre, derive_seed(cfg.seed, SALT_LAYOUT))?;
    sabre_route_with(c, phys, &placement, &cfg.sabre, derive_seed(cfg.seed, SALT_ROUTE))
}

struct Synthesized {
    record: PartitionRecord,
    output: Option<SynthesisOutput>,
}

fn synthesize_block(p: &Partition, target_graph: &crate::graph::Graph, cfg: &PipelineConfig) -> Result<SynthesisOutput> {
    let target = p.subcircuit.unitary_with_cap(cfg.simulation_cap)?;
    synthesize(&target, target_graph, &cfg.synthesis_for(p.id))
}

fn record_synthesis(p: &Partition, out: &SynthesisOutput) -> PartitionRecord {
    PartitionRecord {
        synthesized_cnots: Some(out.cnots),
        synthesis_distance: Some(out.distance),
        synthesis_status: Some(out.status),
        nodes_instantiated: Some(out.log.nodes_instantiated),
        ..PartitionRecord::passthrough(p)
    }
}

#[allow(clippy::too_many_arguments)]
fn finish_report(
    cfg: &PipelineConfig,
    input: &Circuit,
    mapped: &MappedCircuit,
    partitions: Vec<PartitionRecord>,
    partition_count: usize,
    phys: &PhysicalTopology,
    mut timer: Timer,
) -> Result<RunReport> {
    let end_to_end_distance = if cfg.verify && phys.size() <= cfg.simulation_cap {
        Some(mapped_distance(input, mapped, cfg.simulation_cap)?)
    } else {
        None
    };
    timer.lap("verify");
    Ok(RunReport {
        schema_version: REPORT_SCHEMA_VERSION,
        mode: cfg.mode,
        topology: phys.name(),
        block_size: cfg.block_size,
        epsilon: cfg.epsilon,
        seed: cfg.seed,
        input: input.stats(),
        output: mapped.circuit.stats(),
        partition_count,
        replaced: partitions.iter().filter(|r| r.decision.replaced()).map(|r| r.id).collect(),
        distance_sum: partitions.iter().map(|r| r.distance).fold(0.0, |a, b| a + b),
        error_bound: partition_count as f64 * cfg.epsilon,
        partitions,
        end_to_end_distance,
        routing: mapped.report(),
        timings: timer.finish(),
    })
}

/// Partition, select, synthesize, choose, reassemble, then map.
pub fn run_topas(c: &Circuit, cfg: &PipelineConfig, table: &mut RoutabilityTable) -> Result<CompileOutput> {
    let mut timer = Timer::new();
    let phys = cfg.physical()?;
    let input = prepare(c, cfg, &phys)?;
    let pc = scan_partition(&input, cfg.block_size)?;
    timer.lap("partition");

    let bias = cfg.bias_table(&phys);
    let candidates: BTreeMap<usize, Vec<Subtopology>> = (2..=cfg.block_size)
        .map(|w| (w, embedded_subtopologies(&phys, w)))
        .collect();
    let work = |p: &Partition| -> Result<Synthesized> {
        if p.is_passthrough() {
            return Ok(Synthesized {
                record: PartitionRecord::passthrough(p),
                output: None,
            });
        }
        let g_l = neighbor_aware_graph(p, &pc)?;
        let cands = candidates.get(&p.width()).map(Vec::as_slice).unwrap_or_default();
        let assignment = select_subtopology(p.id, &g_l, cands, &bias)?;
        let out = synthesize_block(p, &assignment.permuted_graph(), cfg)?;
        Ok(Synthesized {
            record: PartitionRecord {
                subtopology: Some(assignment.subtopology.name.clone()),
                permutation: Some(assignment.permutation.clone()),
                selection_score: Some(assignment.score),
                ..record_synthesis(p, &out)
            },
            output: Some(out),
        })
    };
    let results: Vec<Result<Synthesized>> = in_pool(cfg.threads, || pc.partitions.par_iter().map(work).collect())?;
    let results: Vec<Synthesized> = results.into_iter().collect::<Result<_>>()?;
    timer.lap("synthesis");

    let (blocks, records) = choose_all(&pc, cfg.epsilon, results, |p, out| {
        choose_partition(&p.subcircuit, &out.circuit, &phys, table, cfg.replacement_threshold)
    });
    let block_refs: Vec<&Circuit> = blocks.iter().collect();
    let logical = pc.reassemble_with(&block_refs)?;
    timer.lap("choose");

    let mapped = route(&logical, &phys, cfg)?;
    timer.lap("mapping");
    let report = finish_report(cfg, &input, &mapped, records, pc.len(), &phys, timer)?;
    Ok(CompileOutput { mapped, report })
}

/// Applies `choose` to every synthesis that converged and re-verified within
/// `epsilon`, and returns the kept block (local indices) and final record per
/// partition, in slot order.
fn choose_all(
    pc: &PartitionedCircuit,
    epsilon: f64,
    results: Vec<Synthesized>,
    mut choose: impl FnMut(&Partition, &SynthesisOutput) -> Choice,
) -> (Vec<Circuit>, Vec<PartitionRecord>) {
    let mut blocks = Vec::with_capacity(pc.len());
    let mut records = Vec::with_capacity(pc.len());
    for (p, Synthesized { mut record, output }) in pc.partitions.iter().zip(results) {
        let mut block = p.subcircuit.clone();
        if let Some(out) = output {
            if out.converged() && out.distance <= epsilon {
                let choice = choose(p, &out);
                record.decision = choice.decision;
                record.routability_original = choice.routability_original;
                record.routability_synthesized = choice.routability_synthesized;
                if choice.decision.replaced() {
                    record.distance = out.distance;
                    block = out.circuit;
                }
            } else {
                record.decision = Decision::OriginalBudgetExhausted;
            }
        }
        blocks.push(block);
        records.push(record);
    }
    (blocks, records)
}

/// `post_mapping`: route first, then re-synthesize blocks of the routed
/// circuit on the device subgraph they occupy, keeping the smaller block.
/// `map_only`: route only.
pub fn run_baseline(c: &Circuit, cfg: &PipelineConfig) -> Result<CompileOutput> {
    let mut timer = Timer::new();
    let phys = cfg.physical()?;
    let input = prepare(c, cfg, &phys)?;
    let mut mapped = route(&input, &phys, cfg)?;
    timer.lap("mapping");
    if cfg.mode == Mode::MapOnly {
        let report = finish_report(cfg, &input, &mapped, Vec::new(), 0, &phys, timer)?;
        return Ok(CompileOutput { mapped, report });
    }

    let pc = scan_partition(&mapped.circuit, cfg.block_size)?;
    timer.lap("partition");
    let work = |p: &Partition| -> Result<Synthesized> {
        if p.is_passthrough() {
            return Ok(Synthesized {
                record: PartitionRecord::passthrough(p),
                output: None,
            });
        }
        let induced = phys.graph.induced(&p.qubits);
        let out = synthesize_block(p, &induced, cfg)?;
        Ok(Synthesized {
            record: PartitionRecord {
                subtopology: Some(Subtopology::from_graph(&induced).name),
                ..record_synthesis(p, &out)
            },
            output: Some(out),
        })
    };
    let results: Vec<Result<Synthesized>> = in_pool(cfg.threads, || pc.partitions.par_iter().map(work).collect())?;
    let results: Vec<Synthesized> = results.into_iter().collect::<Result<_>>()?;
    timer.lap("synthesis");

    let (blocks, records) = choose_all(&pc, cfg.epsilon, results, |p, out| Choice {
        decision: if out.cnots < p.cnot_count() {
            Decision::Synthesized
        } else {
            Decision::OriginalFewerCnots
        },
        routability_original: None,
        routability_synthesized: None,
    });
    let block_refs: Vec<&Circuit> = blocks.iter().collect();
    mapped.circuit = pc.reassemble_with(&block_refs)?;
    timer.lap("choose");
    let report = finish_report(cfg, &input, &mapped, records, pc.len(), &phys, timer)?;
    Ok(CompileOutput { mapped, report })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::Gate;

    fn line_table() -> RoutabilityTable {
        let mut t = RoutabilityTable::empty(HarnessConfig::default());
        for key in ["2:line", "3:line", "4:line", "4:star"] {
            t.insert("linear", key.into(), 0.0);
        }
        t.insert("linear", "3:ring".into(), 0.5);
        t
    }

    fn chain(n: usize, cnots: usize) -> Circuit {
        Circuit::from_gates(n, (0..cnots).map(|i| Gate::cnot(i % (n - 1), i % (n - 1) + 1))).unwrap()
    }

    #[test]
    fn thirty_percent_rule() {
        let phys = build_topology("linear:4").unwrap();
        let mut t = line_table();
        let d = |o: usize, s: usize, t: &mut RoutabilityTable| {
            choose_partition(&chain(3, o), &chain(3, s), &phys, t, 0.3).decision
        };
        assert_eq!(d(6, 10, &mut t), Decision::OriginalFewerCnots);
        assert_eq!(d(8, 10, &mut t), Decision::Synthesized);
        assert_eq!(d(7, 10, &mut t), Decision::Synthesized);
    }

    #[test]
    fn more_routable_original_is_kept() {
        let phys = build_topology("linear:4").unwrap();
        let mut t = line_table();
        let original = chain(3, 3);
        let triangle = Circuit::from_gates(3, [Gate::cnot(0, 1), Gate::cnot(1, 2), Gate::cnot(0, 2)]).unwrap();
        let c = choose_partition(&original, &triangle, &phys, &mut t, 0.3);
        assert_eq!(c.decision, Decision::OriginalMoreRoutable);
        assert_eq!(c.routability_synthesized, Some(0.5));
    }

    #[test]
    fn toml_overrides_merge() {
        let base = PipelineConfig {
            seed: 7,
            ..PipelineConfig::default()
        };
        let cfg = base
            .overlay_toml("topology = \"linear:5\"\n[synthesis]\nmax_blocks = 6\n[bias]\nring = 0.5\n")
            .unwrap();
        assert_eq!(cfg.seed, 7);
        assert_eq!(cfg.topology, "linear:5");
        assert_eq!(cfg.synthesis.max_blocks, 6);
        assert_eq!(cfg.synthesis.leap_gap, 3);
        assert_eq!(cfg.bias.get("ring"), Some(&0.5));
        assert!(base.overlay_toml("block_size = 5").is_err());
        assert!(base.overlay_toml("[synthesis]\nmax_block = 6\n").is_err());
        assert!(base.overlay_toml("mode = \"post_mapping\"").unwrap().mode == Mode::PostMapping);
    }

    #[test]
    fn modes_parse() {
        for m in Mode::ALL {
            assert_eq!(m.as_str().parse::<Mode>().unwrap(), m);
        }
        assert_eq!("map-only".parse::<Mode>().unwrap(), Mode::MapOnly);
        assert!("fast".parse::<Mode>().is_err());
    }

    #[test]
    fn map_only_keeps_a_conformant_circuit() {
        let c = chain(3, 4);
        let cfg = PipelineConfig {
            topology: "linear:3".into(),
            mode: Mode::MapOnly,
            ..PipelineConfig::default()
        };
        let out = compile(&c, &cfg).unwrap();
        assert_eq!(out.mapped.swap_count, 0);
        assert_eq!(out.report.output.cnot_count, 4);
        assert!(out.report.end_to_end_distance.unwrap() < 1e-12);
    }

    #[test]
    fn too_wide_is_rejected() {
        let cfg = PipelineConfig {
            topology: "linear:3".into(),
            ..PipelineConfig::default()
        };
        assert!(matches!(compile(&chain(4, 3), &cfg), Err(TopasError::CircuitTooWide { .. })));
    }
}
