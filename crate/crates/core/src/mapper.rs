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

//! SABRE placement and routing with partition-aware SWAP accounting.

use std::collections::{BTreeMap, VecDeque};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::circuit::{Circuit, Gate};
use crate::error::{Result, TopasError};
use crate::numerics::{hs_distance, UnitaryMatrix};
use crate::topology::PhysicalTopology;

/// Logical to physical assignment, extended to a full bijection on the
/// device: labels `logical..` stand for idle physical qubits.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Placement {
    logical: usize,
    l2p: Vec<usize>,
}

impl Placement {
    pub fn new(mapping: &[usize], device: usize) -> Result<Self> {
        if mapping.len() > device {
            return Err(TopasError::CircuitTooWide {
                width: mapping.len(),
                device,
            });
        }
        let mut used = vec![false; device];
        for &p in mapping {
            if p >= device || std::mem::replace(&mut used[p], true) {
                return Err(TopasError::Config(format!("placement {mapping:?} is not injective on {device} qubits")));
            }
        }
        let mut l2p = mapping.to_vec();
        l2p.extend((0..device).filter(|&p| !used[p]));
        Ok(Self {
            logical: mapping.len(),
            l2p,
        })
    }

    pub fn identity(logical: usize, device: usize) -> Result<Self> {
        Self::new(&(0..logical).collect::<Vec<_>>(), device)
    }

    fn random(logical: usize, device: usize, rng: &mut ChaCha8Rng) -> Self {
        let mut l2p: Vec<usize> = (0..device).collect();
        l2p.shuffle(rng);
        Self { logical, l2p }
    }

    fn from_full(logical: usize, l2p: Vec<usize>) -> Self {
        Self { logical, l2p }
    }

    pub fn logical_width(&self) -> usize {
        self.logical
    }

    pub fn device_size(&self) -> usize {
        self.l2p.len()
    }

    /// Physical qubit of each logical qubit.
    pub fn mapping(&self) -> &[usize] {
        &self.l2p[..self.logical]
    }

    pub fn physical(&self, logical: usize) -> usize {
        self.l2p[logical]
    }

    fn inverse(&self) -> Vec<usize> {
        let mut p2l = vec![0; self.l2p.len()];
        for (l, &p) in self.l2p.iter().enumerate() {
            p2l[p] = l;
        }
        p2l
    }
}

/// Routing heuristic knobs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SabreConfig {
    pub lookahead: usize,
    pub extended_weight: f64,
    /// Added to a qubit's decay factor each time it is swapped.
    pub decay_step: f64,
    pub layout_iters: usize,
    pub layout_trials: usize,
}

impl Default for SabreConfig {
    fn default() -> Self {
        Self {
            lookahead: 20,
            extended_weight: 0.5,
            decay_step: 0.001,
            layout_iters: 4,
            layout_trials: 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MappedCircuit {
    /// Physical circuit with inserted SWAPs decomposed into CNOTs.
    pub circuit: Circuit,
    pub initial_placement: Placement,
    pub final_placement: Placement,
    pub swap_count: usize,
    /// SWAPs inside each tagged partition's first-to-last gate span.
    pub internal_swaps: BTreeMap<usize, usize>,
    /// CNOT count of each tagged partition in the input.
    pub partition_cnots: BTreeMap<usize, usize>,
}

/// JSON view of a routing result.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoutingReport {
    pub swap_count: usize,
    pub initial_placement: Vec<usize>,
    pub final_placement: Vec<usize>,
    pub internal_swaps: BTreeMap<usize, usize>,
    pub internal_swaps_per_cnot: BTreeMap<usize, f64>,
}

impl MappedCircuit {
    pub fn report(&self) -> RoutingReport {
        RoutingReport {
            swap_count: self.swap_count,
            initial_placement: self.initial_placement.mapping().to_vec(),
            final_placement: self.final_placement.mapping().to_vec(),
            internal_swaps: self.internal_swaps.clone(),
            internal_swaps_per_cnot: internal_swap_stats(self),
        }
    }
}

#[derive(Debug, Clone, Copy)]
enum Step {
    Gate(usize),
    Swap(usize, usize),
}

struct Outcome {
    steps: Vec<Step>,
    swaps: usize,
    final_l2p: Vec<usize>,
}

struct Router<'a> {
    gates: &'a [Gate],
    dist: &'a [Vec<usize>],
    edges: &'a [(usize, usize)],
    cfg: &'a SabreConfig,
}

impl Router<'_> {
    fn run(&self, start: &Placement, rng: &mut ChaCha8Rng) -> Outcome {
        let n = self.gates.len();
        let device = start.device_size();
        let mut succs: Vec<Vec<usize>> = vec![Vec::new(); n];
        let mut indeg = vec![0usize; n];
        let mut last: Vec<Option<usize>> = vec![None; device];
        for (i, g) in self.gates.iter().enumerate() {
            let mut preds: Vec<usize> = g.qubits().filter_map(|q| last[q]).collect();
            preds.dedup();
            for p in preds {
                succs[p].push(i);
                indeg[i] += 1;
            }
            for q in g.qubits() {
                last[q] = Some(i);
            }
        }
        let mut l2p = start.l2p.clone();
        let mut p2l = start.inverse();
        let mut front: Vec<usize> = (0..n).filter(|&i| indeg[i] == 0).collect();
        let mut steps = Vec::with_capacity(n);
        let mut swaps = 0;
        let mut decay = vec![1.0f64; device];
        let mut stalled = 0usize;
        let valve = 10 * device.max(4);
        while !front.is_empty() {
            let mut progressed = false;
            let mut i = 0;
            while i < front.len() {
                let gi = front[i];
                let exec = match self.gates[gi].pair() {
                    None => true,
                    Some((a, b)) => self.dist[l2p[a]][l2p[b]] == 1,
                };
                if exec {
                    front.swap_remove(i);
                    steps.push(Step::Gate(gi));
                    for &s in &succs[gi] {
                        indeg[s] -= 1;
                        if indeg[s] == 0 {
                            front.push(s);
                        }
                    }
                    progressed = true;
                } else {
                    i += 1;
                }
            }
            if progressed {
                front.sort_unstable();
                decay.fill(1.0);
                stalled = 0;
                continue;
            }
            if front.is_empty() {
                break;
            }
            if stalled >= valve {
                // Walk the earliest blocked gate together along a shortest path.
                let (a, b) = self.gates[front[0]].pair().expect("blocked gates are two-qubit");
                while self.dist[l2p[a]][l2p[b]] > 1 {
                    let pa = l2p[a];
                    let next = (0..device)
                        .find(|&p| self.dist[pa][p] == 1 && self.dist[p][l2p[b]] + 1 == self.dist[pa][l2p[b]])
                        .expect("shortest path step");
                    self.apply_swap(pa, next, &mut l2p, &mut p2l, &mut steps);
                    swaps += 1;
                }
                stalled = 0;
                continue;
            }
            let (pa, pb) = self.choose_swap(&front, &succs, &indeg, &l2p, &decay, rng);
            self.apply_swap(pa, pb, &mut l2p, &mut p2l, &mut steps);
            decay[pa] += self.cfg.decay_step;
            decay[pb] += self.cfg.decay_step;
            swaps += 1;
            stalled += 1;
        }
        Outcome {
            steps,
            swaps,
            final_l2p: l2p,
        }
    }

    fn apply_swap(&self, pa: usize, pb: usize, l2p: &mut [usize], p2l: &mut [usize], steps: &mut Vec<Step>) {
        let (la, lb) = (p2l[pa], p2l[pb]);
        p2l.swap(pa, pb);
        l2p[la] = pb;
        l2p[lb] = pa;
        steps.push(Step::Swap(pa, pb));
    }

    fn extended_set(&self, front: &[usize], succs: &[Vec<usize>], indeg: &[usize]) -> Vec<(usize, usize)> {
        let mut remaining_deg: BTreeMap<usize, usize> = BTreeMap::new();
        let mut queue: VecDeque<usize> = front.iter().copied().collect();
        let mut out = Vec::new();
        while let Some(g) = queue.pop_front() {
            for &s in &succs[g] {
                let d = remaining_deg.entry(s).or_insert(indeg[s]);
                *d -= 1;
                if *d > 0 {
                    continue;
                }
                if let Some(pair) = self.gates[s].pair() {
                    if out.len() >= self.cfg.lookahead {
                        return out;
                    }
                    out.push(pair);
                }
                queue.push_back(s);
            }
        }
        out
    }

    fn choose_swap(
        &self,
        front: &[usize],
        succs: &[Vec<usize>],
        indeg: &[usize],
        l2p: &[usize],
        decay: &[f64],
        rng: &mut ChaCha8Rng,
    ) -> (usize, usize) {
        let front_pairs: Vec<(usize, usize)> = front.iter().filter_map(|&g| self.gates[g].pair()).collect();
        let ext = self.extended_set(front, succs, indeg);
        let mut active = vec![false; l2p.len()];
        for &(a, b) in &front_pairs {
            active[l2p[a]] = true;
            active[l2p[b]] = true;
        }
        let mut trial = l2p.to_vec();
        let mut best = f64::INFINITY;
        let mut ties: Vec<(usize, usize)> = Vec::new();
        for &(pa, pb) in self.edges {
            if !active[pa] && !active[pb] {
                continue;
            }
            trial.copy_from_slice(l2p);
            for p in trial.iter_mut() {
                if *p == pa {
                    *p = pb;
                } else if *p == pb {
                    *p = pa;
                }
            }
            let sum = |pairs: &[(usize, usize)]| pairs.iter().map(|&(a, b)| self.dist[trial[a]][trial[b]] as f64).sum::<f64>();
            let cost = decay[pa].max(decay[pb]) * (sum(&front_pairs) + self.cfg.extended_weight * sum(&ext));
            if cost < best - 1e-12 {
                best = cost;
                ties.clear();
                ties.push((pa, pb));
            } else if (cost - best).abs() <= 1e-12 {
                ties.push((pa, pb));
            }
        }
        ties[rng.random_range(0..ties.len())]
    }
}

fn check_width(c: &Circuit, phys: &PhysicalTopology) -> Result<()> {
    if c.width() > phys.size() {
        return Err(TopasError::CircuitTooWide {
            width: c.width(),
            device: phys.size(),
        });
    }
    if !phys.graph.is_connected() {
        return Err(TopasError::UnknownTopology(format!("{} is disconnected", phys.name())));
    }
    Ok(())
}

fn route_raw(c: &Circuit, phys: &PhysicalTopology, dist: &[Vec<usize>], p: &Placement, cfg: &SabreConfig, rng: &mut ChaCha8Rng) -> Outcome {
    let edges: Vec<(usize, usize)> = phys.graph.edges().collect();
    Router {
        gates: c.gates(),
        dist,
        edges: &edges,
        cfg,
    }
    .run(p, rng)
}

/// SABRE layout with default heuristic settings.
pub fn sabre_layout(c: &Circuit, phys: &PhysicalTopology, iters: usize, seed: u64) -> Result<Placement> {
    let cfg = SabreConfig {
        layout_iters: iters,
        ..SabreConfig::default()
    };
    sabre_layout_with(c, phys, &cfg, seed)
}

/// Random starts refined by forward/backward routing passes; returns the
/// visited placement whose forward routing needs the fewest SWAPs.
pub fn sabre_layout_with(c: &Circuit, phys: &PhysicalTopology, cfg: &SabreConfig, seed: u64) -> Result<Placement> {
    check_width(c, phys)?;
    let dist = phys.graph.distance_matrix();
    let reversed = c.reversed();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<(usize, Placement)> = None;
    for _ in 0..cfg.layout_trials.max(1) {
        let mut p = Placement::random(c.width(), phys.size(), &mut rng);
        for it in 0..=cfg.layout_iters {
            let fwd = route_raw(c, phys, &dist, &p, cfg, &mut rng);
            if best.as_ref().is_none_or(|(s, _)| fwd.swaps < *s) {
                best = Some((fwd.swaps, p.clone()));
            }
            if fwd.swaps == 0 || it == cfg.layout_iters {
                break;
            }
            let back = route_raw(
                &reversed,
                phys,
                &dist,
                &Placement::from_full(c.width(), fwd.final_l2p),
                cfg,
                &mut rng,
            );
            p = Placement::from_full(c.width(), back.final_l2p);
        }
        if best.as_ref().is_some_and(|(s, _)| *s == 0) {
            break;
        }
    }
    Ok(best.expect("at least one trial").1)
}

/// SABRE routing with default heuristic settings.
pub fn sabre_route(c: &Circuit, phys: &PhysicalTopology, p: &Placement, seed: u64) -> Result<MappedCircuit> {
    sabre_route_with(c, phys, p, &SabreConfig::default(), seed)
}

pub fn sabre_route_with(
    c: &Circuit,
    phys: &PhysicalTopology,
    p: &Placement,
    cfg: &SabreConfig,
    seed: u64,
) -> Result<MappedCircuit> {
    check_width(c, phys)?;
    if p.device_size() != phys.size() || p.logical_width() != c.width() {
        return Err(TopasError::Config(format!(
            "placement of {} qubits on {} does not fit a {}-qubit circuit on {}",
            p.logical_width(),
            p.device_size(),
            c.width(),
            phys.size()
        )));
    }
    let dist = phys.graph.distance_matrix();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let out = route_raw(c, phys, &dist, p, cfg, &mut rng);

    let tags = c.partition_tags();
    let mut partition_cnots: BTreeMap<usize, usize> = BTreeMap::new();
    for (g, t) in c.gates().iter().zip(&tags) {
        if let Some(t) = t {
            *partition_cnots.entry(*t).or_insert(0) += g.cnot_cost();
        }
    }
    let mut spans: BTreeMap<usize, (usize, usize)> = BTreeMap::new();
    let mut swap_at = Vec::new();
    for (pos, step) in out.steps.iter().enumerate() {
        match *step {
            Step::Gate(i) => {
                if let Some(t) = tags[i] {
                    let e = spans.entry(t).or_insert((pos, pos));
                    e.1 = pos;
                }
            }
            Step::Swap(..) => swap_at.push(pos),
        }
    }
    let internal_swaps = spans
        .iter()
        .map(|(&t, &(lo, hi))| (t, swap_at.iter().filter(|&&s| lo < s && s < hi).count()))
        .collect();

    // Replay with the evolving placement onto physical wires.
    let mut l2p = p.l2p.clone();
    let mut routed = Circuit::new(phys.size());
    for step in &out.steps {
        match *step {
            Step::Gate(i) => routed.push(c.gates()[i].remap(|q| l2p[q]))?,
            Step::Swap(a, b) => {
                routed.push(Gate::swap(a, b))?;
                for x in l2p.iter_mut() {
                    if *x == a {
                        *x = b;
                    } else if *x == b {
                        *x = a;
                    }
                }
            }
        }
    }
    debug_assert_eq!(l2p, out.final_l2p);
    Ok(MappedCircuit {
        circuit: routed.decompose_swaps(),
        initial_placement: p.clone(),
        final_placement: Placement::from_full(c.width(), out.final_l2p),
        swap_count: out.swaps,
        internal_swaps,
        partition_cnots,
    })
}

/// Every two-qubit gate sits on a coupler of the device.
pub fn validate_mapping(mc: &MappedCircuit, phys: &PhysicalTopology) -> bool {
    validate_circuit(&mc.circuit, phys)
}

pub fn validate_circuit(c: &Circuit, phys: &PhysicalTopology) -> bool {
    c.width() <= phys.size()
        && c.gates().iter().all(|g| g.pair().is_none_or(|(a, b)| phys.graph.has_edge(a, b)))
}

/// Internal SWAPs per CNOT for every tagged partition with at least one CNOT.
pub fn internal_swap_stats(mc: &MappedCircuit) -> BTreeMap<usize, f64> {
    mc.partition_cnots
        .iter()
        .filter(|(_, &n)| n > 0)
        .map(|(&t, &n)| (t, mc.internal_swaps.get(&t).copied().unwrap_or(0) as f64 / n as f64))
        .collect()
}

/// Distance between `original` placed by the initial placement and the
/// routed circuit with its wire permutation undone. Simulates on the whole
/// device, so it is limited by the simulation cap.
pub fn mapped_distance(original: &Circuit, mc: &MappedCircuit, cap: usize) -> Result<f64> {
    let init = &mc.initial_placement;
    let placed = original.remapped(init.device_size(), |q| init.physical(q))?;
    let expected = placed.unitary_with_cap(cap)?;
    let routed = mc.circuit.unitary_with_cap(cap)?;
    // wire that started on init[w] now sits on fin[w]; move it back.
    let mut perm = vec![0; init.device_size()];
    for (w, &f) in mc.final_placement.l2p.iter().enumerate() {
        perm[f] = init.l2p[w];
    }
    let restored = UnitaryMatrix::qubit_permutation(&perm).matmul(&routed);
    hs_distance(&restored, &expected)
}

/// Deterministic per-purpose seed derivation.
pub fn derive_seed(seed: u64, salt: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15));
    rng.random()
}
