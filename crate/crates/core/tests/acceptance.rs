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

//! Acceptance suite. Runs every criterion at its stated tolerance and prints
//! one PASS/FAIL line each; exits nonzero if any asserted criterion fails.

use std::collections::BTreeSet;
use std::f64::consts::PI;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use topas::circuit::{emit_qasm, SIMULATION_CAP};
use topas::mapper::{mapped_distance, validate_mapping};
use topas::numerics::{gate_unitary, hs_distance};
use topas::partitioner::scan_partition;
use topas::pipeline::bench::{desk_suite, random_circuit};
use topas::pipeline::routability::RoutabilityTable;
use topas::pipeline::{compile, compile_with_table, Mode, PipelineConfig};
use topas::selector::{select_subtopology, BiasTable};
use topas::synthesizer::{synthesize, SynthesisConfig};
use topas::topology::{build_topology, embedded_subtopologies, named_graph, Subtopology};
use topas::{Circuit, Gate, Graph, UnitaryMatrix, WeightedGraph};

struct Outcome {
    pass: bool,
    /// Reported-only criteria never fail the run.
    asserted: bool,
    detail: String,
}

fn asserted(pass: bool, detail: String) -> Outcome {
    Outcome {
        pass,
        asserted: true,
        detail,
    }
}

fn u3(q: usize, rng: &mut ChaCha8Rng) -> Gate {
    Gate::u3(q, rng.random_range(0.0..PI), rng.random_range(-PI..PI), rng.random_range(-PI..PI))
}

// 1. SWAP identity
fn swap_identity() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let n = rng.random_range(2..=5);
        let mut c = Circuit::new(n);
        for _ in 0..rng.random_range(1..30) {
            let a = rng.random_range(0..n);
            let b = (a + rng.random_range(1..n)) % n;
            let g = match rng.random_range(0..3) {
                0 => u3(a, &mut rng),
                1 => Gate::cnot(a, b),
                _ => Gate::swap(a, b),
            };
            c.push(g).unwrap();
        }
        let d = hs_distance(&c.decompose_swaps().unitary().unwrap(), &c.unitary().unwrap()).unwrap();
        worst = worst.max(d);
    }
    let swap = Circuit::from_gates(2, [Gate::swap(0, 1)]).unwrap().decompose_swaps();
    let secs = start.elapsed().as_secs_f64();
    asserted(
        worst < 1e-12 && secs < 30.0 && swap.cnot_count() == 3,
        format!("1000 circuits, max distance {worst:.2e}, SWAP -> {} CNOTs, {secs:.1}s", swap.cnot_count()),
    )
}

fn edge() -> Graph {
    named_graph("line", 2).unwrap()
}

// 2. Synthesis exactness
fn synthesis_exactness() -> Outcome {
    let cfg = SynthesisConfig::default();
    let cnot = synthesize(&gate_unitary(&Gate::cnot(0, 1), 2).unwrap(), &edge(), &cfg).unwrap();
    let swap = synthesize(&gate_unitary(&Gate::swap(0, 1), 2).unwrap(), &edge(), &cfg).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let haar: Vec<UnitaryMatrix> = (0..20).map(|_| UnitaryMatrix::random(4, &mut rng)).collect();
    let two: Vec<(f64, usize, bool)> = haar
        .par_iter()
        .enumerate()
        .map(|(i, u)| {
            let out = synthesize(u, &edge(), &SynthesisConfig { seed: i as u64, ..cfg.clone() }).unwrap();
            (out.distance, out.cnots, out.converged())
        })
        .collect();
    let two_ok = two.iter().all(|&(d, n, ok)| ok && d <= 1e-10 && n <= 3);

    let line3 = named_graph("line", 3).unwrap();
    let targets: Vec<UnitaryMatrix> = (0..10)
        .map(|_| {
            let mut c = Circuit::new(3);
            for q in 0..3 {
                c.push(u3(q, &mut rng)).unwrap();
            }
            for _ in 0..8 {
                let (mut a, mut b) = if rng.random::<bool>() { (0, 1) } else { (1, 2) };
                if rng.random::<bool>() {
                    std::mem::swap(&mut a, &mut b);
                }
                c.push(Gate::cnot(a, b)).unwrap();
                c.push(u3(a, &mut rng)).unwrap();
                c.push(u3(b, &mut rng)).unwrap();
            }
            c.unitary().unwrap()
        })
        .collect();
    let start = Instant::now();
    let three_cfg = SynthesisConfig { epsilon: 1e-8, ..cfg };
    let three: Vec<(f64, usize)> = targets
        .par_iter()
        .enumerate()
        .map(|(i, u)| {
            let out = synthesize(u, &line3, &SynthesisConfig { seed: i as u64, ..three_cfg.clone() }).unwrap();
            (out.distance, out.cnots)
        })
        .collect();
    let secs = start.elapsed().as_secs_f64();
    let three_ok = three.iter().filter(|&&(d, _)| d <= 1e-8).count();
    asserted(
        cnot.cnots == 1
            && cnot.converged()
            && swap.cnots == 3
            && swap.converged()
            && two_ok
            && three_ok == 10
            && secs < 300.0,
        format!(
            "CNOT -> {}, SWAP -> {}, Haar 2q max d {:.1e} max CNOTs {}, 3q {three_ok}/10 <= 1e-8 (CNOTs {:?}) in {secs:.1}s",
            cnot.cnots,
            swap.cnots,
            two.iter().map(|t| t.0).fold(0.0, f64::max),
            two.iter().map(|t| t.1).max().unwrap(),
            three.iter().map(|t| t.1).collect::<Vec<_>>(),
        ),
    )
}

// 3. Error bound
fn error_bound() -> Outcome {
    let runs: Vec<(f64, f64, f64, usize)> = (0..25u64)
        .into_par_iter()
        .map(|i| {
            let n = 4 + (i as usize % 3);
            let c = random_circuit(n, 8 + (i as usize % 4) * 3, 300 + i);
            let cfg = PipelineConfig {
                topology: format!("linear:{n}"),
                seed: i,
                threads: 1,
                ..PipelineConfig::default()
            };
            let r = compile(&c, &cfg).unwrap().report;
            let e2e = r.end_to_end_distance.expect("device within the simulation cap");
            (e2e, r.distance_sum, r.error_bound, r.replaced.len())
        })
        .collect();
    let ok = runs.iter().all(|&(e, s, b, _)| e <= s + 1e-9 && s <= b + 1e-9);
    let worst_gap = runs.iter().map(|&(e, s, _, _)| e - s).fold(f64::MIN, f64::max);
    asserted(
        ok,
        format!(
            "25 circuits, max (end-to-end - sum) {worst_gap:.1e}, max sum {:.1e}, partitions replaced {}",
            runs.iter().map(|r| r.1).fold(0.0, f64::max),
            runs.iter().map(|r| r.3).sum::<usize>()
        ),
    )
}

// 4. Embedded candidate sets
fn candidate_sets() -> Outcome {
    let names = |spec: &str| -> BTreeSet<String> {
        embedded_subtopologies(&build_topology(spec).unwrap(), 4)
            .into_iter()
            .map(|s| s.name)
            .collect()
    };
    let set = |v: &[&str]| v.iter().map(|s| s.to_string()).collect::<BTreeSet<_>>();
    let (mesh, falcon, linear) = (names("mesh:6x6"), names("falcon27"), names("linear:16"));
    asserted(
        mesh == set(&["line", "star", "ring"]) && falcon == set(&["line", "star"]) && linear == set(&["line"]),
        format!("mesh {mesh:?}, falcon {falcon:?}, linear {linear:?}"),
    )
}

fn permutations(k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for p in permutations(k - 1) {
        for i in 0..=p.len() {
            let mut q = p.clone();
            q.insert(i, k - 1);
            out.push(q);
        }
    }
    out
}

/// Independent scorer: weight covered by the relabeled candidate over total weight.
fn oracle_score(g: &WeightedGraph, cand: &Graph, perm: &[usize], bias: f64) -> f64 {
    let placed: BTreeSet<(usize, usize)> = cand
        .edges()
        .map(|(u, v)| (perm[u].min(perm[v]), perm[u].max(perm[v])))
        .collect();
    let (mut hit, mut total) = (0u64, 0u64);
    for ((u, v), w) in g.edges() {
        total += w;
        if placed.contains(&(u.min(v), u.max(v))) {
            hit += w;
        }
    }
    bias * hit as f64 / total as f64
}

// 5. Selector oracle and min-CNOT identification
fn selector_oracle() -> Outcome {
    let mesh = build_topology("mesh:6x6").unwrap();
    let cands = embedded_subtopologies(&mesh, 4);
    let bias = BiasTable::default_for(&mesh);
    let perms = permutations(4);
    assert_eq!(perms.len(), 24);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut agree = 0;
    for i in 0..500 {
        let mut g = WeightedGraph::new(4);
        while g.edge_count() == 0 {
            for u in 0..4 {
                for v in u + 1..4 {
                    if rng.random_bool(0.5) {
                        g.add_weight(u, v, rng.random_range(1..10));
                    }
                }
            }
        }
        let pick = select_subtopology(i, &g, &cands, &bias).unwrap();
        let mut best = f64::MIN;
        let mut argmax = Vec::new();
        for c in &cands {
            for p in &perms {
                let s = oracle_score(&g, &c.graph, p, bias.get(&c.name));
                if s > best + 1e-12 {
                    best = s;
                    argmax.clear();
                }
                if (s - best).abs() <= 1e-12 {
                    argmax.push((c.name.clone(), p.clone()));
                }
            }
        }
        let picked = (pick.subtopology.name.clone(), pick.permutation.clone());
        if (pick.score - best).abs() <= 1e-12 && argmax.contains(&picked) {
            agree += 1;
        }
    }
    let (hits, judged, blocks) = min_cnot_rate(&cands, &bias);
    let rate = hits as f64 / judged.max(1) as f64;
    asserted(
        agree == 500 && rate >= 0.60,
        format!(
            "oracle agreement {agree}/500; kernel pick has fewest CNOTs on {hits}/{judged} blocks ({:.0}%, {} of {blocks} had no converged synthesis)",
            100.0 * rate,
            blocks - judged
        ),
    )
}

/// Synthesizes 100 seeded 4-qubit blocks onto every mesh candidate and counts
/// how often the kernel's pick needs the fewest CNOTs. The kernel scores each
/// block's own interaction graph here; neighbor weights serve mapping, not the
/// block's CNOT count.
fn min_cnot_rate(cands: &[Subtopology], bias: &BiasTable) -> (usize, usize, usize) {
    let mut blocks = Vec::new();
    let mut seed = 0;
    while blocks.len() < 100 {
        let c = random_circuit(6, 24, 5000 + seed);
        seed += 1;
        let pc = scan_partition(&c, 4).unwrap();
        for p in &pc.partitions {
            if p.width() == 4 && (3..=8).contains(&p.cnot_count()) && blocks.len() < 100 {
                blocks.push((p.subcircuit.connectivity_graph(), p.subcircuit.unitary().unwrap()));
            }
        }
    }
    let results: Vec<Option<bool>> = blocks
        .par_iter()
        .enumerate()
        .map(|(i, (g_l, u))| {
            let pick = select_subtopology(i, g_l, cands, bias).unwrap();
            let cfg = SynthesisConfig {
                seed: i as u64,
                ..SynthesisConfig::default()
            };
            let mut counts = Vec::new();
            for c in cands {
                let a = select_subtopology(i, g_l, std::slice::from_ref(c), bias).unwrap();
                let out = synthesize(u, &a.permuted_graph(), &cfg).unwrap();
                counts.push((c.name.clone(), out.converged().then_some(out.cnots)));
            }
            let best = counts.iter().filter_map(|c| c.1).min()?;
            let chosen = counts.iter().find(|c| c.0 == pick.subtopology.name).and_then(|c| c.1);
            Some(chosen == Some(best))
        })
        .collect();
    let judged = results.iter().flatten().count();
    let hits = results.iter().flatten().filter(|&&h| h).count();
    (hits, judged, blocks.len())
}

// 6. Mapping validity, 8. directional metrics
fn desk_suite_runs() -> (Outcome, Outcome) {
    let cfg = PipelineConfig {
        topology: "mesh:3x3".into(),
        ..PipelineConfig::default()
    };
    let phys = cfg.physical().unwrap();
    let suite = desk_suite();
    let mut table = RoutabilityTable::shipped();
    let mut valid = 0;
    let mut total = 0;
    let (mut fewer, mut more_parts) = (0, 0);
    for (_, c) in &suite {
        let mut cnots = [0usize; 3];
        let mut parts = [0usize; 3];
        for (i, mode) in Mode::ALL.iter().enumerate() {
            let out = compile_with_table(c, &PipelineConfig { mode: *mode, ..cfg.clone() }, &mut table).unwrap();
            total += 1;
            valid += usize::from(validate_mapping(&out.mapped, &phys));
            cnots[i] = out.report.output.cnot_count;
            parts[i] = out.report.partition_count;
        }
        let idx = |m: Mode| Mode::ALL.iter().position(|&x| x == m).unwrap();
        fewer += usize::from(cnots[idx(Mode::Topas)] <= cnots[idx(Mode::MapOnly)]);
        more_parts += usize::from(parts[idx(Mode::PostMapping)] >= parts[idx(Mode::Topas)]);
    }

    // routing equivalence on small instances
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst: f64 = 0.0;
    let mut small = 0;
    for spec in ["linear:5", "mesh:2x3", "mesh:2x2"] {
        let phys = build_topology(spec).unwrap();
        for (_, c) in suite.iter().filter(|(_, c)| c.width() <= phys.size().min(5)) {
            let cfg = PipelineConfig {
                topology: spec.into(),
                mode: Mode::MapOnly,
                seed: rng.random(),
                ..PipelineConfig::default()
            };
            let out = compile(c, &cfg).unwrap();
            total += 1;
            small += 1;
            valid += usize::from(validate_mapping(&out.mapped, &phys));
            worst = worst.max(mapped_distance(c, &out.mapped, SIMULATION_CAP).unwrap());
        }
        for i in 0..10 {
            let n = rng.random_range(2..=phys.size().min(5));
            let c = random_circuit(n, rng.random_range(5..30), 600 + i);
            let cfg = PipelineConfig {
                topology: spec.into(),
                mode: Mode::MapOnly,
                seed: i,
                ..PipelineConfig::default()
            };
            let out = compile(&c, &cfg).unwrap();
            total += 1;
            small += 1;
            valid += usize::from(validate_mapping(&out.mapped, &phys));
            worst = worst.max(mapped_distance(&c, &out.mapped, SIMULATION_CAP).unwrap());
        }
    }
    let n = suite.len();
    (
        asserted(
            valid == total && worst < 1e-12,
            format!("{valid}/{total} routed outputs valid; max routed distance {worst:.1e} over {small} small instances"),
        ),
        Outcome {
            pass: fewer >= 7 && more_parts >= 8,
            asserted: false,
            detail: format!(
                "reported: topas <= map_only CNOTs on {fewer}/{n} (target 7); post_mapping partitions >= topas on {more_parts}/{n} (target 8)"
            ),
        },
    )
}

// 7. Partitioner properties
fn partitioner_properties() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut failures = Vec::new();
    for case in 0..200 {
        let n = rng.random_range(5..=12);
        let len = rng.random_range(20..=150);
        let mut c = Circuit::new(n);
        for _ in 0..len {
            let a = rng.random_range(0..n);
            let g = if rng.random_bool(0.5) {
                Gate::cnot(a, (a + rng.random_range(1..n)) % n)
            } else {
                u3(a, &mut rng)
            };
            c.push(g).unwrap();
        }
        let k = 2 + case % 3;
        let pc = scan_partition(&c, k).unwrap();
        let mut seen = vec![0usize; c.len()];
        let mut ok = true;
        for p in &pc.partitions {
            ok &= p.width() <= k;
            for &i in &p.gate_indices {
                seen[i] += 1;
            }
            if p.width() >= 2 {
                ok &= p.subcircuit.connectivity_graph().support().is_connected();
            }
        }
        ok &= seen.iter().all(|&s| s == 1);
        let r = pc.reassemble();
        for q in 0..n {
            let track = |c: &Circuit| c.gates().iter().filter(|g| g.acts_on(q)).copied().collect::<Vec<_>>();
            ok &= track(&r) == track(&c);
        }
        if !ok {
            failures.push(case);
        }
    }
    let cx = Gate::cnot;
    let hand = Circuit::from_gates(5, [cx(0, 1), cx(1, 2), cx(3, 4), cx(2, 3)]).unwrap();
    let pc = scan_partition(&hand, 3).unwrap();
    let traced: Vec<(Vec<usize>, Vec<usize>)> = pc
        .partitions
        .iter()
        .map(|p| (p.qubits.clone(), p.gate_indices.clone()))
        .collect();
    let expected = vec![(vec![0, 1, 2], vec![0, 1]), (vec![2, 3, 4], vec![2, 3])];
    asserted(
        failures.is_empty() && traced == expected,
        format!("200 random circuits, failing cases {failures:?}; hand example {traced:?}"),
    )
}

// 9. Determinism
fn determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let suite = desk_suite();
    let mut mismatches = Vec::new();
    let mut runs = 0;
    for name in ["adder_2", "random_6_30", "qft_5"] {
        let c = &suite.iter().find(|(n, _)| n == name).unwrap().1;
        let input = dir.path().join(format!("{name}.qasm"));
        std::fs::write(&input, emit_qasm(c)).unwrap();
        let mut outputs = Vec::new();
        for (tag, threads) in [("a", "1"), ("b", "1"), ("c", "4"), ("d", "0")] {
            let out = dir.path().join(format!("{name}.{tag}.qasm"));
            let report = dir.path().join(format!("{name}.{tag}.json"));
            let status = Command::new(env!("CARGO_BIN_EXE_topas"))
                .arg("compile")
                .arg(&input)
                .args(["--topology", "mesh:3x3", "--seed", "17", "--threads", threads])
                .arg("--out")
                .arg(&out)
                .arg("--report")
                .arg(&report)
                .output()
                .unwrap();
            assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));
            runs += 1;
            outputs.push((std::fs::read(&out).unwrap(), strip_timings(&report)));
        }
        if outputs.windows(2).any(|w| w[0] != w[1]) {
            mismatches.push(name);
        }
    }
    asserted(
        mismatches.is_empty(),
        format!("{runs} CLI runs over 1, 4 and default threads; mismatching circuits {mismatches:?}"),
    )
}

fn strip_timings(path: &Path) -> String {
    let mut v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    v.as_object_mut().unwrap().remove("timings");
    v.to_string()
}

type Criterion = Box<dyn FnOnce() -> Vec<Outcome>>;

fn main() {
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let wanted = |n: &str| filter.is_empty() || filter.iter().any(|f| n.contains(f.as_str()));
    let mut criteria: Vec<(&str, Criterion)> = vec![
        ("1 swap identity", Box::new(|| vec![swap_identity()])),
        ("2 synthesis exactness", Box::new(|| vec![synthesis_exactness()])),
        ("3 error bound", Box::new(|| vec![error_bound()])),
        ("4 embedded candidate sets", Box::new(|| vec![candidate_sets()])),
        ("5 selector oracle", Box::new(|| vec![selector_oracle()])),
        ("6+8 desk suite", Box::new(|| {
            let (six, eight) = desk_suite_runs();
            vec![six, eight]
        })),
        ("7 partitioner properties", Box::new(|| vec![partitioner_properties()])),
        ("9 determinism", Box::new(|| vec![determinism()])),
    ];
    let mut failed = 0;
    for (name, run) in criteria.drain(..) {
        if !wanted(name) {
            continue;
        }
        let start = Instant::now();
        let outcomes = match catch_unwind(AssertUnwindSafe(run)) {
            Ok(o) => o,
            Err(_) => vec![asserted(false, "panicked".into())],
        };
        let secs = start.elapsed().as_secs_f64();
        let labels: Vec<String> = if outcomes.len() == 2 {
            vec!["criterion 6 mapping validity".into(), "criterion 8 directional metrics".into()]
        } else {
            vec![format!("criterion {name}")]
        };
        for (label, o) in labels.iter().zip(&outcomes) {
            let tag = match (o.pass, o.asserted) {
                (true, _) => "PASS",
                (false, true) => "FAIL",
                (false, false) => "MISS",
            };
            println!("[{tag}] {label}: {} ({secs:.1}s)", o.detail);
            failed += usize::from(!o.pass && o.asserted);
        }
    }
    if failed > 0 {
        println!("acceptance: {failed} criteria failed");
        std::process::exit(1);
    }
    println!("acceptance: all asserted criteria passed");
}
