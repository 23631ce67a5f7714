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

//! Benchmark circuits and the CSV harness behind `topas bench`.

use std::f64::consts::{FRAC_PI_4, PI};
use std::io::Write;
use std::path::Path;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{compile_with_table, Mode, PipelineConfig, RoutabilityTable};
use crate::circuit::{emit_qasm, parse_qasm, Circuit, Gate};
use crate::error::{Result, TopasError};

fn push(c: &mut Circuit, g: Gate) {
    c.push(g).expect("generator stays in range");
}

/// Controlled phase `diag(1, 1, 1, e^{i theta})` up to global phase.
fn cphase(c: &mut Circuit, theta: f64, control: usize, target: usize) {
    push(c, Gate::rz(control, theta / 2.0));
    push(c, Gate::cnot(control, target));
    push(c, Gate::rz(target, -theta / 2.0));
    push(c, Gate::cnot(control, target));
    push(c, Gate::rz(target, theta / 2.0));
}

/// Toffoli with the usual 6-CNOT, T-gate decomposition.
fn ccx(c: &mut Circuit, a: usize, b: usize, t: usize) {
    let tg = |q| Gate::rz(q, FRAC_PI_4);
    let tdg = |q| Gate::rz(q, -FRAC_PI_4);
    for g in [
        Gate::h(t),
        Gate::cnot(b, t),
        tdg(t),
        Gate::cnot(a, t),
        tg(t),
        Gate::cnot(b, t),
        tdg(t),
        Gate::cnot(a, t),
        tg(b),
        tg(t),
        Gate::h(t),
        Gate::cnot(a, b),
        tg(a),
        tdg(b),
        Gate::cnot(a, b),
    ] {
        push(c, g);
    }
}

/// Quantum Fourier transform without the final qubit reversal.
pub fn qft(n: usize) -> Circuit {
    let mut c = Circuit::new(n);
    for j in 0..n {
        push(&mut c, Gate::h(j));
        for k in j + 1..n {
            cphase(&mut c, PI / f64::powi(2.0, (k - j) as i32), k, j);
        }
    }
    c
}

/// Ripple-carry adder on `bits`-bit registers: carry-in on qubit 0, then
/// `b_i, a_i` pairs, carry-out last (`2 * bits + 2` qubits).
pub fn cuccaro_adder(bits: usize) -> Circuit {
    assert!(bits >= 1);
    let n = 2 * bits + 2;
    let b = |i: usize| 1 + 2 * i;
    let a = |i: usize| 2 + 2 * i;
    let carry = |i: usize| if i == 0 { 0 } else { a(i - 1) };
    let mut c = Circuit::new(n);
    for i in 0..bits {
        // MAJ
        push(&mut c, Gate::cnot(a(i), b(i)));
        push(&mut c, Gate::cnot(a(i), carry(i)));
        ccx(&mut c, carry(i), b(i), a(i));
    }
    push(&mut c, Gate::cnot(a(bits - 1), n - 1));
    for i in (0..bits).rev() {
        // UMA
        ccx(&mut c, carry(i), b(i), a(i));
        push(&mut c, Gate::cnot(a(i), carry(i)));
        push(&mut c, Gate::cnot(carry(i), b(i)));
    }
    c
}

/// `cnots` CNOTs on random pairs, each followed by random `U3`s on both ends.
pub fn random_circuit(n: usize, cnots: usize, seed: u64) -> Circuit {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let u3 = |q: usize, rng: &mut ChaCha8Rng| {
        Gate::u3(q, rng.random_range(0.0..PI), rng.random_range(-PI..PI), rng.random_range(-PI..PI))
    };
    let mut c = Circuit::new(n);
    for q in 0..n {
        let g = u3(q, &mut rng);
        push(&mut c, g);
    }
    for _ in 0..cnots {
        let a = rng.random_range(0..n);
        let b = (a + rng.random_range(1..n)) % n;
        push(&mut c, Gate::cnot(a, b));
        let (ga, gb) = (u3(a, &mut rng), u3(b, &mut rng));
        push(&mut c, ga);
        push(&mut c, gb);
    }
    c
}

/// The ten-circuit desk suite (all at most 8 qubits).
pub fn desk_suite() -> Vec<(String, Circuit)> {
    vec![
        ("qft_4".into(), qft(4)),
        ("qft_5".into(), qft(5)),
        ("qft_6".into(), qft(6)),
        ("adder_1".into(), cuccaro_adder(1)),
        ("adder_2".into(), cuccaro_adder(2)),
        ("adder_3".into(), cuccaro_adder(3)),
        ("random_4_20".into(), random_circuit(4, 20, 11)),
        ("random_5_30".into(), random_circuit(5, 30, 12)),
        ("random_6_30".into(), random_circuit(6, 30, 13)),
        ("random_8_40".into(), random_circuit(8, 40, 14)),
    ]
}

/// Writes the desk suite as `<name>.qasm` files.
pub fn write_suite(dir: &Path) -> Result<Vec<String>> {
    std::fs::create_dir_all(dir)?;
    let mut names = Vec::new();
    for (name, c) in desk_suite() {
        std::fs::write(dir.join(format!("{name}.qasm")), emit_qasm(&c))?;
        names.push(name);
    }
    Ok(names)
}

/// Every `*.qasm` file in `dir`, sorted by file name.
pub fn load_dir(dir: &Path) -> Result<Vec<(String, Circuit)>> {
    let mut paths: Vec<_> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "qasm"))
        .collect();
    paths.sort();
    paths
        .into_iter()
        .map(|p| {
            let name = p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
            let text = std::fs::read_to_string(&p)?;
            Ok((name, parse_qasm(&text)?))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub benchmark: String,
    pub mode: Mode,
    pub cnots_in: usize,
    pub cnots_out: usize,
    pub depth_in: usize,
    pub depth_out: usize,
    #[serde(rename = "N")]
    pub partitions: usize,
    pub sum_distance: f64,
    pub swaps: usize,
    pub seconds: f64,
}

/// Compiles every circuit in every mode.
pub fn run_bench(circuits: &[(String, Circuit)], cfg: &PipelineConfig, modes: &[Mode]) -> Result<Vec<BenchRow>> {
    let mut table = RoutabilityTable::shipped();
    table.harness = cfg.routability.clone();
    let mut rows = Vec::new();
    for (name, c) in circuits {
        for &mode in modes {
            let cfg = PipelineConfig { mode, ..cfg.clone() };
            let start = Instant::now();
            let out = compile_with_table(c, &cfg, &mut table)?;
            let r = &out.report;
            rows.push(BenchRow {
                benchmark: name.clone(),
                mode,
                cnots_in: r.input.cnot_count,
                cnots_out: r.output.cnot_count,
                depth_in: r.input.depth,
                depth_out: r.output.depth,
                partitions: r.partition_count,
                sum_distance: r.distance_sum,
                swaps: r.routing.swap_count,
                seconds: start.elapsed().as_secs_f64(),
            });
        }
    }
    Ok(rows)
}

pub fn write_csv<W: Write>(rows: &[BenchRow], w: W) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    for r in rows {
        wr.serialize(r).map_err(|e| TopasError::Config(e.to_string()))?;
    }
    wr.flush()?;
    Ok(())
}

/// Per-benchmark comparisons across modes.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct BenchSummary {
    pub benchmarks: usize,
    /// Benchmarks where `topas` emits no more CNOTs than `map_only`.
    pub topas_at_most_map_only: usize,
    /// Benchmarks where `post_mapping` forms at least as many partitions.
    pub post_mapping_at_least_topas_partitions: usize,
}

pub fn summarize(rows: &[BenchRow]) -> BenchSummary {
    let mut names: Vec<&str> = rows.iter().map(|r| r.benchmark.as_str()).collect();
    names.dedup();
    let find = |name: &str, mode| rows.iter().find(|r| r.benchmark == name && r.mode == mode);
    let mut s = BenchSummary {
        benchmarks: names.len(),
        ..BenchSummary::default()
    };
    for name in names {
        let (t, m, p) = (find(name, Mode::Topas), find(name, Mode::MapOnly), find(name, Mode::PostMapping));
        if let (Some(t), Some(m)) = (t, m) {
            s.topas_at_most_map_only += usize::from(t.cnots_out <= m.cnots_out);
        }
        if let (Some(t), Some(p)) = (t, p) {
            s.post_mapping_at_least_topas_partitions += usize::from(p.partitions >= t.partitions);
        }
    }
    s
}
