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

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use topas::circuit::{emit_qasm, parse_qasm};
use topas::pipeline::bench::{load_dir, run_bench, summarize, write_csv, write_suite};
use topas::pipeline::routability::{HarnessConfig, RoutabilityTable};
use topas::pipeline::{compile, Mode, PipelineConfig};
use topas::topology::build_topology;
use topas::{Result, TopasError};

#[derive(Parser)]
#[command(name = "topas", version, about = "Topology-aware circuit synthesis and mapping")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compile an OpenQASM 2 circuit for a device.
    Compile {
        input: PathBuf,
        #[command(flatten)]
        opts: PipelineOpts,
        /// Routed circuit (stdout if omitted).
        #[arg(long)]
        out: Option<PathBuf>,
        /// JSON run report.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Measure internal SWAPs per CNOT for every small connected graph.
    Routability {
        #[arg(long, default_value = "mesh:6x6")]
        topology: String,
        #[arg(long, default_value_t = 200)]
        corpus_size: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Merge results into this table file (created if missing).
        #[arg(long)]
        table: Option<PathBuf>,
    },
    /// Compile every `*.qasm` in a directory in each mode; CSV to stdout or --out.
    Bench {
        dir: PathBuf,
        #[command(flatten)]
        opts: PipelineOpts,
        /// Comma-separated modes.
        #[arg(long, default_value = "topas,post_mapping,map_only")]
        modes: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write the ten-circuit desk suite as QASM files.
    GenSuite { dir: PathBuf },
}

#[derive(Args)]
struct PipelineOpts {
    #[arg(long)]
    topology: Option<String>,
    #[arg(long)]
    block_size: Option<usize>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    mode: Option<String>,
    #[arg(long)]
    threshold: Option<f64>,
    #[arg(long)]
    threads: Option<usize>,
    /// Enable adjacent identical-CNOT cancellation.
    #[arg(long)]
    prepass: bool,
    /// TOML config; its keys override the flags.
    #[arg(long)]
    config: Option<PathBuf>,
}

impl PipelineOpts {
    fn resolve(&self, base: PipelineConfig) -> Result<PipelineConfig> {
        let mut cfg = base;
        if let Some(t) = &self.topology {
            cfg.topology = t.clone();
        }
        if let Some(k) = self.block_size {
            cfg.block_size = k;
        }
        if let Some(e) = self.epsilon {
            cfg.epsilon = e;
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(m) = &self.mode {
            cfg.mode = m.parse()?;
        }
        if let Some(t) = self.threshold {
            cfg.replacement_threshold = t;
        }
        if let Some(n) = self.threads {
            cfg.threads = n;
        }
        cfg.prepass |= self.prepass;
        if let Some(path) = &self.config {
            cfg = cfg.overlay_toml(&std::fs::read_to_string(path)?)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn write_or_print(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => Ok(std::fs::write(p, text)?),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Compile {
            input,
            opts,
            out,
            report,
        } => {
            let cfg = opts.resolve(PipelineConfig::default())?;
            let c = parse_qasm(&std::fs::read_to_string(&input)?)?;
            let result = compile(&c, &cfg)?;
            write_or_print(out.as_deref(), &emit_qasm(&result.mapped.circuit))?;
            if let Some(path) = report {
                std::fs::write(path, result.report.to_json() + "\n")?;
            }
            let r = &result.report;
            eprintln!(
                "{}: cnots {} -> {}, depth {} -> {}, N={}, swaps={}, distance sum {:.3e} (bound {:.3e})",
                r.mode,
                r.input.cnot_count,
                r.output.cnot_count,
                r.input.depth,
                r.output.depth,
                r.partition_count,
                r.routing.swap_count,
                r.distance_sum,
                r.error_bound
            );
            Ok(())
        }
        Command::Routability {
            topology,
            corpus_size,
            seed,
            table,
        } => {
            let phys = build_topology(&topology)?;
            let harness = HarnessConfig {
                corpus_size,
                seed,
                ..HarnessConfig::default()
            };
            let mut t = match &table {
                Some(p) if p.exists() => RoutabilityTable::from_json(&std::fs::read_to_string(p)?)?,
                _ => RoutabilityTable::empty(harness.clone()),
            };
            t.harness = harness;
            t.measure_topology(&phys, 4);
            for (key, v) in &t.entries[&phys.family()] {
                println!("{}\t{key}\t{v:.4}", phys.family());
            }
            if let Some(p) = table {
                std::fs::write(p, t.to_json() + "\n")?;
            }
            Ok(())
        }
        Command::Bench { dir, opts, modes, out } => {
            let base = PipelineConfig {
                topology: "mesh:3x3".into(),
                ..PipelineConfig::default()
            };
            let cfg = opts.resolve(base)?;
            let modes: Vec<Mode> = modes.split(',').map(|m| m.trim().parse()).collect::<Result<_>>()?;
            let circuits = if dir.is_dir() { load_dir(&dir)? } else { Vec::new() };
            if circuits.is_empty() {
                return Err(TopasError::Config(format!("no .qasm files in {}", dir.display())));
            }
            let rows = run_bench(&circuits, &cfg, &modes)?;
            match &out {
                Some(p) => write_csv(&rows, std::fs::File::create(p)?)?,
                None => write_csv(&rows, std::io::stdout().lock())?,
            }
            let s = summarize(&rows);
            eprintln!(
                "topas <= map_only CNOTs on {}/{}; post_mapping partitions >= topas on {}/{}",
                s.topas_at_most_map_only, s.benchmarks, s.post_mapping_at_least_topas_partitions, s.benchmarks
            );
            Ok(())
        }
        Command::GenSuite { dir } => {
            for name in write_suite(&dir)? {
                println!("{}", dir.join(format!("{name}.qasm")).display());
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
