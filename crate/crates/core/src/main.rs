use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use num_rational::Ratio;
use serde_json::json;

use dqc_layout::benchgen::{Benchmark, Family};
use dqc_layout::cidq::{extract_cidq_sets, CostMode};
use dqc_layout::circuit::{parse_circuit, Circuit};
use dqc_layout::control::{load_topology, DeviceGraph, LayoutDocument, LogicalPhysicalMap, Target};
use dqc_layout::oracle::brute_force_placement;
use dqc_layout::pipeline::{initial_layout, route_with_layout, transpile, MetricsReport, TranspileOptions};
use dqc_layout::placement::{initial_placement, PlacementOptions};
use dqc_layout::scheduler::RoutingMode;
use dqc_layout::sweep::{mean_reduction, parse_range_list, run_sweep, write_csv, ControllerKind, SweepSpec};

#[derive(Parser)]
#[command(name = "dqc-layout", version, about = "Controller-aware layout synthesis for dynamic quantum circuits")]
struct Cli {
    /// Seed for every random choice.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = CostMode::Pair)]
    cost_mode: CostMode,
    /// Worker threads for `sweep`.
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a benchmark circuit.
    Gen {
        #[arg(value_enum)]
        family: Family,
        #[arg(long)]
        n: usize,
        /// Block count for `random`.
        #[arg(long)]
        blocks: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Feedforward-aware initial placement only.
    Place {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long, default_value_t = 1)]
        sweeps: usize,
        #[arg(long)]
        emit_layout: Option<PathBuf>,
    },
    /// Route from a given or computed layout.
    Route {
        #[command(flatten)]
        input: InputArgs,
        /// Layout document, or `auto` for the mode's own initial layout.
        #[arg(long, default_value = "auto")]
        layout: String,
        #[command(flatten)]
        routing: RoutingArgs,
    },
    /// Placement followed by routing.
    Transpile {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        routing: RoutingArgs,
        #[arg(long)]
        emit_layout: Option<PathBuf>,
    },
    /// Paired class/baseline runs over benchmarks, controller counts and seeds.
    Sweep {
        /// Comma-separated benchmark names, e.g. `pe-20,random-30,cc-12`.
        #[arg(long, value_delimiter = ',', required = true)]
        bench: Vec<String>,
        /// Controller counts, e.g. `4..8`.
        #[arg(long, default_value = "4")]
        k: String,
        /// Seeds, e.g. `0..9`.
        #[arg(long, default_value = "0")]
        seeds: String,
        #[arg(long, default_value = "heavy_hex_127")]
        device: String,
        #[arg(long, value_enum, default_value_t = ControllerKind::Star)]
        controllers: ControllerKind,
        #[arg(long, default_value_t = 1)]
        sweeps: usize,
        /// CSV destination; stdout if absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exhaustive optimum of the placement objective (small instances).
    Oracle {
        #[command(flatten)]
        input: InputArgs,
    },
}

#[derive(Args)]
struct InputArgs {
    /// Circuit file, or a benchmark name such as `dqft20` or `pe-20`.
    #[arg(long)]
    circuit: String,
    /// Topology document. Alternative to `--k`/`--device`.
    #[arg(long, conflicts_with_all = ["k", "device", "controllers"])]
    topology: Option<PathBuf>,
    /// Number of controllers, contiguous blocks over the device.
    #[arg(long)]
    k: Option<usize>,
    /// `heavy_hex_127`, `line:N`, `grid:RxC` or an edge-list file.
    #[arg(long)]
    device: Option<String>,
    #[arg(long, value_enum)]
    controllers: Option<ControllerKind>,
}

#[derive(Args)]
struct RoutingArgs {
    #[arg(long, value_enum, default_value_t = RoutingMode::Class)]
    mode: RoutingMode,
    /// Depth-cost difference still treated as a tie.
    #[arg(long, default_value_t = 0.0)]
    tie_epsilon: f64,
    #[arg(long, default_value_t = 1)]
    sweeps: usize,
    /// Report destination; stdout if absent.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Routed circuit destination.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Gen { family, n, blocks, out } => {
            let bench = Benchmark { family, n, blocks, seed: cli.seed };
            let circuit = bench.generate().map_err(anyhow::Error::msg)?;
            emit(out.as_deref(), &circuit.to_qasm())
        }
        Command::Place { input, sweeps, emit_layout } => {
            let (circuit, name) = load_circuit(&input.circuit, cli.seed)?;
            let target = load_target(&input)?;
            let ld = extract_cidq_sets(&circuit);
            let opts = PlacementOptions { mode: cli.cost_mode, seed: cli.seed, sweeps };
            let p = initial_placement(circuit.n_qubits(), &ld, &target.controllers, &target.topology, &opts)?;
            if let Some(path) = emit_layout {
                write_json(&path, &p.mapping.to_document())?;
            }
            let summary = json!({
                "circuit": name,
                "cost_mode": cli.cost_mode,
                "seed": cli.seed,
                "stage1_iccs": p.stage1_cost,
                "iccs": p.cost,
                "layout": p.mapping.to_document().layout,
            });
            emit(None, &serde_json::to_string_pretty(&summary)?)
        }
        Command::Route { input, layout, routing } => {
            let (circuit, name) = load_circuit(&input.circuit, cli.seed)?;
            let target = load_target(&input)?;
            let opts = routing.options(cli.cost_mode, cli.seed)?;
            let mapping = if layout == "auto" {
                initial_layout(&circuit, &target, &opts)?
            } else {
                let text = fs::read_to_string(&layout).with_context(|| format!("reading {layout}"))?;
                let doc: LayoutDocument = serde_json::from_str(&text).with_context(|| format!("parsing {layout}"))?;
                LogicalPhysicalMap::from_document(&doc)?
            };
            let t = route_with_layout(&circuit, &name, &target, mapping, &opts)?;
            finish(&routing, &t.report, &t.physical)
        }
        Command::Transpile { input, routing, emit_layout } => {
            let (circuit, name) = load_circuit(&input.circuit, cli.seed)?;
            let target = load_target(&input)?;
            let opts = routing.options(cli.cost_mode, cli.seed)?;
            let t = transpile(&circuit, &name, &target, &opts)?;
            if let Some(path) = emit_layout {
                write_json(&path, &t.layout.to_document())?;
            }
            finish(&routing, &t.report, &t.physical)
        }
        Command::Sweep { bench, k, seeds, device, controllers, sweeps, out } => {
            let benchmarks = bench
                .iter()
                .map(|b| b.parse::<Benchmark>().map_err(anyhow::Error::msg))
                .collect::<Result<Vec<_>>>()?;
            let spec = SweepSpec {
                benchmarks,
                ks: parse_range_list(&k).map_err(anyhow::Error::msg)?.into_iter().map(|v| v as usize).collect(),
                seeds: parse_range_list(&seeds).map_err(anyhow::Error::msg)?,
                device: parse_device(&device)?,
                controllers,
                cost_mode: cli.cost_mode,
                sweeps,
                jobs: cli.jobs.max(1),
            };
            let rows = run_sweep(&spec)?;
            match &out {
                Some(path) => write_csv(&rows, fs::File::create(path).with_context(|| format!("creating {}", path.display()))?)?,
                None => write_csv(&rows, io::stdout().lock())?,
            }
            let failed = rows.iter().filter(|r| !r.error.is_empty()).count();
            match mean_reduction(&rows) {
                Some(m) => eprintln!("{} cells, {failed} failed, mean iccs reduction {m:.2}%", rows.len()),
                None => eprintln!("{} cells, {failed} failed, no cell with non-zero baseline iccs", rows.len()),
            }
            Ok(())
        }
        Command::Oracle { input } => {
            let (circuit, name) = load_circuit(&input.circuit, cli.seed)?;
            let target = load_target(&input)?;
            let ld = extract_cidq_sets(&circuit);
            let r = brute_force_placement(&ld, &target.controllers, &target.topology, cli.cost_mode, circuit.n_qubits())?;
            let summary = json!({
                "circuit": name,
                "cost_mode": cli.cost_mode,
                "optimum": r.cost,
                "controllers": r.controllers,
                "layout": r.mapping.to_document().layout,
                "assignments_visited": r.visited,
            });
            emit(None, &serde_json::to_string_pretty(&summary)?)
        }
    }
}

impl RoutingArgs {
    fn options(&self, cost_mode: CostMode, seed: u64) -> Result<TranspileOptions> {
        if !(self.tie_epsilon >= 0.0 && self.tie_epsilon.is_finite()) {
            bail!("--tie-epsilon must be a finite non-negative number");
        }
        let tie_epsilon = Ratio::<i64>::approximate_float(self.tie_epsilon)
            .with_context(|| format!("--tie-epsilon {} is not representable", self.tie_epsilon))?;
        Ok(TranspileOptions { mode: self.mode, cost_mode, seed, sweeps: self.sweeps, tie_epsilon })
    }
}

fn finish(routing: &RoutingArgs, report: &MetricsReport, physical: &Circuit) -> Result<()> {
    if let Some(path) = &routing.out {
        fs::write(path, physical.to_qasm()).with_context(|| format!("writing {}", path.display()))?;
    }
    let text = serde_json::to_string_pretty(report)?;
    emit(routing.report.as_deref(), &text)
}

fn load_circuit(spec: &str, seed: u64) -> Result<(Circuit, String)> {
    let path = Path::new(spec);
    if path.is_file() {
        let text = fs::read_to_string(path).with_context(|| format!("reading {spec}"))?;
        let circuit = parse_circuit(&text).with_context(|| format!("parsing {spec}"))?;
        let name = path.file_stem().map_or(spec.to_string(), |s| s.to_string_lossy().into_owned());
        return Ok((circuit, name));
    }
    let bench: Benchmark = spec
        .parse()
        .map_err(|e: String| anyhow::anyhow!("`{spec}` is neither a file nor a benchmark name ({e})"))?;
    let bench = bench.with_seed(seed);
    Ok((bench.generate().map_err(anyhow::Error::msg)?, bench.to_string()))
}

fn load_target(input: &InputArgs) -> Result<Target> {
    if let Some(path) = &input.topology {
        return Ok(load_topology(path).with_context(|| format!("loading {}", path.display()))?.0);
    }
    let k = input.k.context("either --topology or --k is required")?;
    let device = parse_device(input.device.as_deref().unwrap_or("heavy_hex_127"))?;
    if k == 0 {
        bail!("--k must be at least 1");
    }
    let kind = input.controllers.unwrap_or_default();
    Ok(Target::with_topology(kind.build(k), device)?)
}

fn parse_device(spec: &str) -> Result<DeviceGraph> {
    let dims = |s: &str| -> Result<usize> { s.parse().with_context(|| format!("bad device size in `{spec}`")) };
    Ok(match spec.split_once(':') {
        _ if spec == "heavy_hex_127" => DeviceGraph::heavy_hex_127(),
        Some(("line", m)) => DeviceGraph::line(dims(m)?)?,
        Some(("grid", rc)) => {
            let (r, c) = rc.split_once('x').with_context(|| format!("expected grid:RxC, got `{spec}`"))?;
            DeviceGraph::grid(dims(r)?, dims(c)?)?
        }
        _ => DeviceGraph::load_edge_list(Path::new(spec))?,
    })
}

fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<()> {
    fs::write(path, serde_json::to_string_pretty(value)? + "\n").with_context(|| format!("writing {}", path.display()))
}

fn emit(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text.to_string() + "\n").with_context(|| format!("writing {}", p.display())),
        None => {
            let mut out = io::stdout().lock();
            writeln!(out, "{text}")?;
            Ok(())
        }
    }
}
