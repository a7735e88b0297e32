//! Paired class/baseline runs over a grid of benchmarks, controller counts
//! and seeds, written as one CSV row per cell.

use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::benchgen::{Benchmark, Family};
use crate::cidq::CostMode;
use crate::control::{ControllerTopology, DeviceGraph, Target};
use crate::pipeline::{transpile, MetricsReport, TranspileOptions};
use crate::scheduler::RoutingMode;
use crate::Error;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum ControllerKind {
    #[default]
    Star,
    #[value(name = "star_via_router", alias = "star-via-router")]
    StarViaRouter,
    Line,
}

impl ControllerKind {
    pub fn build(&self, k: usize) -> ControllerTopology {
        match self {
            ControllerKind::Star => ControllerTopology::star(k),
            ControllerKind::StarViaRouter => ControllerTopology::star_via_router(k),
            ControllerKind::Line => ControllerTopology::line(k),
        }
    }
}

#[derive(Clone, Debug)]
pub struct SweepSpec {
    pub benchmarks: Vec<Benchmark>,
    pub ks: Vec<usize>,
    pub seeds: Vec<u64>,
    pub device: DeviceGraph,
    pub controllers: ControllerKind,
    pub cost_mode: CostMode,
    pub sweeps: usize,
    pub jobs: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub benchmark: String,
    pub qubits: usize,
    pub k: usize,
    pub seed: u64,
    pub class_iccs: Option<u64>,
    pub baseline_iccs: Option<u64>,
    pub reduction_pct: Option<f64>,
    pub class_operations: Option<usize>,
    pub baseline_operations: Option<usize>,
    pub class_depth: Option<usize>,
    pub baseline_depth: Option<usize>,
    pub class_swaps: Option<usize>,
    pub baseline_swaps: Option<usize>,
    pub placement_ms: Option<f64>,
    pub error: String,
}

/// Runs every (benchmark, k, seed) cell, in parallel up to `jobs`. A
/// failing cell is recorded with its error and the sweep continues.
pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<SweepRow>, Error> {
    let cells: Vec<(Benchmark, usize, u64)> = spec
        .benchmarks
        .iter()
        .flat_map(|b| spec.ks.iter().flat_map(move |&k| spec.seeds.iter().map(move |&s| (*b, k, s))))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(spec.jobs)
        .build()
        .map_err(|e| Error::Invalid(e.to_string()))?;
    Ok(pool.install(|| cells.par_iter().map(|&(b, k, seed)| run_cell(spec, b, k, seed)).collect()))
}

fn run_cell(spec: &SweepSpec, bench: Benchmark, k: usize, seed: u64) -> SweepRow {
    let mut row = SweepRow {
        benchmark: bench.to_string(),
        qubits: bench.n,
        k,
        seed,
        class_iccs: None,
        baseline_iccs: None,
        reduction_pct: None,
        class_operations: None,
        baseline_operations: None,
        class_depth: None,
        baseline_depth: None,
        class_swaps: None,
        baseline_swaps: None,
        placement_ms: None,
        error: String::new(),
    };
    match run_pair(spec, bench, k, seed) {
        Ok((class, base)) => {
            row.class_iccs = Some(class.iccs);
            row.baseline_iccs = Some(base.iccs);
            row.reduction_pct = reduction_pct(class.iccs, base.iccs);
            row.class_operations = Some(class.operations);
            row.baseline_operations = Some(base.operations);
            row.class_depth = Some(class.depth);
            row.baseline_depth = Some(base.depth);
            row.class_swaps = Some(class.swaps_inserted);
            row.baseline_swaps = Some(base.swaps_inserted);
            row.placement_ms = Some(class.placement_runtime_ms);
        }
        Err(e) => row.error = e.to_string(),
    }
    row
}

fn run_pair(spec: &SweepSpec, bench: Benchmark, k: usize, seed: u64) -> Result<(MetricsReport, MetricsReport), Error> {
    let bench = if bench.family == Family::Random { bench.with_seed(seed) } else { bench };
    let circuit = bench.generate().map_err(Error::Invalid)?;
    let target = Target::with_topology(spec.controllers.build(k), spec.device.clone())?;
    let name = bench.to_string();
    let opts = |mode| TranspileOptions { mode, cost_mode: spec.cost_mode, seed, sweeps: spec.sweeps, ..Default::default() };
    let class = transpile(&circuit, &name, &target, &opts(RoutingMode::Class))?.report;
    let base = transpile(&circuit, &name, &target, &opts(RoutingMode::Baseline))?.report;
    Ok((class, base))
}

/// Percentage by which `class` undercuts `baseline`; undefined when the
/// baseline is already zero.
pub fn reduction_pct(class: u64, baseline: u64) -> Option<f64> {
    (baseline > 0).then(|| 100.0 * (baseline as f64 - class as f64) / baseline as f64)
}

/// Mean of the defined per-cell reductions.
pub fn mean_reduction(rows: &[SweepRow]) -> Option<f64> {
    let r: Vec<f64> = rows.iter().filter_map(|r| r.reduction_pct).collect();
    (!r.is_empty()).then(|| r.iter().sum::<f64>() / r.len() as f64)
}

pub fn write_csv<W: Write>(rows: &[SweepRow], out: W) -> Result<(), Error> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

/// Parses `4`, `4,6,8`, `4..8` (inclusive) and `20..100:20` (with step),
/// or any comma-separated mix of them.
pub fn parse_range_list(text: &str) -> Result<Vec<u64>, String> {
    let mut out = Vec::new();
    for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let bad = || format!("bad range `{part}`");
        match part.split_once("..") {
            None => out.push(part.parse().map_err(|_| bad())?),
            Some((lo, rest)) => {
                let (hi, step) = match rest.split_once(':') {
                    Some((hi, step)) => (hi, step.parse::<u64>().map_err(|_| bad())?),
                    None => (rest, 1),
                };
                let lo: u64 = lo.parse().map_err(|_| bad())?;
                let hi: u64 = hi.parse().map_err(|_| bad())?;
                if step == 0 || lo > hi {
                    return Err(bad());
                }
                out.extend((lo..=hi).step_by(step as usize));
            }
        }
    }
    if out.is_empty() {
        return Err(format!("empty range `{text}`"));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges() {
        assert_eq!(parse_range_list("4..8").unwrap(), vec![4, 5, 6, 7, 8]);
        assert_eq!(parse_range_list("20..100:20").unwrap(), vec![20, 40, 60, 80, 100]);
        assert_eq!(parse_range_list("1, 3,5..6").unwrap(), vec![1, 3, 5, 6]);
        assert!(parse_range_list("8..4").is_err());
        assert!(parse_range_list("1..4:0").is_err());
        assert!(parse_range_list("x").is_err());
        assert!(parse_range_list("").is_err());
    }

    #[test]
    fn reductions() {
        assert_eq!(reduction_pct(5, 10), Some(50.0));
        assert_eq!(reduction_pct(0, 0), None);
        assert_eq!(reduction_pct(12, 10), Some(-20.0));
    }

    #[test]
    fn single_cell_matches_transpile_and_keeps_going_on_errors() {
        let spec = SweepSpec {
            benchmarks: vec![Benchmark::new(Family::Dqft, 6), Benchmark::new(Family::Dqft, 40)],
            ks: vec![2],
            seeds: vec![7],
            device: DeviceGraph::grid(3, 3).unwrap(),
            controllers: ControllerKind::Star,
            cost_mode: CostMode::Pair,
            sweeps: 1,
            jobs: 2,
        };
        let rows = run_sweep(&spec).unwrap();
        assert_eq!(rows.len(), 2);
        assert!(rows[0].error.is_empty());
        assert!(!rows[1].error.is_empty());

        let target = Target::star(2, spec.device.clone()).unwrap();
        let c = Benchmark::new(Family::Dqft, 6).generate().unwrap();
        let opts = TranspileOptions { seed: 7, ..Default::default() };
        let direct = transpile(&c, "dqft-6", &target, &opts).unwrap().report;
        assert_eq!(rows[0].class_iccs, Some(direct.iccs));
        assert_eq!(rows[0].class_operations, Some(direct.operations));

        let mut buf = Vec::new();
        write_csv(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("benchmark,qubits,k,seed,class_iccs"));
        assert_eq!(text.lines().count(), 3);
    }
}
