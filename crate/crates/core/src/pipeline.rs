//! Placement followed by routing, and the metrics report both produce.

use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cidq::{extract_cidq_sets, total_cost, CostMode};
use crate::circuit::{Circuit, OpDag};
use crate::control::{LogicalPhysicalMap, Target};
use crate::placement::{initial_placement, PlacementOptions};
use crate::scheduler::{accumulate_iccs, schedule, RoutedCircuit, RouterConfig, RoutingMode, Score};
use crate::Error;

pub const REPORT_SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq)]
pub struct TranspileOptions {
    pub mode: RoutingMode,
    pub cost_mode: CostMode,
    pub seed: u64,
    pub sweeps: usize,
    pub tie_epsilon: Score,
}

impl Default for TranspileOptions {
    fn default() -> Self {
        TranspileOptions {
            mode: RoutingMode::Class,
            cost_mode: CostMode::Pair,
            seed: 0,
            sweeps: 1,
            tie_epsilon: Score::from_integer(0),
        }
    }
}

impl TranspileOptions {
    pub fn router(&self) -> RouterConfig {
        RouterConfig {
            mode: self.mode,
            cost_mode: self.cost_mode,
            seed: router_seed(self.seed),
            tie_epsilon: self.tie_epsilon,
            ..RouterConfig::default()
        }
    }
}

/// Seed of the routing RNG, kept apart from the layout stream.
pub fn router_seed(seed: u64) -> u64 {
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).rotate_left(17) ^ 0xD1B5_4A32_D192_ED03
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub controllers: usize,
    pub device_qubits: usize,
    pub hop: Vec<Vec<u32>>,
    pub sweeps: usize,
    pub extended_size: usize,
    pub extended_weight: f64,
    pub tie_epsilon: f64,
}

/// Output document of `route` and `transpile`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub schema_version: u32,
    pub circuit: String,
    pub mode: RoutingMode,
    pub seed: u64,
    pub cost_mode: CostMode,
    pub qubits: usize,
    pub input_operations: usize,
    pub operations: usize,
    pub depth: usize,
    pub iccs: u64,
    /// Static cost of the initial layout.
    pub placement_iccs: u64,
    pub swaps_inserted: usize,
    pub forced_swaps: usize,
    pub placement_runtime_ms: f64,
    pub runtime_ms: f64,
    pub config: ConfigEcho,
}

impl MetricsReport {
    /// The report with timing fields zeroed, for reproducibility checks.
    pub fn without_timing(&self) -> Self {
        MetricsReport { placement_runtime_ms: 0.0, runtime_ms: 0.0, ..self.clone() }
    }
}

#[derive(Clone, Debug)]
pub struct Transpiled {
    pub report: MetricsReport,
    pub layout: LogicalPhysicalMap,
    pub routed: RoutedCircuit,
    pub physical: Circuit,
}

/// Uniformly random complete layout of `n` logical onto `m` physical qubits.
pub fn random_layout(n: usize, m: usize, seed: u64) -> LogicalPhysicalMap {
    let mut slots: Vec<usize> = (0..m).collect();
    slots.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    LogicalPhysicalMap::from_physical(&slots[..n], m).expect("distinct slots")
}

/// Initial layout per mode: feedforward-aware placement for `class`, a
/// seeded random layout for `baseline`.
pub fn initial_layout(circuit: &Circuit, target: &Target, opts: &TranspileOptions) -> Result<LogicalPhysicalMap, Error> {
    if circuit.n_qubits() > target.device.m() {
        return Err(Error::Invalid(format!(
            "circuit has {} qubits, device only {}",
            circuit.n_qubits(),
            target.device.m()
        )));
    }
    Ok(match opts.mode {
        RoutingMode::Class => {
            let ld = extract_cidq_sets(circuit);
            let popts = PlacementOptions { mode: opts.cost_mode, seed: opts.seed, sweeps: opts.sweeps };
            initial_placement(circuit.n_qubits(), &ld, &target.controllers, &target.topology, &popts)?.mapping
        }
        RoutingMode::Baseline => random_layout(circuit.n_qubits(), target.device.m(), opts.seed),
    })
}

/// Routes from a given layout and builds the report.
pub fn route_with_layout(
    circuit: &Circuit,
    name: &str,
    target: &Target,
    layout: LogicalPhysicalMap,
    opts: &TranspileOptions,
) -> Result<Transpiled, Error> {
    route_timed(circuit, name, target, layout, opts, Instant::now(), 0.0)
}

/// Full pipeline for one circuit.
pub fn transpile(circuit: &Circuit, name: &str, target: &Target, opts: &TranspileOptions) -> Result<Transpiled, Error> {
    let start = Instant::now();
    let layout = initial_layout(circuit, target, opts)?;
    let placement_ms = start.elapsed().as_secs_f64() * 1e3;
    route_timed(circuit, name, target, layout, opts, start, placement_ms)
}

fn route_timed(
    circuit: &Circuit,
    name: &str,
    target: &Target,
    layout: LogicalPhysicalMap,
    opts: &TranspileOptions,
    start: Instant,
    placement_ms: f64,
) -> Result<Transpiled, Error> {
    let ld = extract_cidq_sets(circuit);
    let dag = OpDag::build(circuit);
    let router = opts.router();
    let routed = schedule(circuit, &dag, &layout, target, &ld, &router)?;
    let runtime_ms = start.elapsed().as_secs_f64() * 1e3;
    let physical = routed.to_circuit(circuit);
    let iccs = accumulate_iccs(&routed, circuit, &ld, &target.controllers, &target.topology, opts.cost_mode);
    let placement_iccs = total_cost(&ld, &layout, &target.controllers, &target.topology, opts.cost_mode)?;
    let to_f64 = |r: Score| *r.numer() as f64 / *r.denom() as f64;
    let report = MetricsReport {
        schema_version: REPORT_SCHEMA_VERSION,
        circuit: name.to_string(),
        mode: opts.mode,
        seed: opts.seed,
        cost_mode: opts.cost_mode,
        qubits: circuit.n_qubits(),
        input_operations: circuit.count_ops(),
        operations: physical.count_ops(),
        depth: physical.depth(),
        iccs,
        placement_iccs,
        swaps_inserted: routed.swap_count(),
        forced_swaps: routed.forced_swaps(),
        placement_runtime_ms: placement_ms,
        runtime_ms,
        config: ConfigEcho {
            controllers: target.topology.k(),
            device_qubits: target.device.m(),
            hop: target.topology.matrix().to_vec(),
            sweeps: opts.sweeps,
            extended_size: router.extended_size,
            extended_weight: to_f64(router.extended_weight),
            tie_epsilon: to_f64(router.tie_epsilon),
        },
    };
    Ok(Transpiled { report, layout, routed, physical })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::benchgen::{gen_dqft, Benchmark, Family};
    use crate::control::DeviceGraph;

    fn hh(k: usize) -> Target {
        Target::star(k, DeviceGraph::heavy_hex_127()).unwrap()
    }

    #[test]
    fn dqft20_class_is_free() {
        let t = transpile(&gen_dqft(20), "dqft-20", &hh(4), &TranspileOptions::default()).unwrap();
        assert_eq!(t.report.iccs, 0);
        assert_eq!(t.report.swaps_inserted, 0);
        assert_eq!(t.report.operations, 230);
    }

    #[test]
    fn single_controller_is_free() {
        let opts = TranspileOptions { mode: RoutingMode::Baseline, seed: 3, ..Default::default() };
        let t = transpile(&gen_dqft(20), "dqft-20", &hh(1), &opts).unwrap();
        assert_eq!(t.report.iccs, 0);
    }

    #[test]
    fn reports_reproduce() {
        let c = Benchmark::new(Family::Ipe, 8).generate().unwrap();
        for mode in [RoutingMode::Class, RoutingMode::Baseline] {
            let opts = TranspileOptions { mode, seed: 11, ..Default::default() };
            let a = transpile(&c, "ipe-8", &hh(4), &opts).unwrap();
            let b = transpile(&c, "ipe-8", &hh(4), &opts).unwrap();
            assert_eq!(a.report.without_timing(), b.report.without_timing());
            assert_eq!(a.physical.to_qasm(), b.physical.to_qasm());
        }
    }

    #[test]
    fn random_layout_is_injective() {
        let l = random_layout(20, 127, 4);
        assert!(l.is_complete() && l.is_consistent());
        assert_ne!(l.forward(), random_layout(20, 127, 5).forward());
    }

    #[test]
    fn oversized_circuit_is_rejected() {
        let t = Target::star(2, DeviceGraph::line(4).unwrap()).unwrap();
        assert!(transpile(&gen_dqft(5), "dqft-5", &t, &TranspileOptions::default()).is_err());
    }
}
