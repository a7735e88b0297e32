//! SWAP-insertion routing with a controller-aware tie-break.
//!
//! The search is the usual greedy front-layer router: execute everything
//! that can run, otherwise score each SWAP touching a blocked gate by the
//! nearest-neighbour distance of the front layer plus a weighted lookahead
//! set. Among SWAPs whose scores tie, `class` mode prefers the one that
//! keeps nearby feedforward sets on as few controllers as possible;
//! `baseline` mode picks uniformly at random.

use std::collections::{BTreeSet, VecDeque};

use num_rational::Ratio;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cidq::{set_cost_from_controllers, CidqList, CostMode};
use crate::circuit::{Circuit, Gate2q, OpDag, Operation};
use crate::control::{ControllerTopology, DeviceGraph, LogicalPhysicalMap, QubitControllerMap, Target};

pub type Score = Ratio<i64>;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum RoutingMode {
    /// Feedforward-aware tie-break.
    #[default]
    Class,
    /// Seeded random tie-break.
    Baseline,
}

impl std::fmt::Display for RoutingMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            RoutingMode::Class => "class",
            RoutingMode::Baseline => "baseline",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RouterConfig {
    pub mode: RoutingMode,
    pub cost_mode: CostMode,
    pub seed: u64,
    pub extended_size: usize,
    pub extended_weight: Score,
    /// Scores within this distance of the minimum count as tied.
    pub tie_epsilon: Score,
}

impl Default for RouterConfig {
    fn default() -> Self {
        RouterConfig {
            mode: RoutingMode::Class,
            cost_mode: CostMode::Pair,
            seed: 0,
            extended_size: 20,
            extended_weight: Ratio::new(1, 2),
            tie_epsilon: Ratio::zero(),
        }
    }
}

/// One op of the routed program. `source` is the index of the input op, or
/// `None` for an inserted SWAP.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RoutedOp {
    pub source: Option<usize>,
    pub physical: Vec<usize>,
}

/// Everything needed to audit one SWAP choice after the fact.
#[derive(Clone, Debug)]
pub struct SwapDecision {
    pub chosen: (usize, usize),
    /// Two-qubit gates of the front layer when the choice was made.
    pub front: Vec<usize>,
    /// Lookahead gates used in the score.
    pub extended: Vec<usize>,
    pub candidates: Vec<(usize, usize)>,
    pub scores: Vec<Score>,
    /// Candidates within `tie_epsilon` of the best score.
    pub tied: Vec<(usize, usize)>,
    /// Feedforward cost of each tied candidate (empty unless the
    /// tie-break ran).
    pub iccs: Vec<u64>,
    /// Inserted by the livelock escape rather than by scoring.
    pub forced: bool,
}

#[derive(Clone, Debug)]
pub struct RoutedCircuit {
    pub n_physical: usize,
    pub ops: Vec<RoutedOp>,
    pub initial_mapping: LogicalPhysicalMap,
    pub final_mapping: LogicalPhysicalMap,
    pub decisions: Vec<SwapDecision>,
}

impl RoutedCircuit {
    pub fn swap_count(&self) -> usize {
        self.ops.iter().filter(|o| o.source.is_none()).count()
    }

    pub fn forced_swaps(&self) -> usize {
        self.decisions.iter().filter(|d| d.forced).count()
    }

    /// The routed program on physical qubits, SWAPs included.
    pub fn to_circuit(&self, input: &Circuit) -> Circuit {
        let ops = self
            .ops
            .iter()
            .map(|r| match r.source {
                Some(i) => Operation { qubits: r.physical.clone(), ..input.ops()[i].clone() },
                None => Operation::gate2(Gate2q::Swap, r.physical[0], r.physical[1]),
            })
            .collect();
        Circuit::new(self.n_physical, input.n_clbits(), ops).expect("routing preserves validity")
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RoutingError {
    #[error("initial layout is incomplete: logical qubit {0} has no physical qubit")]
    IncompleteLayout(usize),
    #[error("circuit uses {circuit} qubits, layout covers {layout}")]
    LayoutSize { circuit: usize, layout: usize },
    #[error("layout targets {layout} physical qubits, device has {device}")]
    DeviceSize { layout: usize, device: usize },
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RoutingViolation {
    #[error("step {step}: SWAP on non-adjacent physical qubits ({a}, {b})")]
    SwapNotAdjacent { step: usize, a: usize, b: usize },
    #[error("step {step}: op {op} acts on non-adjacent physical qubits")]
    GateNotAdjacent { step: usize, op: usize },
    #[error("step {step}: op {op} is placed on {found:?}, its logical qubits sit on {expected:?}")]
    WrongQubits { step: usize, op: usize, found: Vec<usize>, expected: Vec<usize> },
    #[error("step {step}: op {op} runs before its predecessor {pred}")]
    DependencyOrder { step: usize, op: usize, pred: usize },
    #[error("op {0} is emitted twice")]
    Duplicate(usize),
    #[error("op {0} is never emitted")]
    Missing(usize),
    #[error("final mapping disagrees with the replayed SWAPs")]
    FinalMapping,
}

/// Routes `circuit` from the complete layout `mq0`.
pub fn schedule(
    circuit: &Circuit,
    dag: &OpDag,
    mq0: &LogicalPhysicalMap,
    target: &Target,
    ld: &CidqList,
    config: &RouterConfig,
) -> Result<RoutedCircuit, RoutingError> {
    let device = &target.device;
    if mq0.n_logical() < circuit.n_qubits() {
        return Err(RoutingError::LayoutSize { circuit: circuit.n_qubits(), layout: mq0.n_logical() });
    }
    if mq0.n_physical() != device.m() {
        return Err(RoutingError::DeviceSize { layout: mq0.n_physical(), device: device.m() });
    }
    if let Some(q) = (0..circuit.n_qubits()).find(|&q| mq0.physical(q).is_none()) {
        return Err(RoutingError::IncompleteLayout(q));
    }

    let ops = circuit.ops();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut mq = mq0.clone();
    let mut remaining: Vec<usize> = (0..ops.len()).map(|i| dag.preds(i).len()).collect();
    let mut front: BTreeSet<usize> = (0..ops.len()).filter(|&i| remaining[i] == 0).collect();
    let mut sources: Vec<Option<usize>> = vec![None; ld.len()];
    let mut out = Vec::with_capacity(ops.len());
    let mut decisions = Vec::new();
    let mut idle_swaps = 0;
    let phys = |mq: &LogicalPhysicalMap, q: usize| mq.physical(q).expect("complete layout");

    while !front.is_empty() {
        let ready: Vec<usize> = front
            .iter()
            .copied()
            .filter(|&i| !ops[i].is_two_qubit() || device.is_adjacent(phys(&mq, ops[i].qubits[0]), phys(&mq, ops[i].qubits[1])))
            .collect();
        if !ready.is_empty() {
            for i in ready {
                front.remove(&i);
                if let Some(s) = ld.set_measured_by(i) {
                    sources[s] = Some(target.controllers.controller_of(phys(&mq, ld.get(s).measured)));
                }
                out.push(RoutedOp { source: Some(i), physical: ops[i].qubits.iter().map(|&q| phys(&mq, q)).collect() });
                for &s in dag.succs(i) {
                    remaining[s] -= 1;
                    if remaining[s] == 0 {
                        front.insert(s);
                    }
                }
            }
            idle_swaps = 0;
            continue;
        }

        let f2: Vec<usize> = front.iter().copied().collect();
        if idle_swaps >= 3 * device.m() {
            let g = &ops[f2[0]];
            let path = device.shortest_path(phys(&mq, g.qubits[0]), phys(&mq, g.qubits[1]));
            for w in path.windows(2).take(path.len() - 2) {
                let swap = (w[0].min(w[1]), w[0].max(w[1]));
                mq.swap_physical(swap.0, swap.1);
                out.push(RoutedOp { source: None, physical: vec![swap.0, swap.1] });
                decisions.push(SwapDecision {
                    chosen: swap,
                    front: f2.clone(),
                    extended: Vec::new(),
                    candidates: Vec::new(),
                    scores: Vec::new(),
                    tied: Vec::new(),
                    iccs: Vec::new(),
                    forced: true,
                });
            }
            idle_swaps = 0;
            continue;
        }

        let extended = extended_set(&f2, dag, circuit, config.extended_size);
        let candidates = obtain_swaps(&f2, circuit, &mq, device);
        let mut temp = mq.clone();
        let scores: Vec<Score> = candidates
            .iter()
            .map(|&(a, b)| {
                temp.swap_physical(a, b);
                let s = depth_cost(&f2, &extended, circuit, device, &temp, config.extended_weight);
                temp.swap_physical(a, b);
                s
            })
            .collect();
        let best = *scores.iter().min().expect("a blocked gate has incident edges");
        let tied: Vec<(usize, usize)> = candidates
            .iter()
            .zip(&scores)
            .filter(|(_, &s)| s - best <= config.tie_epsilon)
            .map(|(&c, _)| c)
            .collect();

        let mut iccs = Vec::new();
        let chosen = if tied.len() == 1 {
            tied[0]
        } else {
            match config.mode {
                RoutingMode::Baseline => tied[rng.random_range(0..tied.len())],
                RoutingMode::Class => {
                    let active = active_cidq_sets(&f2, dag, ld);
                    iccs = tied
                        .iter()
                        .map(|&(a, b)| {
                            temp.swap_physical(a, b);
                            let s = iccs_score(&temp, &active, ld, &sources, &target.controllers, &target.topology, config.cost_mode);
                            temp.swap_physical(a, b);
                            s
                        })
                        .collect();
                    let low = *iccs.iter().min().expect("non-empty tie");
                    let cheapest: Vec<(usize, usize)> =
                        tied.iter().zip(&iccs).filter(|(_, &s)| s == low).map(|(&c, _)| c).collect();
                    cheapest[rng.random_range(0..cheapest.len())]
                }
            }
        };
        mq.swap_physical(chosen.0, chosen.1);
        out.push(RoutedOp { source: None, physical: vec![chosen.0, chosen.1] });
        decisions.push(SwapDecision {
            chosen,
            front: f2,
            extended,
            candidates,
            scores,
            tied,
            iccs,
            forced: false,
        });
        idle_swaps += 1;
    }

    Ok(RoutedCircuit {
        n_physical: device.m(),
        ops: out,
        initial_mapping: mq0.clone(),
        final_mapping: mq,
        decisions,
    })
}

/// Device edges touching a physical qubit used by a two-qubit gate of
/// `front`, deduplicated and sorted.
pub fn obtain_swaps(
    front: &[usize],
    circuit: &Circuit,
    mq: &LogicalPhysicalMap,
    device: &DeviceGraph,
) -> Vec<(usize, usize)> {
    let mut edges = BTreeSet::new();
    for &i in front {
        let op = &circuit.ops()[i];
        if !op.is_two_qubit() {
            continue;
        }
        for &q in &op.qubits {
            let p = mq.physical(q).expect("complete layout");
            for &n in device.neighbors(p) {
                edges.insert((p.min(n), p.max(n)));
            }
        }
    }
    edges.into_iter().collect()
}

/// Up to `size` two-qubit gates reached breadth-first from the successors
/// of `front`.
pub fn extended_set(front: &[usize], dag: &OpDag, circuit: &Circuit, size: usize) -> Vec<usize> {
    let mut seen: BTreeSet<usize> = front.iter().copied().collect();
    let mut queue: VecDeque<usize> = front.iter().copied().collect();
    let mut out = Vec::new();
    while let Some(i) = queue.pop_front() {
        for &s in dag.succs(i) {
            if out.len() >= size {
                return out;
            }
            if seen.insert(s) {
                if circuit.ops()[s].is_two_qubit() {
                    out.push(s);
                }
                queue.push_back(s);
            }
        }
    }
    out
}

/// Mean distance over the two-qubit gates of `front` plus `weight` times
/// the mean over `extended`, exactly.
pub fn depth_cost(
    front: &[usize],
    extended: &[usize],
    circuit: &Circuit,
    device: &DeviceGraph,
    mq: &LogicalPhysicalMap,
    weight: Score,
) -> Score {
    let mean = |gates: &mut dyn Iterator<Item = &usize>| {
        let (mut sum, mut n) = (0i64, 0i64);
        for &i in gates {
            let op = &circuit.ops()[i];
            if op.is_two_qubit() {
                let a = mq.physical(op.qubits[0]).expect("complete layout");
                let b = mq.physical(op.qubits[1]).expect("complete layout");
                sum += i64::from(device.dist(a, b));
                n += 1;
            }
        }
        if n == 0 {
            Ratio::zero()
        } else {
            Ratio::new(sum, n)
        }
    };
    mean(&mut front.iter()) + weight * mean(&mut extended.iter())
}

/// Sets owning a conditional op in `front` or among its direct successors.
pub fn active_cidq_sets(front: &[usize], dag: &OpDag, ld: &CidqList) -> Vec<usize> {
    let mut sets = BTreeSet::new();
    for &i in front {
        sets.extend(ld.sets_targeted_by(i));
        for &s in dag.succs(i) {
            sets.extend(ld.sets_targeted_by(s));
        }
    }
    sets.into_iter().collect()
}

/// Summed cost of the `active` sets under `mq`. A set whose measurement
/// already ran keeps the controller recorded in `sources`.
pub fn iccs_score(
    mq: &LogicalPhysicalMap,
    active: &[usize],
    ld: &CidqList,
    sources: &[Option<usize>],
    mc: &QubitControllerMap,
    topo: &ControllerTopology,
    mode: CostMode,
) -> u64 {
    let ctrl = |q: usize| mc.controller_of(mq.physical(q).expect("complete layout"));
    active
        .iter()
        .map(|&s| {
            let set = ld.get(s);
            let src = sources.get(s).copied().flatten().unwrap_or_else(|| ctrl(set.measured));
            set_cost_from_controllers(src, set.targets.iter().map(|&t| ctrl(t)), topo, mode)
        })
        .sum()
}

/// Feedforward cost of an executed program. Each set is charged from the
/// controller that held the measured qubit when it was measured to the
/// controllers that held each target when its conditional ops ran. In
/// per-target mode each distinct (target, controller) pair is charged once.
pub fn accumulate_iccs(
    routed: &RoutedCircuit,
    circuit: &Circuit,
    ld: &CidqList,
    mc: &QubitControllerMap,
    topo: &ControllerTopology,
    mode: CostMode,
) -> u64 {
    let mut mq = routed.initial_mapping.clone();
    let mut sources = vec![None; ld.len()];
    let mut reached: Vec<BTreeSet<(usize, usize)>> = vec![BTreeSet::new(); ld.len()];
    for r in &routed.ops {
        let Some(i) = r.source else {
            mq.swap_physical(r.physical[0], r.physical[1]);
            continue;
        };
        if let Some(s) = ld.set_measured_by(i) {
            sources[s] = Some(mc.controller_of(r.physical[0]));
        }
        for &s in ld.sets_targeted_by(i) {
            for (&q, &p) in circuit.ops()[i].qubits.iter().zip(&r.physical) {
                reached[s].insert((q, mc.controller_of(p)));
            }
        }
    }
    ld.iter()
        .enumerate()
        .map(|(s, _)| match sources[s] {
            Some(src) => set_cost_from_controllers(src, reached[s].iter().map(|&(_, c)| c), topo, mode),
            None => 0,
        })
        .sum()
}

/// Replays the routed program and checks adjacency, operand placement,
/// dependency order and completeness.
pub fn verify_routing(
    circuit: &Circuit,
    dag: &OpDag,
    routed: &RoutedCircuit,
    device: &DeviceGraph,
) -> Result<(), RoutingViolation> {
    let mut mq = routed.initial_mapping.clone();
    let mut done = vec![false; circuit.len()];
    for (step, r) in routed.ops.iter().enumerate() {
        match r.source {
            None => {
                let (a, b) = (r.physical[0], r.physical[1]);
                if !device.is_adjacent(a, b) {
                    return Err(RoutingViolation::SwapNotAdjacent { step, a, b });
                }
                mq.swap_physical(a, b);
            }
            Some(op) => {
                if done[op] {
                    return Err(RoutingViolation::Duplicate(op));
                }
                if let Some(&pred) = dag.preds(op).iter().find(|&&p| !done[p]) {
                    return Err(RoutingViolation::DependencyOrder { step, op, pred });
                }
                let expected: Vec<usize> =
                    circuit.ops()[op].qubits.iter().map(|&q| mq.physical(q).unwrap_or(usize::MAX)).collect();
                if expected != r.physical {
                    return Err(RoutingViolation::WrongQubits { step, op, found: r.physical.clone(), expected });
                }
                if circuit.ops()[op].is_two_qubit() && !device.is_adjacent(r.physical[0], r.physical[1]) {
                    return Err(RoutingViolation::GateNotAdjacent { step, op });
                }
                done[op] = true;
            }
        }
    }
    if let Some(op) = done.iter().position(|&d| !d) {
        return Err(RoutingViolation::Missing(op));
    }
    if mq.forward() != routed.final_mapping.forward() {
        return Err(RoutingViolation::FinalMapping);
    }
    Ok(())
}
