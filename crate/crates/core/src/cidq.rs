//! Feedforward structure of a circuit and its communication cost.
//!
//! Every measurement whose result is consumed by at least one conditional
//! operation forms a *conditionally inter-dependent qubit set*: the measured
//! qubit plus the qubits of all operations reading that result. Delivering
//! the result from the measuring controller to each target controller costs
//! the controller hop distance.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::circuit::Circuit;
use crate::control::{
    controller_of, ControllerTopology, LogicalPhysicalMap, MappingError, QubitControllerMap,
};

/// How the cost of one set is counted.
///
/// * `Pair`: every distinct (measuring controller, target controller) pair
///   is charged once.
/// * `PerTarget`: every target qubit is charged the hop from the measuring
///   controller to its own controller.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum CostMode {
    #[default]
    Pair,
    #[value(name = "per_target", alias = "per-target")]
    PerTarget,
}

impl std::fmt::Display for CostMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            CostMode::Pair => "pair",
            CostMode::PerTarget => "per_target",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CidqSet {
    /// 1-based, dense, in program order of the measurements.
    pub id: usize,
    /// The measured qubit.
    pub measured: usize,
    /// Qubits of conditional operations reading this result; sorted, unique.
    pub targets: Vec<usize>,
    /// Index of the measure op (`usize::MAX` for hand-built sets).
    pub source_op: usize,
    /// Indices of the conditional ops, ascending.
    pub target_ops: Vec<usize>,
}

impl CidqSet {
    /// Measured qubit followed by the targets, deduplicated.
    pub fn members(&self) -> Vec<usize> {
        let mut m = self.targets.clone();
        if let Err(pos) = m.binary_search(&self.measured) {
            m.insert(pos, self.measured);
        }
        m
    }

    pub fn contains(&self, q: usize) -> bool {
        self.measured == q || self.targets.binary_search(&q).is_ok()
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CidqList {
    sets: Vec<CidqSet>,
    by_target_op: BTreeMap<usize, Vec<usize>>,
    by_source_op: BTreeMap<usize, usize>,
}

impl CidqList {
    fn from_vec(sets: Vec<CidqSet>) -> Self {
        let mut by_target_op: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        let mut by_source_op = BTreeMap::new();
        for (i, s) in sets.iter().enumerate() {
            if s.source_op != usize::MAX {
                by_source_op.insert(s.source_op, i);
            }
            for &op in &s.target_ops {
                by_target_op.entry(op).or_default().push(i);
            }
        }
        CidqList { sets, by_target_op, by_source_op }
    }

    /// Hand-built list from `(measured, targets)` pairs, with no op
    /// provenance. Used for synthetic instances.
    pub fn from_sets<I, T>(sets: I) -> Self
    where
        I: IntoIterator<Item = (usize, T)>,
        T: IntoIterator<Item = usize>,
    {
        let sets = sets
            .into_iter()
            .enumerate()
            .map(|(i, (measured, targets))| {
                let mut targets: Vec<usize> = targets.into_iter().collect();
                targets.sort_unstable();
                targets.dedup();
                CidqSet {
                    id: i + 1,
                    measured,
                    targets,
                    source_op: usize::MAX,
                    target_ops: Vec::new(),
                }
            })
            .collect();
        Self::from_vec(sets)
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    pub fn sets(&self) -> &[CidqSet] {
        &self.sets
    }

    pub fn get(&self, index: usize) -> &CidqSet {
        &self.sets[index]
    }

    pub fn iter(&self) -> std::slice::Iter<'_, CidqSet> {
        self.sets.iter()
    }

    /// Indices of the sets that list `op` as a conditional target.
    pub fn sets_targeted_by(&self, op: usize) -> &[usize] {
        self.by_target_op.get(&op).map_or(&[], Vec::as_slice)
    }

    /// Index of the set whose measurement is `op`.
    pub fn set_measured_by(&self, op: usize) -> Option<usize> {
        self.by_source_op.get(&op).copied()
    }

    /// Largest qubit index mentioned plus one.
    pub fn qubit_bound(&self) -> usize {
        self.sets
            .iter()
            .flat_map(|s| std::iter::once(s.measured).chain(s.targets.iter().copied()))
            .max()
            .map_or(0, |q| q + 1)
    }
}

/// One set per measurement event with at least one consumer. An op with a
/// multi-bit condition joins the set of every measurement it reads. A
/// condition binds to the latest measure of its bit.
pub fn extract_cidq_sets(circuit: &Circuit) -> CidqList {
    struct Event {
        measured: usize,
        source_op: usize,
        targets: Vec<usize>,
        target_ops: Vec<usize>,
    }
    let mut events: Vec<Event> = Vec::new();
    let mut live: Vec<Option<usize>> = vec![None; circuit.n_clbits()];
    for (i, op) in circuit.ops().iter().enumerate() {
        for bit in op.condition.bits() {
            if let Some(e) = live[bit] {
                let ev = &mut events[e];
                ev.targets.extend(op.qubits.iter().copied());
                if ev.target_ops.last() != Some(&i) {
                    ev.target_ops.push(i);
                }
            }
        }
        if let Some(c) = op.writes_clbit() {
            live[c] = Some(events.len());
            events.push(Event {
                measured: op.qubits[0],
                source_op: i,
                targets: Vec::new(),
                target_ops: Vec::new(),
            });
        }
    }
    let sets = events
        .into_iter()
        .filter(|e| !e.target_ops.is_empty())
        .enumerate()
        .map(|(i, mut e)| {
            e.targets.sort_unstable();
            e.targets.dedup();
            CidqSet {
                id: i + 1,
                measured: e.measured,
                targets: e.targets,
                source_op: e.source_op,
                target_ops: e.target_ops,
            }
        })
        .collect();
    CidqList::from_vec(sets)
}

/// Hypergraph over logical qubits with one hyperedge per set.
#[derive(Clone, Debug)]
pub struct FeedforwardHypergraph {
    edges: Vec<Vec<usize>>,
    incidence: Vec<Vec<usize>>,
    neighbors: Vec<Vec<usize>>,
}

impl FeedforwardHypergraph {
    pub fn build(ld: &CidqList, n_qubits: usize) -> Self {
        let n = n_qubits.max(ld.qubit_bound());
        let edges: Vec<Vec<usize>> = ld.iter().map(CidqSet::members).collect();
        let mut incidence = vec![Vec::new(); n];
        for (e, members) in edges.iter().enumerate() {
            for &q in members {
                incidence[q].push(e);
            }
        }
        let mut neighbors = vec![Vec::new(); n];
        for (q, inc) in incidence.iter().enumerate() {
            let mut ns: Vec<usize> = inc
                .iter()
                .flat_map(|&e| edges[e].iter().copied())
                .filter(|&o| o != q)
                .collect();
            ns.sort_unstable();
            ns.dedup();
            neighbors[q] = ns;
        }
        FeedforwardHypergraph { edges, incidence, neighbors }
    }

    pub fn n_vertices(&self) -> usize {
        self.incidence.len()
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn degree(&self, q: usize) -> usize {
        self.incidence[q].len()
    }

    /// Hyperedges (set indices) containing `q`.
    pub fn incident(&self, q: usize) -> &[usize] {
        &self.incidence[q]
    }

    /// Qubits sharing at least one hyperedge with `q`.
    pub fn neighbors(&self, q: usize) -> &[usize] {
        &self.neighbors[q]
    }

    pub fn edge(&self, e: usize) -> &[usize] {
        &self.edges[e]
    }
}

/// Cost of one set given the measuring controller and the controllers of
/// its targets (one entry per target qubit).
pub fn set_cost_from_controllers<I>(
    source: usize,
    target_controllers: I,
    topo: &ControllerTopology,
    mode: CostMode,
) -> u64
where
    I: IntoIterator<Item = usize>,
{
    match mode {
        CostMode::PerTarget => target_controllers
            .into_iter()
            .map(|c| u64::from(topo.hop(source, c)))
            .sum(),
        CostMode::Pair => {
            let mut seen = vec![false; topo.k()];
            let mut total = 0;
            for c in target_controllers {
                if c != source && !seen[c] {
                    seen[c] = true;
                    total += u64::from(topo.hop(source, c));
                }
            }
            total
        }
    }
}

/// Communication cost of one set under a mapping.
pub fn cidq_cost(
    set: &CidqSet,
    mq: &LogicalPhysicalMap,
    mc: &QubitControllerMap,
    topo: &ControllerTopology,
    mode: CostMode,
) -> Result<u64, MappingError> {
    let source = controller_of(mq, mc, set.measured)?;
    let targets = set
        .targets
        .iter()
        .map(|&t| controller_of(mq, mc, t))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(set_cost_from_controllers(source, targets, topo, mode))
}

/// Sum of the set costs over the whole list.
pub fn total_cost(
    ld: &CidqList,
    mq: &LogicalPhysicalMap,
    mc: &QubitControllerMap,
    topo: &ControllerTopology,
    mode: CostMode,
) -> Result<u64, MappingError> {
    ld.iter().map(|s| cidq_cost(s, mq, mc, topo, mode)).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::benchgen::gen_dqft;
    use crate::circuit::parse_circuit;

    fn fig4_mapping(groups: [[usize; 2]; 2]) -> LogicalPhysicalMap {
        let mut mq = LogicalPhysicalMap::new(4, 4);
        for (c, group) in groups.iter().enumerate() {
            for (slot, &q) in group.iter().enumerate() {
                mq.assign(q, 2 * c + slot).unwrap();
            }
        }
        mq
    }

    #[test]
    fn dqft4_sets() {
        let ld = extract_cidq_sets(&gen_dqft(4));
        let got: Vec<(usize, Vec<usize>)> = ld.iter().map(|s| (s.measured, s.targets.clone())).collect();
        assert_eq!(got, vec![(0, vec![1, 2, 3]), (1, vec![2, 3]), (2, vec![3])]);
        assert_eq!(ld.iter().map(|s| s.id).collect::<Vec<_>>(), vec![1, 2, 3]);
    }

    #[test]
    fn static_circuit_has_no_sets() {
        let c = parse_circuit("qreg q[2]; creg c[2]; h q[0]; cx q[0], q[1]; measure q -> c;").unwrap();
        assert!(extract_cidq_sets(&c).is_empty());
    }

    #[test]
    fn multi_bit_condition_joins_both_sets() {
        let c = parse_circuit(
            "qreg q[3]; creg c[2]; measure q[1] -> c[1]; measure q[0] -> c[0]; if (c[0]==1 && c[1]==1) x q[2];",
        )
        .unwrap();
        let ld = extract_cidq_sets(&c);
        let got: Vec<(usize, Vec<usize>)> = ld.iter().map(|s| (s.measured, s.targets.clone())).collect();
        assert_eq!(got, vec![(1, vec![2]), (0, vec![2])]);
        assert_eq!(ld.sets_targeted_by(2), &[0, 1]);
    }

    #[test]
    fn overwritten_bit_starts_new_event() {
        let c = parse_circuit(
            "qreg q[3]; creg c[1]; measure q[0] -> c[0]; if (c[0]==1) x q[1]; measure q[2] -> c[0]; if (c[0]==1) x q[1]; measure q[1] -> c[0];",
        )
        .unwrap();
        let ld = extract_cidq_sets(&c);
        assert_eq!(ld.len(), 2);
        assert_eq!((ld.get(0).measured, ld.get(1).measured), (0, 2));
        assert_eq!(ld.get(1).target_ops, vec![3]);
    }

    #[test]
    fn fig4_pair_costs() {
        let ld = extract_cidq_sets(&gen_dqft(4));
        let mc = QubitControllerMap::contiguous(4, 2).unwrap();
        let topo = ControllerTopology::star(2);
        let m1 = fig4_mapping([[0, 1], [2, 3]]);
        let per_set: Vec<u64> = ld.iter().map(|s| cidq_cost(s, &m1, &mc, &topo, CostMode::Pair).unwrap()).collect();
        assert_eq!(per_set, vec![1, 1, 0]);
        assert_eq!(total_cost(&ld, &m1, &mc, &topo, CostMode::Pair), Ok(2));
        let m2 = fig4_mapping([[0, 2], [1, 3]]);
        let m3 = fig4_mapping([[0, 3], [1, 2]]);
        assert_eq!(total_cost(&ld, &m2, &mc, &topo, CostMode::Pair), Ok(3));
        assert_eq!(total_cost(&ld, &m3, &mc, &topo, CostMode::Pair), Ok(3));
    }

    #[test]
    fn dqft40_split_per_target() {
        let ld = extract_cidq_sets(&gen_dqft(40));
        let mc = QubitControllerMap::contiguous(64, 2).unwrap();
        let topo = ControllerTopology::star(2);
        // identity layout: q1..q32 on controller 0, q33..q40 on controller 1
        let layout: Vec<usize> = (0..40).collect();
        let mq = LogicalPhysicalMap::from_physical(&layout, 64).unwrap();
        for s in ld.iter().take(32) {
            assert_eq!(cidq_cost(s, &mq, &mc, &topo, CostMode::PerTarget), Ok(8));
        }
        assert_eq!(total_cost(&ld, &mq, &mc, &topo, CostMode::PerTarget), Ok(256));
    }

    #[test]
    fn single_controller_is_free() {
        let ld = extract_cidq_sets(&gen_dqft(6));
        let mc = QubitControllerMap::contiguous(6, 1).unwrap();
        let topo = ControllerTopology::star(1);
        let mq = LogicalPhysicalMap::from_physical(&[5, 3, 1, 0, 2, 4], 6).unwrap();
        for mode in [CostMode::Pair, CostMode::PerTarget] {
            assert_eq!(total_cost(&ld, &mq, &mc, &topo, mode), Ok(0));
        }
        assert_eq!(total_cost(&CidqList::default(), &mq, &mc, &topo, CostMode::Pair), Ok(0));
    }

    #[test]
    fn unassigned_qubit_is_an_error() {
        let ld = extract_cidq_sets(&gen_dqft(3));
        let mc = QubitControllerMap::contiguous(3, 1).unwrap();
        let mq = LogicalPhysicalMap::new(3, 3);
        assert_eq!(
            total_cost(&ld, &mq, &mc, &ControllerTopology::star(1), CostMode::Pair),
            Err(MappingError::Unassigned(0))
        );
    }

    #[test]
    fn hypergraph_degrees() {
        let hg = FeedforwardHypergraph::build(&extract_cidq_sets(&gen_dqft(4)), 4);
        let degrees: Vec<usize> = (0..4).map(|q| hg.degree(q)).collect();
        assert_eq!(degrees, vec![1, 2, 3, 3]);
        assert_eq!(hg.n_edges(), 3);
        let empty = FeedforwardHypergraph::build(&CidqList::default(), 3);
        assert!((0..3).all(|q| empty.degree(q) == 0 && empty.neighbors(q).is_empty()));
    }

    #[test]
    fn dqft_degree_formula() {
        for n in 2..=8 {
            let ld = extract_cidq_sets(&gen_dqft(n));
            assert_eq!(ld.len(), n - 1);
            let hg = FeedforwardHypergraph::build(&ld, n);
            for j in 1..=n {
                // explicit membership count against the nested-set formula
                let members = ld.iter().filter(|s| s.contains(j - 1)).count();
                assert_eq!(hg.degree(j - 1), members);
                assert_eq!(members, j.min(n - 1));
            }
        }
    }
}
