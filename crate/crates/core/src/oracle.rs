//! Exhaustive reference solver for the placement objective. Kept
//! deliberately naive and independent of the cost code it checks.

use thiserror::Error;

use crate::cidq::{CidqList, CostMode};
use crate::control::{ControllerTopology, LogicalPhysicalMap, QubitControllerMap};

/// Upper bound on enumerated controller assignments.
pub const MAX_ASSIGNMENTS: f64 = 1e7;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("instance needs about {estimate:.3e} assignments, limit is {MAX_ASSIGNMENTS:.0e}")]
    TooLarge { estimate: f64 },
    #[error("{qubits} logical qubits do not fit into {capacity} physical qubits")]
    Infeasible { qubits: usize, capacity: usize },
}

#[derive(Clone, Debug)]
pub struct OracleResult {
    pub cost: u64,
    /// Controller of every logical qubit in one optimal assignment.
    pub controllers: Vec<usize>,
    pub mapping: LogicalPhysicalMap,
    pub visited: u64,
}

/// Minimum total cost over every capacity-respecting assignment of logical
/// qubits to controllers. When all hops are equal and all capacities are
/// equal, controllers are interchangeable and only canonical labelings
/// (each new controller index at most one past the largest used) are
/// enumerated.
pub fn brute_force_placement(
    ld: &CidqList,
    mc: &QubitControllerMap,
    topo: &ControllerTopology,
    mode: CostMode,
    n_qubits: usize,
) -> Result<OracleResult, OracleError> {
    let k = mc.k();
    if n_qubits > mc.m() {
        return Err(OracleError::Infeasible { qubits: n_qubits, capacity: mc.m() });
    }
    let symmetric = topo.is_uniform() && (1..k).all(|c| mc.capacity(c) == mc.capacity(0));
    let mut estimate = (k as f64).powi(n_qubits as i32);
    if symmetric {
        estimate /= (1..=k.min(n_qubits)).map(|x| x as f64).product::<f64>();
    }
    if estimate > MAX_ASSIGNMENTS {
        return Err(OracleError::TooLarge { estimate });
    }

    let sets: Vec<(usize, Vec<usize>)> = ld.iter().map(|s| (s.measured, s.targets.clone())).collect();
    let hop: Vec<Vec<u64>> = (0..k).map(|a| (0..k).map(|b| u64::from(topo.hop(a, b))).collect()).collect();
    let mut search = Search {
        k,
        n: n_qubits,
        symmetric,
        room: (0..k).map(|c| mc.capacity(c)).collect(),
        assign: vec![0; n_qubits],
        best: None,
        visited: 0,
        sets,
        hop,
        mode,
    };
    search.descend(0, 0);
    let (cost, controllers) = search.best.expect("feasible instance has an assignment");

    let mut used = vec![0; k];
    let mut mapping = LogicalPhysicalMap::new(n_qubits, mc.m());
    for (q, &c) in controllers.iter().enumerate() {
        mapping.assign(q, mc.members(c)[used[c]]).expect("slot within capacity");
        used[c] += 1;
    }
    Ok(OracleResult { cost, controllers, mapping, visited: search.visited })
}

struct Search {
    k: usize,
    n: usize,
    symmetric: bool,
    room: Vec<usize>,
    assign: Vec<usize>,
    best: Option<(u64, Vec<usize>)>,
    visited: u64,
    sets: Vec<(usize, Vec<usize>)>,
    hop: Vec<Vec<u64>>,
    mode: CostMode,
}

impl Search {
    fn descend(&mut self, q: usize, used: usize) {
        if q == self.n {
            self.visited += 1;
            let cost = self.cost();
            if self.best.as_ref().is_none_or(|(b, _)| cost < *b) {
                self.best = Some((cost, self.assign.clone()));
            }
            return;
        }
        let limit = if self.symmetric { (used + 1).min(self.k) } else { self.k };
        for c in 0..limit {
            if self.room[c] == 0 {
                continue;
            }
            self.room[c] -= 1;
            self.assign[q] = c;
            self.descend(q + 1, used.max(c + 1));
            self.room[c] += 1;
        }
    }

    fn cost(&self) -> u64 {
        let mut total = 0;
        for (measured, targets) in &self.sets {
            let src = self.assign[*measured];
            let mut controllers: Vec<usize> = targets.iter().map(|&t| self.assign[t]).collect();
            if self.mode == CostMode::Pair {
                controllers.sort_unstable();
                controllers.dedup();
            }
            total += controllers.iter().map(|&c| self.hop[src][c]).sum::<u64>();
        }
        total
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::benchgen::gen_dqft;
    use crate::cidq::extract_cidq_sets;

    #[test]
    fn golden_instance_optimum_is_two() {
        let ld = extract_cidq_sets(&gen_dqft(4));
        let mc = QubitControllerMap::contiguous(4, 2).unwrap();
        let r = brute_force_placement(&ld, &mc, &ControllerTopology::star(2), CostMode::Pair, 4).unwrap();
        assert_eq!(r.cost, 2);
        assert_eq!(r.controllers[0], r.controllers[1]);
        assert_eq!(r.controllers[2], r.controllers[3]);
        // symmetry reduction: only assignments with q0 on controller 0
        assert_eq!(r.visited, 3);
    }

    #[test]
    fn one_controller_is_free() {
        let ld = extract_cidq_sets(&gen_dqft(5));
        let mc = QubitControllerMap::contiguous(5, 1).unwrap();
        let r = brute_force_placement(&ld, &mc, &ControllerTopology::star(1), CostMode::PerTarget, 5).unwrap();
        assert_eq!(r.cost, 0);
    }

    #[test]
    fn asymmetric_hops_enumerate_everything() {
        let ld = CidqList::from_sets([(0, vec![1])]);
        let mc = QubitControllerMap::contiguous(3, 3).unwrap();
        let r = brute_force_placement(&ld, &mc, &ControllerTopology::line(3), CostMode::Pair, 2).unwrap();
        assert_eq!(r.visited, 6);
        assert_eq!(r.cost, 1);
    }

    #[test]
    fn rejects_large_instances() {
        let ld = extract_cidq_sets(&gen_dqft(30));
        let mc = QubitControllerMap::contiguous(40, 4).unwrap();
        let err = brute_force_placement(&ld, &mc, &ControllerTopology::line(4), CostMode::Pair, 30);
        assert!(matches!(err, Err(OracleError::TooLarge { .. })));
    }
}
