//! Random instances and a from-scratch cost function shared by the
//! integration tests and the acceptance runner.
#![allow(dead_code)]

use dqc_layout::cidq::{CidqList, CostMode};
use dqc_layout::control::{ControllerTopology, LogicalPhysicalMap, QubitControllerMap};
use dqc_layout::placement::Movement;
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub struct Instance {
    pub n: usize,
    pub ld: CidqList,
    pub mc: QubitControllerMap,
    pub topo: ControllerTopology,
}

/// `2..=max_n` logical qubits, `k` contiguous controllers with up to two
/// spare physical qubits, and `1..=n+2` sets with 1-3 targets each.
pub fn random_instance(seed: u64, max_n: usize, k: usize, uniform: bool) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(2..=max_n);
    let m = (n + rng.random_range(0..=2)).max(k);
    let mut sets = Vec::new();
    for _ in 0..rng.random_range(1..=n + 2) {
        let measured = rng.random_range(0..n);
        let others: Vec<usize> = (0..n).filter(|&q| q != measured).collect();
        let count = rng.random_range(1..=others.len().min(3));
        let targets: Vec<usize> = sample(&mut rng, others.len(), count).into_iter().map(|i| others[i]).collect();
        sets.push((measured, targets));
    }
    let topo = if uniform {
        ControllerTopology::star(k)
    } else {
        ControllerTopology::random_metric(k, 4, seed ^ 0x5eed)
    };
    Instance { n, ld: CidqList::from_sets(sets), mc: QubitControllerMap::contiguous(m, k).unwrap(), topo }
}

/// Controller of every logical qubit.
pub fn controllers(mq: &LogicalPhysicalMap, mc: &QubitControllerMap) -> Vec<usize> {
    (0..mq.n_logical()).map(|q| mc.controller_of(mq.physical(q).unwrap())).collect()
}

/// Objective evaluated directly from its definition.
pub fn naive_cost(ld: &CidqList, ctrl: &[usize], topo: &ControllerTopology, mode: CostMode) -> u64 {
    let mut total = 0;
    for set in ld.iter() {
        let src = ctrl[set.measured];
        match mode {
            CostMode::PerTarget => {
                for &t in &set.targets {
                    total += u64::from(topo.hop(src, ctrl[t]));
                }
            }
            CostMode::Pair => {
                for c in 0..topo.k() {
                    if c != src && set.targets.iter().any(|&t| ctrl[t] == c) {
                        total += u64::from(topo.hop(src, c));
                    }
                }
            }
        }
    }
    total
}

/// A uniformly random complete layout.
pub fn random_mapping(rng: &mut ChaCha8Rng, n: usize, m: usize) -> LogicalPhysicalMap {
    let slots: Vec<usize> = sample(rng, m, n).into_iter().collect();
    LogicalPhysicalMap::from_physical(&slots, m).unwrap()
}

/// A valid movement under `mq`, or `None` if only one controller is used.
pub fn random_movement(rng: &mut ChaCha8Rng, mq: &LogicalPhysicalMap, mc: &QubitControllerMap) -> Option<Movement> {
    let ctrl = controllers(mq, mc);
    let n = ctrl.len();
    for _ in 0..32 {
        let q = rng.random_range(0..n);
        if rng.random_bool(0.5) {
            let to = rng.random_range(0..mc.k());
            let has_room = mc.members(to).iter().any(|&p| mq.logical(p).is_none());
            if to != ctrl[q] && has_room {
                return Some(Movement::Relocate { q, from: ctrl[q], to });
            }
        } else {
            let b = rng.random_range(0..n);
            if ctrl[b] != ctrl[q] {
                return Some(Movement::Exchange { a: q, b });
            }
        }
    }
    None
}

pub fn apply(mq: &mut LogicalPhysicalMap, mc: &QubitControllerMap, mv: &Movement) {
    match *mv {
        Movement::Relocate { q, to, .. } => {
            let slot = *mc.members(to).iter().find(|&&p| mq.logical(p).is_none()).unwrap();
            mq.relocate(q, slot).unwrap();
        }
        Movement::Exchange { a, b } => mq.exchange(a, b).unwrap(),
    }
}
