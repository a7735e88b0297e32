//! Feedforward-aware initial placement.
//!
//! Stage 1 greedily allocates controllers in descending hypergraph degree so
//! that strongly inter-dependent qubits share a controller. Stage 2 runs one
//! Kernighan-Lin style moving pass per controller, each exploring
//! relocations and exchanges between that controller and all others.

use std::cmp::Reverse;
use std::collections::{BTreeSet, BinaryHeap};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::cidq::{total_cost, CidqList, CostMode, FeedforwardHypergraph};
use crate::control::{controller_of, ControllerTopology, LogicalPhysicalMap, QubitControllerMap};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PlacementError {
    #[error("{qubits} logical qubits do not fit into {capacity} physical qubits")]
    Infeasible { qubits: usize, capacity: usize },
    #[error("feedforward sets reference qubit {qubit}, circuit has {n_qubits}")]
    QubitOutOfRange { qubit: usize, n_qubits: usize },
    #[error("invalid movement: {0}")]
    InvalidMovement(String),
}

/// One candidate step of a moving pass.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Movement {
    /// Move `q` from controller `from` into a free slot of `to`.
    Relocate { q: usize, from: usize, to: usize },
    /// Swap the physical qubits of `a` and `b`.
    Exchange { a: usize, b: usize },
}

impl Movement {
    fn qubits(&self) -> ([usize; 2], usize) {
        match *self {
            Movement::Relocate { q, .. } => ([q, q], 1),
            Movement::Exchange { a, b } => ([a, b], 2),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PlacementOptions {
    pub mode: CostMode,
    pub seed: u64,
    /// Number of times the controller loop of stage 2 is repeated.
    pub sweeps: usize,
}

impl Default for PlacementOptions {
    fn default() -> Self {
        PlacementOptions { mode: CostMode::Pair, seed: 0, sweeps: 1 }
    }
}

#[derive(Clone, Debug)]
pub struct Placement {
    pub mapping: LogicalPhysicalMap,
    pub stage1_cost: u64,
    pub cost: u64,
}

/// Both stages. The result is complete, injective and never costlier than
/// the stage-1 mapping.
pub fn initial_placement(
    n_qubits: usize,
    ld: &CidqList,
    mc: &QubitControllerMap,
    topo: &ControllerTopology,
    opts: &PlacementOptions,
) -> Result<Placement, PlacementError> {
    let hg = FeedforwardHypergraph::build(ld, n_qubits);
    let stage1 = stage1_greedy(n_qubits, mc, ld, &hg, opts.seed)?;
    let stage1_cost = cost_of(ld, &stage1, mc, topo, opts.mode);
    let mapping = stage2_iterate(&stage1, mc, ld, topo, opts.mode, opts.sweeps);
    let cost = cost_of(ld, &mapping, mc, topo, opts.mode);
    assert!(cost <= stage1_cost, "stage 2 increased the cost: {stage1_cost} -> {cost}");
    Ok(Placement { mapping, stage1_cost, cost })
}

fn cost_of(
    ld: &CidqList,
    mq: &LogicalPhysicalMap,
    mc: &QubitControllerMap,
    topo: &ControllerTopology,
    mode: CostMode,
) -> u64 {
    total_cost(ld, mq, mc, topo, mode).expect("placement mappings are complete")
}

/// Greedy controller allocation.
///
/// Qubits are visited by descending degree (lower index first on ties) and
/// sent to the controller holding most of their placed neighbours, breaking
/// score ties by more free capacity and then lower index. A qubit with no
/// placed neighbour goes to a random controller among those with the most
/// free capacity. Qubits outside every set are placed last, preferring the
/// fullest controller that still has room. The physical qubit is always the
/// lowest free one of the chosen controller.
pub fn stage1_greedy(
    n_qubits: usize,
    mc: &QubitControllerMap,
    ld: &CidqList,
    hg: &FeedforwardHypergraph,
    seed: u64,
) -> Result<LogicalPhysicalMap, PlacementError> {
    if n_qubits > mc.m() {
        return Err(PlacementError::Infeasible { qubits: n_qubits, capacity: mc.m() });
    }
    if ld.qubit_bound() > n_qubits {
        return Err(PlacementError::QubitOutOfRange { qubit: ld.qubit_bound() - 1, n_qubits });
    }
    let k = mc.k();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut free: Vec<BTreeSet<usize>> = (0..k).map(|c| mc.members(c).iter().copied().collect()).collect();
    let mut ctrl: Vec<Option<usize>> = vec![None; n_qubits];
    let mut mq = LogicalPhysicalMap::new(n_qubits, mc.m());

    let mut order: Vec<usize> = (0..n_qubits).collect();
    order.sort_by_key(|&q| (Reverse(hg.degree(q)), q));
    let mut score = vec![0usize; k];
    for &q in &order {
        let chosen = if hg.degree(q) == 0 {
            let placed: Vec<usize> = (0..k).map(|c| mc.capacity(c) - free[c].len()).collect();
            (0..k)
                .filter(|&c| !free[c].is_empty())
                .max_by_key(|&c| (placed[c], Reverse(c)))
                .expect("capacity checked above")
        } else {
            score.iter_mut().for_each(|s| *s = 0);
            let mut any = false;
            for &nb in hg.neighbors(q) {
                if let Some(c) = ctrl[nb] {
                    score[c] += 1;
                    any = true;
                }
            }
            if any {
                (0..k)
                    .filter(|&c| !free[c].is_empty())
                    .max_by_key(|&c| (score[c], free[c].len(), Reverse(c)))
                    .expect("capacity checked above")
            } else {
                let most = free.iter().map(BTreeSet::len).max().unwrap_or(0);
                let roomiest: Vec<usize> = (0..k).filter(|&c| free[c].len() == most).collect();
                roomiest[rng.random_range(0..roomiest.len())]
            }
        };
        let slot = free[chosen].pop_first().expect("chosen controller has a free slot");
        mq.assign(q, slot).expect("fresh slot");
        ctrl[q] = Some(chosen);
    }
    Ok(mq)
}

/// Sequential application of one moving pass per controller, in index
/// order, each starting from the best mapping found so far.
pub fn stage2_iterate(
    mq: &LogicalPhysicalMap,
    mc: &QubitControllerMap,
    ld: &CidqList,
    topo: &ControllerTopology,
    mode: CostMode,
    sweeps: usize,
) -> LogicalPhysicalMap {
    let k = mc.k();
    let mut best = mq.clone();
    let mut best_cost = cost_of(ld, &best, mc, topo, mode);
    for _ in 0..sweeps {
        let before = best_cost;
        for ci in 0..k {
            let others: Vec<usize> = (0..k).filter(|&c| c != ci).collect();
            let candidate = qubit_moving_pass(&best, ci, &others, ld, mc, topo, mode);
            let cost = cost_of(ld, &candidate.mapping, mc, topo, mode);
            if cost < best_cost {
                best = candidate.mapping;
                best_cost = cost;
            }
        }
        if best_cost == before {
            break;
        }
    }
    best
}

/// A movement as it was applied, with the slot a relocation landed in.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AppliedMove {
    pub movement: Movement,
    pub slot: Option<usize>,
    pub gain: i64,
}

#[derive(Clone, Debug)]
pub struct PassOutcome {
    pub mapping: LogicalPhysicalMap,
    /// Cost reduction of the returned mapping over the input.
    pub gain: i64,
    /// Every movement applied while exploring, in order.
    pub log: Vec<AppliedMove>,
    /// Length of the kept prefix of `log`.
    pub kept: usize,
}

/// One Kernighan-Lin style pass between `ci` and `others`.
///
/// The maximal-gain movement is applied repeatedly, its qubits locked, until
/// no valid movement remains. Gains touched by a move are refreshed lazily
/// when their entry surfaces. The prefix of the move log with the largest
/// positive cumulative gain is then replayed on the input mapping.
pub fn qubit_moving_pass(
    mq: &LogicalPhysicalMap,
    ci: usize,
    others: &[usize],
    ld: &CidqList,
    mc: &QubitControllerMap,
    topo: &ControllerTopology,
    mode: CostMode,
) -> PassOutcome {
    let hg = FeedforwardHypergraph::build(ld, mq.n_logical());
    let mut state = GainState::new(mq, mc, ld, &hg, topo, mode);
    let others: BTreeSet<usize> = others.iter().copied().filter(|&c| c != ci).collect();

    let residents: Vec<usize> = (0..mq.n_logical()).filter(|&q| state.ctrl[q] == ci).collect();
    let outsiders: Vec<usize> = (0..mq.n_logical()).filter(|&q| others.contains(&state.ctrl[q])).collect();
    let mut pool = Vec::new();
    for &q in &residents {
        for &to in &others {
            if !state.free[to].is_empty() {
                pool.push(Movement::Relocate { q, from: ci, to });
            }
        }
        for &b in &outsiders {
            pool.push(Movement::Exchange { a: q, b });
        }
    }

    // Entries are (gain, earliest enumeration index first, step scored at).
    let mut heap: BinaryHeap<(i64, Reverse<usize>, usize)> = pool
        .iter()
        .enumerate()
        .map(|(i, mv)| (state.gain(mv), Reverse(i), 0))
        .collect();
    let mut locked = vec![false; mq.n_logical()];
    let mut touched = vec![0usize; mq.n_logical()];
    let mut step = 0;
    let mut log = Vec::new();
    while let Some((gain, Reverse(i), scored)) = heap.pop() {
        let mv = pool[i];
        let (qs, nq) = mv.qubits();
        if qs[..nq].iter().any(|&q| locked[q]) {
            continue;
        }
        if let Movement::Relocate { to, .. } = mv {
            if state.free[to].is_empty() {
                continue;
            }
        }
        if qs[..nq].iter().any(|&q| touched[q] > scored) {
            heap.push((state.gain(&mv), Reverse(i), step));
            continue;
        }
        debug_assert_eq!(gain, state.gain(&mv));
        let slot = state.apply(&mv);
        step += 1;
        for &q in &qs[..nq] {
            locked[q] = true;
            touched[q] = step;
            for &nb in hg.neighbors(q) {
                touched[nb] = step;
            }
        }
        log.push(AppliedMove { movement: mv, slot, gain });
    }

    let mut best = (0i64, 0usize);
    let mut running = 0;
    for (l, applied) in log.iter().enumerate() {
        running += applied.gain;
        if running > best.0 {
            best = (running, l + 1);
        }
    }
    let mut mapping = mq.clone();
    for applied in &log[..best.1] {
        replay(&mut mapping, applied);
    }
    PassOutcome { mapping, gain: best.0, log, kept: best.1 }
}

fn replay(mq: &mut LogicalPhysicalMap, applied: &AppliedMove) {
    match applied.movement {
        Movement::Relocate { q, .. } => {
            mq.relocate(q, applied.slot.expect("relocations record their slot"))
                .expect("replayed relocation targets a free slot");
        }
        Movement::Exchange { a, b } => mq.exchange(a, b).expect("replayed exchange is valid"),
    }
}

/// Cost reduction of applying `mv` to `mq`, evaluated over the sets that
/// contain a moved qubit. Positive means cheaper.
pub fn movement_gain(
    mv: &Movement,
    mq: &LogicalPhysicalMap,
    ld: &CidqList,
    mc: &QubitControllerMap,
    topo: &ControllerTopology,
    mode: CostMode,
) -> Result<i64, PlacementError> {
    let ctrl = |q| controller_of(mq, mc, q).map_err(|e| PlacementError::InvalidMovement(e.to_string()));
    let mut after = mq.clone();
    match *mv {
        Movement::Relocate { q, from, to } => {
            if ctrl(q)? != from {
                return Err(PlacementError::InvalidMovement(format!("qubit {q} is not on controller {from}")));
            }
            if from == to {
                return Ok(0);
            }
            let slot = mc
                .members(to)
                .iter()
                .copied()
                .find(|&p| mq.logical(p).is_none())
                .ok_or_else(|| PlacementError::InvalidMovement(format!("controller {to} is full")))?;
            after.relocate(q, slot).expect("free slot");
        }
        Movement::Exchange { a, b } => {
            if ctrl(a)? == ctrl(b)? {
                return Ok(0);
            }
            after.exchange(a, b).expect("both assigned");
        }
    }
    let (qs, nq) = mv.qubits();
    let mut gain = 0i64;
    for set in ld.iter().filter(|s| qs[..nq].iter().any(|&q| s.contains(q))) {
        let before = crate::cidq::cidq_cost(set, mq, mc, topo, mode).expect("complete mapping");
        let now = crate::cidq::cidq_cost(set, &after, mc, topo, mode).expect("complete mapping");
        gain += before as i64 - now as i64;
    }
    Ok(gain)
}

/// Incremental per-set tallies: the measuring controller and the number of
/// targets on each controller, which is all a set's cost depends on.
struct GainState<'a> {
    ld: &'a CidqList,
    hg: &'a FeedforwardHypergraph,
    mc: &'a QubitControllerMap,
    topo: &'a ControllerTopology,
    mode: CostMode,
    ctrl: Vec<usize>,
    phys: Vec<usize>,
    free: Vec<BTreeSet<usize>>,
    source: Vec<usize>,
    counts: Vec<Vec<u32>>,
    cost: Vec<u64>,
}

impl<'a> GainState<'a> {
    fn new(
        mq: &LogicalPhysicalMap,
        mc: &'a QubitControllerMap,
        ld: &'a CidqList,
        hg: &'a FeedforwardHypergraph,
        topo: &'a ControllerTopology,
        mode: CostMode,
    ) -> Self {
        let k = mc.k();
        let phys: Vec<usize> = (0..mq.n_logical())
            .map(|q| mq.physical(q).expect("moving pass needs a complete mapping"))
            .collect();
        let ctrl: Vec<usize> = phys.iter().map(|&p| mc.controller_of(p)).collect();
        let free = (0..k)
            .map(|c| mc.members(c).iter().copied().filter(|&p| mq.logical(p).is_none()).collect())
            .collect();
        let mut state = GainState {
            ld,
            hg,
            mc,
            topo,
            mode,
            ctrl,
            phys,
            free,
            source: Vec::with_capacity(ld.len()),
            counts: Vec::with_capacity(ld.len()),
            cost: Vec::with_capacity(ld.len()),
        };
        for set in ld.iter() {
            let mut counts = vec![0u32; k];
            for &t in &set.targets {
                counts[state.ctrl[t]] += 1;
            }
            let src = state.ctrl[set.measured];
            state.cost.push(tally_cost(src, &counts, topo, mode));
            state.source.push(src);
            state.counts.push(counts);
        }
        state
    }

    fn moved(&self, mv: &Movement) -> ([(usize, usize); 2], usize) {
        match *mv {
            Movement::Relocate { q, to, .. } => ([(q, to), (q, to)], 1),
            Movement::Exchange { a, b } => ([(a, self.ctrl[b]), (b, self.ctrl[a])], 2),
        }
    }

    fn affected(&self, moved: &[(usize, usize)]) -> Vec<usize> {
        let mut sets: Vec<usize> = moved.iter().flat_map(|&(q, _)| self.hg.incident(q).iter().copied()).collect();
        sets.sort_unstable();
        sets.dedup();
        sets
    }

    fn gain(&self, mv: &Movement) -> i64 {
        let (moved, n) = self.moved(mv);
        let moved = &moved[..n];
        let mut scratch = Vec::new();
        let mut gain = 0i64;
        for s in self.affected(moved) {
            let (_, cost) = self.rescored(s, moved, &mut scratch);
            gain += self.cost[s] as i64 - cost as i64;
        }
        gain
    }

    /// Source controller and cost of set `s` after `moved`, with the new
    /// target counts left in `scratch`.
    fn rescored(&self, s: usize, moved: &[(usize, usize)], scratch: &mut Vec<u32>) -> (usize, u64) {
        let set = self.ld.get(s);
        scratch.clear();
        scratch.extend_from_slice(&self.counts[s]);
        let mut src = self.source[s];
        for &(q, to) in moved {
            if set.measured == q {
                src = to;
            }
            if set.targets.binary_search(&q).is_ok() {
                scratch[self.ctrl[q]] -= 1;
                scratch[to] += 1;
            }
        }
        (src, tally_cost(src, scratch, self.topo, self.mode))
    }

    /// Applies `mv`; returns the slot a relocation landed in.
    fn apply(&mut self, mv: &Movement) -> Option<usize> {
        let (moved, n) = self.moved(mv);
        let moved = &moved[..n];
        let mut scratch = Vec::new();
        for s in self.affected(moved) {
            let (src, cost) = self.rescored(s, moved, &mut scratch);
            self.source[s] = src;
            self.cost[s] = cost;
            self.counts[s].copy_from_slice(&scratch);
        }
        match *mv {
            Movement::Relocate { q, to, .. } => {
                let slot = self.free[to].pop_first().expect("relocation target has room");
                let old = self.phys[q];
                self.free[self.mc.controller_of(old)].insert(old);
                self.phys[q] = slot;
                self.ctrl[q] = to;
                Some(slot)
            }
            Movement::Exchange { a, b } => {
                self.phys.swap(a, b);
                self.ctrl.swap(a, b);
                None
            }
        }
    }
}

fn tally_cost(source: usize, counts: &[u32], topo: &ControllerTopology, mode: CostMode) -> u64 {
    counts
        .iter()
        .enumerate()
        .filter(|&(_, &n)| n > 0)
        .map(|(c, &n)| {
            let hop = u64::from(topo.hop(source, c));
            match mode {
                CostMode::Pair => hop,
                CostMode::PerTarget => hop * u64::from(n),
            }
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::benchgen::gen_dqft;
    use crate::cidq::extract_cidq_sets;

    fn two_by_two() -> (QubitControllerMap, ControllerTopology) {
        (QubitControllerMap::contiguous(4, 2).unwrap(), ControllerTopology::star(2))
    }

    #[test]
    fn dqft4_reaches_two() {
        let ld = extract_cidq_sets(&gen_dqft(4));
        let (mc, topo) = two_by_two();
        for seed in 0..20 {
            let p = initial_placement(4, &ld, &mc, &topo, &PlacementOptions { seed, ..Default::default() }).unwrap();
            assert!(matches!(p.stage1_cost, 2 | 3));
            assert_eq!(p.cost, 2, "seed {seed}");
            let c0 = mc.controller_of(p.mapping.physical(0).unwrap());
            assert_eq!(c0, mc.controller_of(p.mapping.physical(1).unwrap()));
        }
    }

    #[test]
    fn single_qubit() {
        let ld = extract_cidq_sets(&gen_dqft(1));
        let (mc, topo) = two_by_two();
        let p = initial_placement(1, &ld, &mc, &topo, &PlacementOptions::default()).unwrap();
        assert_eq!(p.cost, 0);
        assert!(p.mapping.physical(0).is_some());
    }

    #[test]
    fn hub_fits_one_controller() {
        let ld = CidqList::from_sets([(0, vec![1, 2, 3, 4])]);
        let mc = QubitControllerMap::contiguous(10, 2).unwrap();
        let topo = ControllerTopology::star(2);
        let mq = stage1_greedy(5, &mc, &ld, &FeedforwardHypergraph::build(&ld, 5), 3).unwrap();
        let c = mc.controller_of(mq.physical(0).unwrap());
        assert!((1..5).all(|q| mc.controller_of(mq.physical(q).unwrap()) == c));
        assert_eq!(cost_of(&ld, &mq, &mc, &topo, CostMode::Pair), 0);
    }

    #[test]
    fn empty_sets_place_everything() {
        let ld = CidqList::from_sets(Vec::<(usize, Vec<usize>)>::new());
        let (mc, topo) = two_by_two();
        let p = initial_placement(3, &ld, &mc, &topo, &PlacementOptions::default()).unwrap();
        assert!((0..3).all(|q| p.mapping.physical(q).is_some()));
        assert!(p.mapping.is_consistent());
    }

    #[test]
    fn infeasible_capacity() {
        let ld = extract_cidq_sets(&gen_dqft(5));
        let (mc, topo) = two_by_two();
        assert_eq!(
            initial_placement(5, &ld, &mc, &topo, &PlacementOptions::default()).unwrap_err(),
            PlacementError::Infeasible { qubits: 5, capacity: 4 }
        );
    }

    /// Three controllers; q7 shares a set with two qubits on controller 1
    /// and one on its own controller 2, and controller 1 has a free slot 8.
    /// Every other movement out of controller 2 gains at most 0.
    fn relocation_instance() -> (CidqList, QubitControllerMap, LogicalPhysicalMap) {
        let mc = QubitControllerMap::new(vec![0, 0, 0, 1, 1, 0, 2, 2, 1], 3).unwrap();
        let ld = CidqList::from_sets([(3, vec![7]), (4, vec![7]), (7, vec![6])]);
        let mq = LogicalPhysicalMap::from_physical(&[0, 1, 2, 3, 4, 5, 6, 7], 9).unwrap();
        (ld, mc, mq)
    }

    #[test]
    fn relocation_gain_is_one_and_applied_first() {
        let (ld, mc, mq) = relocation_instance();
        let topo = ControllerTopology::star(3);
        let mv = Movement::Relocate { q: 7, from: 2, to: 1 };
        assert_eq!(movement_gain(&mv, &mq, &ld, &mc, &topo, CostMode::Pair).unwrap(), 1);
        let out = qubit_moving_pass(&mq, 2, &[0, 1], &ld, &mc, &topo, CostMode::Pair);
        assert_eq!(out.log[0].movement, mv);
        assert_eq!(out.log[0].slot, Some(8));
        assert_eq!(out.gain, 1);
        assert_eq!(cost_of(&ld, &out.mapping, &mc, &topo, CostMode::Pair), 1);
    }

    #[test]
    fn gain_edge_cases() {
        let (ld, mc, mq) = relocation_instance();
        let topo = ControllerTopology::star(3);
        let same = Movement::Exchange { a: 6, b: 7 };
        assert_eq!(movement_gain(&same, &mq, &ld, &mc, &topo, CostMode::Pair).unwrap(), 0);
        let full = Movement::Relocate { q: 7, from: 2, to: 0 };
        assert!(movement_gain(&full, &mq, &ld, &mc, &topo, CostMode::Pair).is_err());
        let wrong = Movement::Relocate { q: 7, from: 0, to: 1 };
        assert!(movement_gain(&wrong, &mq, &ld, &mc, &topo, CostMode::Pair).is_err());
    }

    #[test]
    fn no_improving_prefix_keeps_input() {
        // already optimal: everything on controller 0
        let ld = CidqList::from_sets([(0, vec![1])]);
        let mc = QubitControllerMap::contiguous(4, 2).unwrap();
        let topo = ControllerTopology::star(2);
        let mq = LogicalPhysicalMap::from_physical(&[0, 1], 4).unwrap();
        let out = qubit_moving_pass(&mq, 0, &[1], &ld, &mc, &topo, CostMode::Pair);
        assert_eq!(out.kept, 0);
        assert_eq!(out.mapping.forward(), mq.forward());
    }

    #[test]
    fn single_controller_is_a_no_op() {
        let ld = extract_cidq_sets(&gen_dqft(3));
        let mc = QubitControllerMap::contiguous(3, 1).unwrap();
        let topo = ControllerTopology::star(1);
        let mq = LogicalPhysicalMap::from_physical(&[2, 0, 1], 3).unwrap();
        let out = stage2_iterate(&mq, &mc, &ld, &topo, CostMode::Pair, 1);
        assert_eq!(out.forward(), mq.forward());
    }

    #[test]
    fn dqft20_fits_one_controller() {
        let ld = extract_cidq_sets(&gen_dqft(20));
        let mc = QubitControllerMap::contiguous(127, 4).unwrap();
        let topo = ControllerTopology::star(4);
        for mode in [CostMode::Pair, CostMode::PerTarget] {
            let p = initial_placement(20, &ld, &mc, &topo, &PlacementOptions { mode, ..Default::default() }).unwrap();
            assert_eq!(p.cost, 0);
        }
    }
}
