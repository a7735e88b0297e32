use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::TopologyError;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MappingError {
    #[error("logical qubit {0} is not assigned")]
    Unassigned(usize),
    #[error("logical qubit {0} is already assigned")]
    AlreadyAssigned(usize),
    #[error("physical qubit {0} is already occupied")]
    Occupied(usize),
    #[error("qubit index {index} out of range ({len})")]
    OutOfRange { index: usize, len: usize },
    #[error("layout maps two logical qubits to physical qubit {0}")]
    NotInjective(usize),
}

/// Physical-qubit to controller assignment (M^C).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QubitControllerMap {
    assignment: Vec<usize>,
    members: Vec<Vec<usize>>,
}

impl QubitControllerMap {
    pub fn new(assignment: Vec<usize>, k: usize) -> Result<Self, TopologyError> {
        let mut members = vec![Vec::new(); k];
        for (p, &c) in assignment.iter().enumerate() {
            if c >= k {
                return Err(TopologyError::ControllerOutOfRange { qubit: p, controller: c, k });
            }
            members[c].push(p);
        }
        if let Some(c) = members.iter().position(Vec::is_empty) {
            return Err(TopologyError::EmptyController { controller: c });
        }
        Ok(QubitControllerMap { assignment, members })
    }

    /// Consecutive physical indices per controller; block sizes differ by
    /// at most one, larger blocks first.
    pub fn contiguous(m: usize, k: usize) -> Result<Self, TopologyError> {
        if k == 0 || k > m {
            return Err(TopologyError::CapacityMismatch {
                detail: format!("cannot split {m} physical qubits over {k} controllers"),
            });
        }
        let (base, extra) = (m / k, m % k);
        let mut assignment = Vec::with_capacity(m);
        for c in 0..k {
            let size = base + usize::from(c < extra);
            assignment.extend(std::iter::repeat_n(c, size));
        }
        Self::new(assignment, k)
    }

    pub fn k(&self) -> usize {
        self.members.len()
    }

    pub fn m(&self) -> usize {
        self.assignment.len()
    }

    #[inline]
    pub fn controller_of(&self, physical: usize) -> usize {
        self.assignment[physical]
    }

    /// Physical qubits of controller `c`, ascending.
    pub fn members(&self, c: usize) -> &[usize] {
        &self.members[c]
    }

    pub fn capacity(&self, c: usize) -> usize {
        self.members[c].len()
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }
}

/// Logical to physical qubit mapping (M^Q) with its inverse.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LogicalPhysicalMap {
    forward: Vec<Option<usize>>,
    inverse: Vec<Option<usize>>,
}

/// File form of a layout: `layout[q]` is the physical qubit of logical
/// `q`, or -1.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct LayoutDocument {
    pub n_physical: usize,
    pub layout: Vec<i64>,
}

impl LogicalPhysicalMap {
    pub fn new(n_logical: usize, n_physical: usize) -> Self {
        LogicalPhysicalMap {
            forward: vec![None; n_logical],
            inverse: vec![None; n_physical],
        }
    }

    pub fn from_forward(forward: &[Option<usize>], n_physical: usize) -> Result<Self, MappingError> {
        let mut map = Self::new(forward.len(), n_physical);
        for (q, p) in forward.iter().enumerate() {
            if let Some(p) = *p {
                map.assign(q, p).map_err(|e| match e {
                    MappingError::Occupied(p) => MappingError::NotInjective(p),
                    other => other,
                })?;
            }
        }
        Ok(map)
    }

    /// Complete layout from a dense `logical -> physical` vector.
    pub fn from_physical(layout: &[usize], n_physical: usize) -> Result<Self, MappingError> {
        let forward: Vec<Option<usize>> = layout.iter().copied().map(Some).collect();
        Self::from_forward(&forward, n_physical)
    }

    pub fn n_logical(&self) -> usize {
        self.forward.len()
    }

    pub fn n_physical(&self) -> usize {
        self.inverse.len()
    }

    #[inline]
    pub fn physical(&self, q: usize) -> Option<usize> {
        self.forward[q]
    }

    #[inline]
    pub fn logical(&self, p: usize) -> Option<usize> {
        self.inverse[p]
    }

    pub fn is_complete(&self) -> bool {
        self.forward.iter().all(Option::is_some)
    }

    pub fn assign(&mut self, q: usize, p: usize) -> Result<(), MappingError> {
        self.check(q, p)?;
        if self.forward[q].is_some() {
            return Err(MappingError::AlreadyAssigned(q));
        }
        if self.inverse[p].is_some() {
            return Err(MappingError::Occupied(p));
        }
        self.forward[q] = Some(p);
        self.inverse[p] = Some(q);
        Ok(())
    }

    pub fn unassign(&mut self, q: usize) -> Option<usize> {
        let p = self.forward[q].take()?;
        self.inverse[p] = None;
        Some(p)
    }

    /// Moves assigned logical `q` to the free physical `p`.
    pub fn relocate(&mut self, q: usize, p: usize) -> Result<(), MappingError> {
        self.check(q, p)?;
        if self.inverse[p].is_some() {
            return Err(MappingError::Occupied(p));
        }
        let old = self.forward[q].ok_or(MappingError::Unassigned(q))?;
        self.inverse[old] = None;
        self.inverse[p] = Some(q);
        self.forward[q] = Some(p);
        Ok(())
    }

    /// Exchanges the physical positions of two assigned logical qubits.
    pub fn exchange(&mut self, a: usize, b: usize) -> Result<(), MappingError> {
        let pa = self.forward.get(a).copied().flatten().ok_or(MappingError::Unassigned(a))?;
        let pb = self.forward.get(b).copied().flatten().ok_or(MappingError::Unassigned(b))?;
        self.swap_physical(pa, pb);
        Ok(())
    }

    /// Applies a SWAP on physical qubits `a` and `b`; either may be empty.
    pub fn swap_physical(&mut self, a: usize, b: usize) {
        let (la, lb) = (self.inverse[a], self.inverse[b]);
        self.inverse[a] = lb;
        self.inverse[b] = la;
        if let Some(q) = la {
            self.forward[q] = Some(b);
        }
        if let Some(q) = lb {
            self.forward[q] = Some(a);
        }
    }

    fn check(&self, q: usize, p: usize) -> Result<(), MappingError> {
        if q >= self.forward.len() {
            return Err(MappingError::OutOfRange { index: q, len: self.forward.len() });
        }
        if p >= self.inverse.len() {
            return Err(MappingError::OutOfRange { index: p, len: self.inverse.len() });
        }
        Ok(())
    }

    pub fn forward(&self) -> &[Option<usize>] {
        &self.forward
    }

    pub fn to_document(&self) -> LayoutDocument {
        LayoutDocument {
            n_physical: self.n_physical(),
            layout: self
                .forward
                .iter()
                .map(|p| p.map_or(-1, |p| p as i64))
                .collect(),
        }
    }

    pub fn from_document(doc: &LayoutDocument) -> Result<Self, MappingError> {
        let forward: Vec<Option<usize>> = doc
            .layout
            .iter()
            .map(|&p| usize::try_from(p).ok())
            .collect();
        Self::from_forward(&forward, doc.n_physical)
    }

    /// Forward and inverse agree and the map is injective.
    pub fn is_consistent(&self) -> bool {
        self.forward
            .iter()
            .enumerate()
            .all(|(q, p)| p.is_none_or(|p| self.inverse[p] == Some(q)))
            && self
                .inverse
                .iter()
                .enumerate()
                .all(|(p, q)| q.is_none_or(|q| self.forward[q] == Some(p)))
    }
}

/// Controller currently responsible for logical qubit `q`.
pub fn controller_of(
    mq: &LogicalPhysicalMap,
    mc: &QubitControllerMap,
    q: usize,
) -> Result<usize, MappingError> {
    if q >= mq.n_logical() {
        return Err(MappingError::OutOfRange { index: q, len: mq.n_logical() });
    }
    let p = mq.physical(q).ok_or(MappingError::Unassigned(q))?;
    Ok(mc.controller_of(p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn contiguous_blocks() {
        let mc = QubitControllerMap::contiguous(127, 4).unwrap();
        let sizes: Vec<usize> = (0..4).map(|c| mc.capacity(c)).collect();
        assert_eq!(sizes, vec![32, 32, 32, 31]);
        assert_eq!(mc.controller_of(31), 0);
        assert_eq!(mc.controller_of(32), 1);
        assert_eq!(mc.controller_of(126), 3);
        let mc = QubitControllerMap::contiguous(10, 4).unwrap();
        let sizes: Vec<usize> = (0..4).map(|c| mc.capacity(c)).collect();
        assert_eq!(sizes, vec![3, 3, 2, 2]);
        assert!(QubitControllerMap::contiguous(3, 4).is_err());
    }

    #[test]
    fn explicit_assignment_needs_every_controller() {
        assert!(matches!(
            QubitControllerMap::new(vec![0, 0, 2], 3),
            Err(TopologyError::EmptyController { controller: 1 })
        ));
        assert!(QubitControllerMap::new(vec![0, 3], 2).is_err());
    }

    #[test]
    fn controller_of_composes() {
        // two controllers over Q1..Q4 as {Q1,Q2} {Q3,Q4}; identity layout
        let mc = QubitControllerMap::contiguous(4, 2).unwrap();
        let mut mq = LogicalPhysicalMap::from_physical(&[0, 1, 2, 3], 4).unwrap();
        assert_eq!(controller_of(&mq, &mc, 0), Ok(0));
        assert_eq!(controller_of(&mq, &mc, 2), Ok(1));
        // swap across the block boundary moves both qubits' controllers
        mq.swap_physical(1, 2);
        assert_eq!(controller_of(&mq, &mc, 1), Ok(1));
        assert_eq!(controller_of(&mq, &mc, 2), Ok(0));
        let partial = LogicalPhysicalMap::new(2, 4);
        assert_eq!(controller_of(&partial, &mc, 1), Err(MappingError::Unassigned(1)));
        let single = QubitControllerMap::contiguous(4, 1).unwrap();
        assert!((0..4).all(|q| controller_of(&mq, &single, q) == Ok(0)));
    }

    #[test]
    fn document_round_trip_and_injectivity() {
        let mut mq = LogicalPhysicalMap::new(3, 5);
        mq.assign(0, 4).unwrap();
        mq.assign(2, 1).unwrap();
        let doc = mq.to_document();
        assert_eq!(doc.layout, vec![4, -1, 1]);
        assert_eq!(LogicalPhysicalMap::from_document(&doc).unwrap(), mq);
        let dup = LayoutDocument { n_physical: 3, layout: vec![1, 1] };
        assert_eq!(LogicalPhysicalMap::from_document(&dup), Err(MappingError::NotInjective(1)));
    }

    #[derive(Debug, Clone)]
    enum Update {
        Assign(usize, usize),
        Unassign(usize),
        Relocate(usize, usize),
        Exchange(usize, usize),
        Swap(usize, usize),
    }

    fn update() -> impl Strategy<Value = Update> {
        prop_oneof![
            (0..6usize, 0..9usize).prop_map(|(q, p)| Update::Assign(q, p)),
            (0..6usize).prop_map(Update::Unassign),
            (0..6usize, 0..9usize).prop_map(|(q, p)| Update::Relocate(q, p)),
            (0..6usize, 0..6usize).prop_map(|(a, b)| Update::Exchange(a, b)),
            (0..9usize, 0..9usize).prop_map(|(a, b)| Update::Swap(a, b)),
        ]
    }

    proptest! {
        #[test]
        fn forward_inverse_stay_consistent(updates in prop::collection::vec(update(), 0..60)) {
            let mut mq = LogicalPhysicalMap::new(6, 9);
            for u in updates {
                let _ = match u {
                    Update::Assign(q, p) => mq.assign(q, p),
                    Update::Unassign(q) => { mq.unassign(q); Ok(()) }
                    Update::Relocate(q, p) => mq.relocate(q, p),
                    Update::Exchange(a, b) => mq.exchange(a, b),
                    Update::Swap(a, b) => { mq.swap_physical(a, b); Ok(()) }
                };
                prop_assert!(mq.is_consistent());
            }
        }
    }
}
