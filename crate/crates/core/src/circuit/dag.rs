use super::{Circuit, Operation};

/// Dependency DAG over the operations of a [`Circuit`]. Node `i` is
/// `circuit.ops()[i]`; arcs always point from a lower to a higher index.
///
/// Arcs come from three sources:
/// * program order on each shared qubit,
/// * a conditional op depends on the latest measure writing each bit it reads,
/// * a measure depends on the previous writer of its bit and on every
///   reader of the previous value, so reordering never clobbers a bit
///   before its consumers run.
#[derive(Clone, Debug)]
pub struct OpDag {
    preds: Vec<Vec<usize>>,
    succs: Vec<Vec<usize>>,
}

impl OpDag {
    pub fn build(circuit: &Circuit) -> Self {
        let n = circuit.len();
        let mut preds: Vec<Vec<usize>> = vec![Vec::new(); n];
        let mut succs: Vec<Vec<usize>> = vec![Vec::new(); n];
        let mut last_on_qubit: Vec<Option<usize>> = vec![None; circuit.n_qubits()];
        let mut last_writer: Vec<Option<usize>> = vec![None; circuit.n_clbits()];
        let mut readers: Vec<Vec<usize>> = vec![Vec::new(); circuit.n_clbits()];

        for (i, op) in circuit.ops().iter().enumerate() {
            let mut deps: Vec<usize> = Vec::new();
            for &q in &op.qubits {
                if let Some(p) = last_on_qubit[q] {
                    deps.push(p);
                }
            }
            for bit in op.condition.bits() {
                if let Some(w) = last_writer[bit] {
                    deps.push(w);
                }
                readers[bit].push(i);
            }
            if let Some(c) = op.writes_clbit() {
                if let Some(w) = last_writer[c] {
                    deps.push(w);
                }
                deps.extend(readers[c].drain(..).filter(|&r| r != i));
                last_writer[c] = Some(i);
            }
            deps.sort_unstable();
            deps.dedup();
            for &d in &deps {
                succs[d].push(i);
            }
            preds[i] = deps;
            for &q in &op.qubits {
                last_on_qubit[q] = Some(i);
            }
        }
        OpDag { preds, succs }
    }

    pub fn len(&self) -> usize {
        self.preds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.preds.is_empty()
    }

    pub fn preds(&self, op: usize) -> &[usize] {
        &self.preds[op]
    }

    pub fn succs(&self, op: usize) -> &[usize] {
        &self.succs[op]
    }

    pub fn edge_count(&self) -> usize {
        self.preds.iter().map(Vec::len).sum()
    }

    pub fn has_edge(&self, from: usize, to: usize) -> bool {
        self.preds[to].binary_search(&from).is_ok()
    }

    /// Ops with no predecessors, ascending.
    pub fn front_layer(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.preds[i].is_empty()).collect()
    }

    /// Kahn's algorithm, smallest ready index first.
    pub fn topological_order(&self) -> Vec<usize> {
        let mut remaining: Vec<usize> = self.preds.iter().map(Vec::len).collect();
        let mut ready: std::collections::BTreeSet<usize> = self.front_layer().into_iter().collect();
        let mut order = Vec::with_capacity(self.len());
        while let Some(i) = ready.pop_first() {
            order.push(i);
            for &s in &self.succs[i] {
                remaining[s] -= 1;
                if remaining[s] == 0 {
                    ready.insert(s);
                }
            }
        }
        order
    }

    /// Longest weighted path; `weight(op)` is added per node on the path.
    pub fn longest_path<F: Fn(usize) -> usize>(&self, weight: F) -> usize {
        // node indices are already a topological order
        let mut finish = vec![0usize; self.len()];
        let mut best = 0;
        for i in 0..self.len() {
            let start = self.preds[i].iter().map(|&p| finish[p]).max().unwrap_or(0);
            finish[i] = start + weight(i);
            best = best.max(finish[i]);
        }
        best
    }

    pub fn depth(&self, circuit: &Circuit) -> usize {
        let ops = circuit.ops();
        self.longest_path(|i| usize::from(!Operation::is_barrier(&ops[i])))
    }

    /// True if `to` is reachable from `from`.
    pub fn reaches(&self, from: usize, to: usize) -> bool {
        if from >= to {
            return from == to;
        }
        let mut seen = vec![false; to + 1];
        let mut stack = vec![from];
        while let Some(i) = stack.pop() {
            if i == to {
                return true;
            }
            for &s in &self.succs[i] {
                if s <= to && !seen[s] {
                    seen[s] = true;
                    stack.push(s);
                }
            }
        }
        false
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::parse_circuit;

    fn dag_of(src: &str) -> (Circuit, OpDag) {
        let c = parse_circuit(src).unwrap();
        let d = OpDag::build(&c);
        (c, d)
    }

    #[test]
    fn measure_feeds_conditional() {
        let (_, d) = dag_of("qreg q[2]; creg c[1]; measure q[0] -> c[0]; if (c[0]==1) x q[1];");
        assert!(d.has_edge(0, 1));
        assert_eq!(d.front_layer(), vec![0]);
    }

    #[test]
    fn disjoint_gates_are_independent() {
        let (c, d) = dag_of("qreg q[2]; h q[0]; x q[1];");
        assert_eq!(d.edge_count(), 0);
        assert_eq!(d.depth(&c), 1);
    }

    #[test]
    fn overwritten_bit_binds_latest_writer() {
        let src = "qreg q[3]; creg c[1];
            measure q[0] -> c[0];
            if (c[0]==1) x q[1];
            measure q[2] -> c[0];
            if (c[0]==1) x q[1];";
        let (_, d) = dag_of(src);
        assert!(d.has_edge(0, 1));
        // write-after-read on c[0]
        assert!(d.has_edge(1, 2));
        assert!(d.has_edge(2, 3));
        assert!(!d.has_edge(0, 3));
    }

    #[test]
    fn serial_chain_depth() {
        let (c, d) = dag_of("qreg q[1]; h q[0]; h q[0];");
        assert_eq!(d.depth(&c), 2);
        assert_eq!(d.topological_order(), vec![0, 1]);
    }
}
