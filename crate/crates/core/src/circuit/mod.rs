//! Circuit representation for dynamic circuits: gates, mid-circuit
//! measurements, resets, barriers and bit-level classical conditions.

mod angle;
mod dag;
mod parse;

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

pub use angle::Angle;
pub use dag::OpDag;
pub use parse::{parse_circuit, ParseError};

#[derive(Clone, Debug, PartialEq)]
pub enum Gate1q {
    H,
    X,
    Y,
    Z,
    S,
    Sdg,
    T,
    Tdg,
    U1(Angle),
    Rz(Angle),
}

impl Gate1q {
    pub fn name(&self) -> &'static str {
        match self {
            Gate1q::H => "h",
            Gate1q::X => "x",
            Gate1q::Y => "y",
            Gate1q::Z => "z",
            Gate1q::S => "s",
            Gate1q::Sdg => "sdg",
            Gate1q::T => "t",
            Gate1q::Tdg => "tdg",
            Gate1q::U1(_) => "u1",
            Gate1q::Rz(_) => "rz",
        }
    }

    pub fn params(&self) -> Vec<&Angle> {
        match self {
            Gate1q::U1(a) | Gate1q::Rz(a) => vec![a],
            _ => Vec::new(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Gate2q {
    Cx,
    Cz,
    Swap,
}

impl Gate2q {
    pub fn name(&self) -> &'static str {
        match self {
            Gate2q::Cx => "cx",
            Gate2q::Cz => "cz",
            Gate2q::Swap => "swap",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum OpKind {
    Gate1q(Gate1q),
    Gate2q(Gate2q),
    Measure { clbit: usize },
    Reset,
    Barrier,
}

/// Conjunction of `(clbit, value)` requirements. Kept sorted by bit.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Condition(Vec<(usize, bool)>);

impl Condition {
    pub fn none() -> Self {
        Condition(Vec::new())
    }

    pub fn bit(clbit: usize, value: bool) -> Self {
        Condition(vec![(clbit, value)])
    }

    /// Builds a conjunction; `None` if the same bit is required to hold
    /// both values.
    pub fn all<I: IntoIterator<Item = (usize, bool)>>(terms: I) -> Option<Self> {
        let mut map = BTreeMap::new();
        for (bit, value) in terms {
            if let Some(prev) = map.insert(bit, value) {
                if prev != value {
                    return None;
                }
            }
        }
        Some(Condition(map.into_iter().collect()))
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn terms(&self) -> &[(usize, bool)] {
        &self.0
    }

    pub fn bits(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().map(|&(b, _)| b)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Operation {
    pub kind: OpKind,
    pub qubits: Vec<usize>,
    pub condition: Condition,
}

impl Operation {
    pub fn gate1(gate: Gate1q, qubit: usize) -> Self {
        Operation {
            kind: OpKind::Gate1q(gate),
            qubits: vec![qubit],
            condition: Condition::none(),
        }
    }

    pub fn gate2(gate: Gate2q, a: usize, b: usize) -> Self {
        Operation {
            kind: OpKind::Gate2q(gate),
            qubits: vec![a, b],
            condition: Condition::none(),
        }
    }

    pub fn measure(qubit: usize, clbit: usize) -> Self {
        Operation {
            kind: OpKind::Measure { clbit },
            qubits: vec![qubit],
            condition: Condition::none(),
        }
    }

    pub fn reset(qubit: usize) -> Self {
        Operation {
            kind: OpKind::Reset,
            qubits: vec![qubit],
            condition: Condition::none(),
        }
    }

    pub fn barrier(qubits: Vec<usize>) -> Self {
        Operation {
            kind: OpKind::Barrier,
            qubits,
            condition: Condition::none(),
        }
    }

    pub fn with_condition(mut self, condition: Condition) -> Self {
        self.condition = condition;
        self
    }

    pub fn writes_clbit(&self) -> Option<usize> {
        match self.kind {
            OpKind::Measure { clbit } => Some(clbit),
            _ => None,
        }
    }

    pub fn is_two_qubit(&self) -> bool {
        matches!(self.kind, OpKind::Gate2q(_))
    }

    pub fn is_barrier(&self) -> bool {
        matches!(self.kind, OpKind::Barrier)
    }

    pub fn is_conditional(&self) -> bool {
        !self.condition.is_empty()
    }

    /// Checks arity and the condition placement rules, independent of
    /// register sizes.
    fn check_shape(&self) -> Result<(), &'static str> {
        match &self.kind {
            OpKind::Gate1q(_) | OpKind::Reset | OpKind::Measure { .. } if self.qubits.len() != 1 => {
                Err("expected exactly one qubit")
            }
            OpKind::Gate2q(_) if self.qubits.len() != 2 => Err("expected exactly two qubits"),
            OpKind::Gate2q(_) if self.qubits[0] == self.qubits[1] => {
                Err("two-qubit gate on a single qubit")
            }
            OpKind::Barrier if self.qubits.is_empty() => Err("barrier without qubits"),
            OpKind::Measure { .. } | OpKind::Barrier if self.is_conditional() => {
                Err("only gates and resets may be conditioned")
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum CircuitError {
    #[error("operation {op}: qubit {qubit} out of range (circuit has {n_qubits})")]
    QubitOutOfRange {
        op: usize,
        qubit: usize,
        n_qubits: usize,
    },
    #[error("operation {op}: clbit {clbit} out of range (circuit has {n_clbits})")]
    ClbitOutOfRange {
        op: usize,
        clbit: usize,
        n_clbits: usize,
    },
    #[error("operation {op}: condition reads clbit {clbit} before any measurement writes it")]
    UnwrittenClbit { op: usize, clbit: usize },
    #[error("operation {op}: {reason}")]
    InvalidOperation { op: usize, reason: &'static str },
}

/// A validated circuit. Construction checks every invariant, so code
/// holding a `Circuit` can index registers freely.
#[derive(Clone, Debug, PartialEq)]
pub struct Circuit {
    n_qubits: usize,
    n_clbits: usize,
    ops: Vec<Operation>,
}

impl Circuit {
    pub fn new(n_qubits: usize, n_clbits: usize, ops: Vec<Operation>) -> Result<Self, CircuitError> {
        let mut written = vec![false; n_clbits];
        for (i, op) in ops.iter().enumerate() {
            op.check_shape()
                .map_err(|reason| CircuitError::InvalidOperation { op: i, reason })?;
            if let Some(&q) = op.qubits.iter().find(|&&q| q >= n_qubits) {
                return Err(CircuitError::QubitOutOfRange {
                    op: i,
                    qubit: q,
                    n_qubits,
                });
            }
            for bit in op.condition.bits() {
                if bit >= n_clbits {
                    return Err(CircuitError::ClbitOutOfRange {
                        op: i,
                        clbit: bit,
                        n_clbits,
                    });
                }
                if !written[bit] {
                    return Err(CircuitError::UnwrittenClbit { op: i, clbit: bit });
                }
            }
            if let Some(c) = op.writes_clbit() {
                if c >= n_clbits {
                    return Err(CircuitError::ClbitOutOfRange {
                        op: i,
                        clbit: c,
                        n_clbits,
                    });
                }
                written[c] = true;
            }
        }
        Ok(Circuit {
            n_qubits,
            n_clbits,
            ops,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn n_clbits(&self) -> usize {
        self.n_clbits
    }

    pub fn ops(&self) -> &[Operation] {
        &self.ops
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    /// Number of non-barrier operations.
    pub fn count_ops(&self) -> usize {
        self.ops.iter().filter(|op| !op.is_barrier()).count()
    }

    /// Longest dependency chain, barriers weighing zero.
    pub fn depth(&self) -> usize {
        OpDag::build(self).depth(self)
    }

    pub fn has_two_qubit_gates(&self) -> bool {
        self.ops.iter().any(Operation::is_two_qubit)
    }

    /// Serializes to the accepted text grammar with one `q` and one `c`
    /// register.
    pub fn to_qasm(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for Operation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if !self.condition.is_empty() {
            let terms: Vec<String> = self
                .condition
                .terms()
                .iter()
                .map(|&(b, v)| format!("c[{b}]=={}", u8::from(v)))
                .collect();
            write!(f, "if ({}) ", terms.join(" && "))?;
        }
        let qargs = |qs: &[usize]| {
            qs.iter()
                .map(|q| format!("q[{q}]"))
                .collect::<Vec<_>>()
                .join(", ")
        };
        match &self.kind {
            OpKind::Gate1q(g) => {
                let params = g.params();
                if params.is_empty() {
                    write!(f, "{} {};", g.name(), qargs(&self.qubits))
                } else {
                    let ps: Vec<String> = params.iter().map(|a| a.to_string()).collect();
                    write!(f, "{}({}) {};", g.name(), ps.join(", "), qargs(&self.qubits))
                }
            }
            OpKind::Gate2q(g) => write!(f, "{} {};", g.name(), qargs(&self.qubits)),
            OpKind::Measure { clbit } => write!(f, "measure q[{}] -> c[{clbit}];", self.qubits[0]),
            OpKind::Reset => write!(f, "reset q[{}];", self.qubits[0]),
            OpKind::Barrier => write!(f, "barrier {};", qargs(&self.qubits)),
        }
    }
}

impl fmt::Display for Circuit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "OPENQASM 2.0;")?;
        if self.n_qubits > 0 {
            writeln!(f, "qreg q[{}];", self.n_qubits)?;
        }
        if self.n_clbits > 0 {
            writeln!(f, "creg c[{}];", self.n_clbits)?;
        }
        for op in &self.ops {
            writeln!(f, "{op}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_condition_on_unwritten_bit() {
        let ops = vec![Operation::gate1(Gate1q::X, 0).with_condition(Condition::bit(0, true))];
        assert_eq!(
            Circuit::new(1, 1, ops),
            Err(CircuitError::UnwrittenClbit { op: 0, clbit: 0 })
        );
    }

    #[test]
    fn rejects_conditional_measure_and_bad_arity() {
        let ops = vec![
            Operation::measure(0, 0),
            Operation::measure(0, 0).with_condition(Condition::bit(0, true)),
        ];
        assert!(matches!(
            Circuit::new(1, 1, ops),
            Err(CircuitError::InvalidOperation { op: 1, .. })
        ));
        let ops = vec![Operation::gate2(Gate2q::Cx, 1, 1)];
        assert!(Circuit::new(2, 0, ops).is_err());
        assert!(Circuit::new(1, 0, vec![Operation::barrier(vec![])]).is_err());
    }

    #[test]
    fn counts_skip_barriers() {
        let ops = vec![
            Operation::gate1(Gate1q::H, 0),
            Operation::barrier(vec![0, 1]),
            Operation::gate1(Gate1q::H, 0),
        ];
        let c = Circuit::new(2, 0, ops).unwrap();
        assert_eq!(c.count_ops(), 2);
        assert_eq!(c.depth(), 2);
    }

    #[test]
    fn contradictory_condition_is_rejected() {
        assert!(Condition::all([(0, true), (0, false)]).is_none());
        let c = Condition::all([(2, true), (0, false), (2, true)]).unwrap();
        assert_eq!(c.terms(), &[(0, false), (2, true)]);
    }
}
