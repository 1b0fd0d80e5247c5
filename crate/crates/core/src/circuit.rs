//! Logical circuits, their gate dependency DAG and the longest dependency chain.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

/// Structural problems with a gate list.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CircuitError {
    #[error("gate {gate} ({name}) acts on {arity} qubits; only 1- and 2-qubit gates are supported")]
    Arity {
        gate: usize,
        name: String,
        arity: usize,
    },
    #[error("gate {gate} ({name}) repeats qubit {qubit}")]
    RepeatedQubit {
        gate: usize,
        name: String,
        qubit: usize,
    },
    #[error("gate {gate} ({name}) uses qubit {qubit} but the circuit has {num_qubits}")]
    QubitOutOfRange {
        gate: usize,
        name: String,
        qubit: usize,
        num_qubits: usize,
    },
}

/// One single- or two-qubit operation.
///
/// `params` are kept as the source text of each argument expression; mapping
/// never looks at them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Gate {
    pub id: usize,
    pub name: String,
    pub qubits: Vec<usize>,
    pub params: Vec<String>,
}

impl Gate {
    pub fn is_two_qubit(&self) -> bool {
        self.qubits.len() == 2
    }
}

/// An ordered gate list over `num_qubits` logical qubits.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Circuit {
    num_qubits: usize,
    gates: Vec<Gate>,
}

impl Circuit {
    pub fn new(num_qubits: usize) -> Self {
        Circuit {
            num_qubits,
            gates: Vec::new(),
        }
    }

    /// Appends a gate, assigning it the next id.
    pub fn push(
        &mut self,
        name: impl Into<String>,
        qubits: &[usize],
        params: Vec<String>,
    ) -> Result<usize, CircuitError> {
        let id = self.gates.len();
        let name = name.into();
        if qubits.is_empty() || qubits.len() > 2 {
            return Err(CircuitError::Arity {
                gate: id,
                name,
                arity: qubits.len(),
            });
        }
        for &q in qubits {
            if q >= self.num_qubits {
                return Err(CircuitError::QubitOutOfRange {
                    gate: id,
                    name,
                    qubit: q,
                    num_qubits: self.num_qubits,
                });
            }
        }
        if qubits.len() == 2 && qubits[0] == qubits[1] {
            return Err(CircuitError::RepeatedQubit {
                gate: id,
                name,
                qubit: qubits[0],
            });
        }
        self.gates.push(Gate {
            id,
            name,
            qubits: qubits.to_vec(),
            params,
        });
        Ok(id)
    }

    /// Builder-style helper for parameterless gates.
    pub fn with(mut self, name: &str, qubits: &[usize]) -> Result<Self, CircuitError> {
        self.push(name, qubits, Vec::new())?;
        Ok(self)
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn two_qubit_count(&self) -> usize {
        self.gates.iter().filter(|g| g.is_two_qubit()).count()
    }

    pub fn has_two_qubit_gate(&self) -> bool {
        self.gates.iter().any(Gate::is_two_qubit)
    }

    /// Number of gates touching each qubit.
    pub fn gates_per_qubit(&self) -> Vec<usize> {
        let mut counts = vec![0; self.num_qubits];
        for g in &self.gates {
            for &q in &g.qubits {
                counts[q] += 1;
            }
        }
        counts
    }

    /// Number of two-qubit gates touching each qubit.
    pub fn two_qubit_gates_per_qubit(&self) -> Vec<usize> {
        let mut counts = vec![0; self.num_qubits];
        for g in self.gates.iter().filter(|g| g.is_two_qubit()) {
            for &q in &g.qubits {
                counts[q] += 1;
            }
        }
        counts
    }

    /// Copies `gates` (in order) into a fresh circuit of the given width,
    /// renumbering ids.
    pub fn from_gates<'a>(
        num_qubits: usize,
        gates: impl IntoIterator<Item = &'a Gate>,
    ) -> Result<Self, CircuitError> {
        let mut c = Circuit::new(num_qubits);
        for g in gates {
            c.push(g.name.clone(), &g.qubits, g.params.clone())?;
        }
        Ok(c)
    }

    pub fn dag(&self) -> DependencyDag {
        build_dag(self)
    }
}

/// Gate precedence: `(i, j)` means gate `j` must run after gate `i`.
///
/// Only immediate predecessors on a shared qubit produce an edge, so the edge
/// set is the transitive reduction along each qubit wire.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DependencyDag {
    edges: Vec<(usize, usize)>,
    preds: Vec<Vec<usize>>,
}

impl DependencyDag {
    /// Sorted, duplicate-free edge list.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn predecessors(&self, gate: usize) -> &[usize] {
        &self.preds[gate]
    }

    pub fn num_gates(&self) -> usize {
        self.preds.len()
    }

    /// Earliest time step of each gate when every gate takes one step.
    pub fn asap_levels(&self) -> Vec<usize> {
        let mut level = vec![0usize; self.preds.len()];
        for g in 0..self.preds.len() {
            level[g] = self.preds[g]
                .iter()
                .map(|&p| level[p] + 1)
                .max()
                .unwrap_or(0);
        }
        level
    }
}

pub fn build_dag(c: &Circuit) -> DependencyDag {
    let mut last: Vec<Option<usize>> = vec![None; c.num_qubits()];
    let mut preds: Vec<Vec<usize>> = vec![Vec::new(); c.len()];
    let mut edges = Vec::new();
    for g in c.gates() {
        for &q in &g.qubits {
            if let Some(p) = last[q] {
                if !preds[g.id].contains(&p) {
                    preds[g.id].push(p);
                    edges.push((p, g.id));
                }
            }
            last[q] = Some(g.id);
        }
        preds[g.id].sort_unstable();
    }
    edges.sort_unstable();
    DependencyDag { edges, preds }
}

/// Length, in gates, of the longest dependency chain. Zero for an empty circuit.
pub fn ldc_length(c: &Circuit) -> usize {
    if c.is_empty() {
        return 0;
    }
    build_dag(c).asap_levels().into_iter().max().unwrap_or(0) + 1
}
