//! The six-number circuit description fed to the depth and swap predictors.

use serde::{Deserialize, Serialize};

use crate::circuit::{ldc_length, Circuit};

pub const FEATURE_NAMES: [&str; 6] = [
    "circuit_depth",
    "circuit_width",
    "max_qubit_depth",
    "operation_density",
    "two_qubit_gate_count",
    "entanglement_variance",
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    /// Longest dependency chain, in gates.
    pub circuit_depth: usize,
    pub circuit_width: usize,
    /// Largest number of gates touching one qubit.
    pub max_qubit_depth: usize,
    /// `(n1 + 2 n2) / (depth * width)`.
    pub operation_density: f64,
    pub two_qubit_gate_count: usize,
    /// `ln(sum_q (n2_q - mean n2)^2 + 1) / width`.
    pub entanglement_variance: f64,
}

impl FeatureVector {
    pub fn as_array(&self) -> [f64; 6] {
        [
            self.circuit_depth as f64,
            self.circuit_width as f64,
            self.max_qubit_depth as f64,
            self.operation_density,
            self.two_qubit_gate_count as f64,
            self.entanglement_variance,
        ]
    }

    /// Inverse of [`as_array`](Self::as_array); integer fields are rounded.
    pub fn from_array(v: [f64; 6]) -> Self {
        let int = |x: f64| libm::round(x).max(0.0) as usize;
        FeatureVector {
            circuit_depth: int(v[0]),
            circuit_width: int(v[1]),
            max_qubit_depth: int(v[2]),
            operation_density: v[3],
            two_qubit_gate_count: int(v[4]),
            entanglement_variance: v[5],
        }
    }
}

pub fn max_qubit_depth(c: &Circuit) -> usize {
    c.gates_per_qubit().into_iter().max().unwrap_or(0)
}

pub fn operation_density(c: &Circuit) -> f64 {
    let ldc = ldc_length(c);
    if ldc == 0 || c.num_qubits() == 0 {
        return 0.0;
    }
    let n2 = c.two_qubit_count();
    let n1 = c.len() - n2;
    (n1 + 2 * n2) as f64 / (ldc * c.num_qubits()) as f64
}

pub fn entanglement_variance(c: &Circuit) -> f64 {
    load_variance(&c.two_qubit_gates_per_qubit())
}

/// `ln(sum (k - mean)^2 + 1) / len` over per-qubit two-qubit gate counts.
pub fn load_variance(load: &[usize]) -> f64 {
    let n = load.len();
    if n == 0 {
        return 0.0;
    }
    let mean = load.iter().sum::<usize>() as f64 / n as f64;
    let ss: f64 = load
        .iter()
        .map(|&k| {
            let d = k as f64 - mean;
            d * d
        })
        .sum();
    libm::log(ss + 1.0) / n as f64
}

pub fn extract_features(c: &Circuit) -> FeatureVector {
    FeatureVector {
        circuit_depth: ldc_length(c),
        circuit_width: c.num_qubits(),
        max_qubit_depth: max_qubit_depth(c),
        operation_density: operation_density(c),
        two_qubit_gate_count: c.two_qubit_count(),
        entanglement_variance: entanglement_variance(c),
    }
}
