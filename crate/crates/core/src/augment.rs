//! Training-set construction: chunking large circuits into samples (gate
//! allocation with qubit reordering) and AllKNN cleaning of labeled datasets.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::circuit::{Circuit, Gate};
use crate::features::FeatureVector;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AugmentError {
    #[error("chunk budget list must be non-empty with every budget at least 1")]
    EmptyPlan,
    #[error("sample {0} has no label")]
    Unlabeled(usize),
}

/// Budgets `b_1, b_2, ...` for consecutive chunks. The list is reused from the
/// start once exhausted.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChunkPlan {
    budgets: Vec<usize>,
    pub two_qubit_only: bool,
}

impl ChunkPlan {
    pub fn new(budgets: Vec<usize>, two_qubit_only: bool) -> Result<Self, AugmentError> {
        if budgets.is_empty() || budgets.contains(&0) {
            return Err(AugmentError::EmptyPlan);
        }
        Ok(ChunkPlan {
            budgets,
            two_qubit_only,
        })
    }

    pub fn budgets(&self) -> &[usize] {
        &self.budgets
    }

    pub fn budget(&self, j: usize) -> usize {
        self.budgets[j % self.budgets.len()]
    }
}

/// One emitted sample with its provenance in the source circuit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Chunk {
    /// Ids of the source gates, in order.
    pub source_gates: Vec<usize>,
    /// `qubit_map[new] = old`.
    pub qubit_map: Vec<usize>,
    pub circuit: Circuit,
}

/// Splits `big` into chunks following the budget list. A chunk closes when it
/// reaches the current budget, or at the end of the input if it holds a
/// two-qubit gate; a trailing remainder without one is dropped.
pub fn allocate(big: &Circuit, plan: &ChunkPlan) -> Vec<Chunk> {
    let gates: Vec<&Gate> = big
        .gates()
        .iter()
        .filter(|g| !plan.two_qubit_only || g.is_two_qubit())
        .collect();
    let mut out = Vec::new();
    let mut current: Vec<&Gate> = Vec::new();
    let mut j = 0;
    for (i, g) in gates.iter().enumerate() {
        current.push(g);
        let exhausted = i + 1 == gates.len();
        if current.len() == plan.budget(j)
            || (exhausted && current.iter().any(|g| g.is_two_qubit()))
        {
            if current.len() == plan.budget(j) {
                j += 1;
            }
            out.push(reorder_gates(&current));
            current.clear();
        }
    }
    out
}

pub fn gate_allocation(big: &Circuit, plan: &ChunkPlan) -> Vec<Circuit> {
    allocate(big, plan).into_iter().map(|c| c.circuit).collect()
}

fn reorder_gates(gates: &[&Gate]) -> Chunk {
    let mut order: Vec<usize> = Vec::new();
    for g in gates {
        for &q in &g.qubits {
            if !order.contains(&q) {
                order.push(q);
            }
        }
    }
    let mut circuit = Circuit::new(order.len());
    for g in gates {
        let qubits: Vec<usize> = g
            .qubits
            .iter()
            .map(|q| order.iter().position(|o| o == q).expect("collected above"))
            .collect();
        circuit
            .push(g.name.clone(), &qubits, g.params.clone())
            .expect("renumbered qubits are in range and distinct");
    }
    Chunk {
        source_gates: gates.iter().map(|g| g.id).collect(),
        qubit_map: order,
        circuit,
    }
}

/// Renumbers qubits `0..k` by first appearance; untouched qubits are dropped.
pub fn qubit_reorder(c: &Circuit) -> Circuit {
    let gates: Vec<&Gate> = c.gates().iter().collect();
    reorder_gates(&gates).circuit
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Target {
    Depth,
    Swaps,
}

impl Target {
    pub fn as_str(self) -> &'static str {
        match self {
            Target::Depth => "depth",
            Target::Swaps => "swaps",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub features: FeatureVector,
    pub label: Option<u64>,
    pub source: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub target: Target,
    pub graph: String,
    pub samples: Vec<Sample>,
}

impl Dataset {
    pub fn new(target: Target, graph: impl Into<String>) -> Self {
        Dataset {
            target,
            graph: graph.into(),
            samples: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Labels of every sample, or the index of the first unlabeled one.
    pub fn labels(&self) -> Result<Vec<u64>, AugmentError> {
        self.samples
            .iter()
            .enumerate()
            .map(|(i, s)| s.label.ok_or(AugmentError::Unlabeled(i)))
            .collect()
    }
}

/// Z-score columns over the whole input. Constant columns become zero.
fn standardize(rows: &[[f64; 6]]) -> Option<Vec<[f64; 6]>> {
    let n = rows.len() as f64;
    let mut out = rows.to_vec();
    let mut any_spread = false;
    for f in 0..6 {
        let mean = rows.iter().map(|r| r[f]).sum::<f64>() / n;
        let var = rows.iter().map(|r| (r[f] - mean) * (r[f] - mean)).sum::<f64>() / n;
        let sd = libm::sqrt(var);
        if sd > 0.0 {
            any_spread = true;
        }
        for r in out.iter_mut() {
            r[f] = if sd > 0.0 { (r[f] - mean) / sd } else { 0.0 };
        }
    }
    any_spread.then_some(out)
}

fn sq_dist(a: &[f64; 6], b: &[f64; 6]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Indices (into `alive`) that one edited-nearest-neighbour pass with `n`
/// neighbours keeps. A sample is dropped when some other label is strictly
/// more frequent than its own among its neighbours. Distance ties go to the
/// earlier sample.
fn enn_pass(points: &[[f64; 6]], labels: &[u64], alive: &[usize], n: usize) -> Vec<usize> {
    let mut keep = Vec::with_capacity(alive.len());
    for &i in alive {
        let mut others: Vec<(f64, usize)> = alive
            .iter()
            .filter(|&&j| j != i)
            .map(|&j| (sq_dist(&points[i], &points[j]), j))
            .collect();
        others.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let mut votes: BTreeMap<u64, usize> = BTreeMap::new();
        for &(_, j) in others.iter().take(n) {
            *votes.entry(labels[j]).or_default() += 1;
        }
        let own = votes.get(&labels[i]).copied().unwrap_or(0);
        if votes.iter().all(|(&l, &c)| l == labels[i] || c <= own) {
            keep.push(i);
        }
    }
    keep
}

/// AllKNN: edited nearest neighbours with `n = 1, ..., k_max` neighbours,
/// each pass applied to the survivors of the previous one. Labels are treated
/// as classes; distances are Euclidean on z-scored features.
pub fn allknn_refine(d: &Dataset, k_max: usize) -> Result<Dataset, AugmentError> {
    let labels = d.labels()?;
    let rows: Vec<[f64; 6]> = d.samples.iter().map(|s| s.features.as_array()).collect();
    let Some(points) = standardize(&rows) else {
        return Ok(d.clone());
    };
    let mut alive: Vec<usize> = (0..d.len()).collect();
    for n in 1..=k_max {
        if alive.len() <= n {
            break;
        }
        alive = enn_pass(&points, &labels, &alive, n);
    }
    Ok(Dataset {
        target: d.target,
        graph: d.graph.clone(),
        samples: alive.into_iter().map(|i| d.samples[i].clone()).collect(),
    })
}
