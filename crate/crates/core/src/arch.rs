//! Undirected coupling graphs of physical qubits.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ArchError {
    #[error("edge ({0},{0}) is a self-loop")]
    SelfLoop(usize),
    #[error("edge ({0},{1}) listed more than once")]
    DuplicateEdge(usize, usize),
    #[error("edge ({a},{b}) references a qubit outside 0..{num_qubits}")]
    OutOfRange { a: usize, b: usize, num_qubits: usize },
    #[error("{0}")]
    Dimension(&'static str),
}

/// Physical qubits `0..num_qubits` and the unordered pairs that support
/// two-qubit gates. Edges are stored as `(min, max)` in insertion order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "GraphRecord", into = "GraphRecord")]
pub struct CouplingGraph {
    name: String,
    num_qubits: usize,
    edges: Vec<(usize, usize)>,
}

/// On-disk shape: `{"name": .., "num_qubits": .., "edges": [[a,b], ..]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GraphRecord {
    pub name: String,
    pub num_qubits: usize,
    pub edges: Vec<[usize; 2]>,
}

impl TryFrom<GraphRecord> for CouplingGraph {
    type Error = ArchError;

    fn try_from(r: GraphRecord) -> Result<Self, ArchError> {
        CouplingGraph::new(r.name, r.num_qubits, r.edges.iter().map(|e| (e[0], e[1])))
    }
}

impl From<CouplingGraph> for GraphRecord {
    fn from(g: CouplingGraph) -> Self {
        GraphRecord {
            name: g.name,
            num_qubits: g.num_qubits,
            edges: g.edges.iter().map(|&(a, b)| [a, b]).collect(),
        }
    }
}

impl CouplingGraph {
    pub fn new(
        name: impl Into<String>,
        num_qubits: usize,
        edges: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self, ArchError> {
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        for (a, b) in edges {
            if a >= num_qubits || b >= num_qubits {
                return Err(ArchError::OutOfRange { a, b, num_qubits });
            }
            if a == b {
                return Err(ArchError::SelfLoop(a));
            }
            let e = (a.min(b), a.max(b));
            if !seen.insert(e) {
                return Err(ArchError::DuplicateEdge(e.0, e.1));
            }
            out.push(e);
        }
        Ok(CouplingGraph {
            name: name.into(),
            num_qubits,
            edges: out,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        let e = (a.min(b), a.max(b));
        self.edges.contains(&e)
    }

    /// Indices of edges touching physical qubit `p`.
    pub fn incident_edges(&self, p: usize) -> Vec<usize> {
        self.edges
            .iter()
            .enumerate()
            .filter(|(_, &(a, b))| a == p || b == p)
            .map(|(i, _)| i)
            .collect()
    }

    /// Indices of other edges sharing an endpoint with edge `k`.
    pub fn overlapping_edges(&self, k: usize) -> Vec<usize> {
        let (a, b) = self.edges[k];
        self.edges
            .iter()
            .enumerate()
            .filter(|&(i, &(c, d))| i != k && (c == a || c == b || d == a || d == b))
            .map(|(i, _)| i)
            .collect()
    }

    pub fn is_connected(&self) -> bool {
        if self.num_qubits <= 1 {
            return true;
        }
        let mut adj = vec![Vec::new(); self.num_qubits];
        for &(a, b) in &self.edges {
            adj[a].push(b);
            adj[b].push(a);
        }
        let mut seen = vec![false; self.num_qubits];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(v) = stack.pop() {
            for &w in &adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }
}

/// `rows x cols` lattice, qubit `r * cols + c`.
pub fn grid_graph(rows: usize, cols: usize) -> Result<CouplingGraph, ArchError> {
    if rows == 0 || cols == 0 {
        return Err(ArchError::Dimension("grid dimensions must be at least 1"));
    }
    let mut edges = Vec::new();
    for r in 0..rows {
        for c in 0..cols {
            let v = r * cols + c;
            if c + 1 < cols {
                edges.push((v, v + 1));
            }
            if r + 1 < rows {
                edges.push((v, v + cols));
            }
        }
    }
    CouplingGraph::new(format!("grid{rows}x{cols}"), rows * cols, edges)
}

pub fn line_graph(n: usize) -> Result<CouplingGraph, ArchError> {
    if n < 2 {
        return Err(ArchError::Dimension("line needs at least 2 qubits"));
    }
    CouplingGraph::new(format!("line{n}"), n, (0..n - 1).map(|i| (i, i + 1)))
}

pub fn ring_graph(n: usize) -> Result<CouplingGraph, ArchError> {
    if n < 3 {
        return Err(ArchError::Dimension("ring needs at least 3 qubits"));
    }
    CouplingGraph::new(format!("ring{n}"), n, (0..n).map(|i| (i, (i + 1) % n)))
}

/// The 5-qubit IBM QX2 ("bow tie") device.
pub fn qx2() -> CouplingGraph {
    CouplingGraph::new(
        "qx2",
        5,
        [(0, 1), (0, 2), (1, 2), (2, 3), (2, 4), (3, 4)],
    )
    .expect("static edge list")
}

/// Resolves `qx2`, `lineN`/`line:N`, `ringN`/`ring:N` and `gridRxC`/`grid:RxC`.
pub fn builtin(spec: &str) -> Option<Result<CouplingGraph, ArchError>> {
    let spec = spec.trim().to_ascii_lowercase();
    if spec == "qx2" || spec == "ibmqx2" {
        return Some(Ok(qx2()));
    }
    let num = |s: &str| s.trim_start_matches(':').parse::<usize>().ok();
    if let Some(rest) = spec.strip_prefix("line") {
        return num(rest).map(line_graph);
    }
    if let Some(rest) = spec.strip_prefix("ring") {
        return num(rest).map(ring_graph);
    }
    if let Some(rest) = spec.strip_prefix("grid") {
        let (r, c) = rest.trim_start_matches(':').split_once('x')?;
        return Some(grid_graph(r.parse().ok()?, c.parse().ok()?));
    }
    None
}
