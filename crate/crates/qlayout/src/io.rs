//! File formats: QASM circuits, coupling-graph JSON, feature/dataset CSV,
//! model and solution JSON.

use std::fs;
use std::path::{Path, PathBuf};

use qlayout_core::arch::{builtin, ArchError, CouplingGraph};
use qlayout_core::augment::{Dataset, Sample, Target};
use qlayout_core::features::{FeatureVector, FEATURE_NAMES};
use qlayout_core::qasm::{emit_qasm, parse_qasm, ParseError};
use qlayout_core::regressor::RegressionTree;
use qlayout_core::search::Telemetry;
use qlayout_core::solution::{MappingSolution, ScheduledSwap};
use qlayout_core::Circuit;
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum InputError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}:{}:{}: {}", .source.line, .source.col, .source.kind)]
    Qasm { path: PathBuf, source: ParseError },
    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        source: serde_json::Error,
    },
    #[error("{path}: {source}")]
    Csv { path: PathBuf, source: csv::Error },
    #[error("{0}: {1}")]
    Arch(String, ArchError),
    #[error("{path}: {message}")]
    Invalid { path: PathBuf, message: String },
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> InputError + '_ {
    move |source| InputError::Io {
        path: path.to_owned(),
        source,
    }
}

pub fn read_text(path: &Path) -> Result<String, InputError> {
    fs::read_to_string(path).map_err(io_err(path))
}

/// Writes `text`, creating parent directories.
pub fn write_text(path: &Path, text: &str) -> Result<(), InputError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(io_err(dir))?;
    }
    fs::write(path, text).map_err(io_err(path))
}

pub fn read_circuit(path: &Path) -> Result<Circuit, InputError> {
    parse_qasm(&read_text(path)?).map_err(|source| InputError::Qasm {
        path: path.to_owned(),
        source,
    })
}

pub fn write_circuit(path: &Path, c: &Circuit) -> Result<(), InputError> {
    write_text(path, &emit_qasm(c))
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, InputError> {
    serde_json::from_str(&read_text(path)?).map_err(|source| InputError::Json {
        path: path.to_owned(),
        source,
    })
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), InputError> {
    let mut text = serde_json::to_string_pretty(value).map_err(|source| InputError::Json {
        path: path.to_owned(),
        source,
    })?;
    text.push('\n');
    write_text(path, &text)
}

/// A built-in device (`qx2`, `line5`, `ring5`, `grid2x3`) or a JSON file.
pub fn load_graph(spec: &str) -> Result<CouplingGraph, InputError> {
    match builtin(spec) {
        Some(r) => r.map_err(|e| InputError::Arch(spec.to_owned(), e)),
        None => read_json(Path::new(spec)),
    }
}

/// `x` rounded to nine significant digits.
pub fn round_sig9(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.8e}").parse().unwrap_or(x)
}

/// Feature vector as a JSON object keyed by feature name.
pub fn features_json(f: &FeatureVector) -> serde_json::Value {
    let mut map = serde_json::Map::new();
    for (name, v) in FEATURE_NAMES.iter().zip(f.as_array()) {
        let value = match *name {
            "operation_density" | "entanglement_variance" => serde_json::json!(round_sig9(v)),
            _ => serde_json::json!(v as u64),
        };
        map.insert((*name).to_owned(), value);
    }
    serde_json::Value::Object(map)
}

fn csv_err(path: &Path) -> impl FnOnce(csv::Error) -> InputError + '_ {
    move |source| InputError::Csv {
        path: path.to_owned(),
        source,
    }
}

/// Six feature columns, `label`, `source`.
pub fn write_dataset(path: &Path, d: &Dataset) -> Result<(), InputError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(io_err(dir))?;
    }
    let mut w = csv::Writer::from_path(path).map_err(csv_err(path))?;
    let mut header: Vec<&str> = FEATURE_NAMES.to_vec();
    header.extend(["label", "source"]);
    w.write_record(&header).map_err(csv_err(path))?;
    for s in &d.samples {
        let f = s.features;
        let row = [
            f.circuit_depth.to_string(),
            f.circuit_width.to_string(),
            f.max_qubit_depth.to_string(),
            round_sig9(f.operation_density).to_string(),
            f.two_qubit_gate_count.to_string(),
            round_sig9(f.entanglement_variance).to_string(),
            s.label.map(|l| l.to_string()).unwrap_or_default(),
            s.source.clone(),
        ];
        w.write_record(&row).map_err(csv_err(path))?;
    }
    w.flush().map_err(io_err(path))
}

pub fn read_dataset(path: &Path, target: Target, graph: &str) -> Result<Dataset, InputError> {
    let mut r = csv::Reader::from_path(path).map_err(csv_err(path))?;
    let invalid = |message: String| InputError::Invalid {
        path: path.to_owned(),
        message,
    };
    let header = r.headers().map_err(csv_err(path))?.clone();
    let expected: Vec<&str> = FEATURE_NAMES.iter().copied().chain(["label", "source"]).collect();
    if header.iter().collect::<Vec<_>>() != expected {
        return Err(invalid(format!("expected columns {}", expected.join(","))));
    }
    let mut d = Dataset::new(target, graph);
    for (i, rec) in r.records().enumerate() {
        let rec = rec.map_err(csv_err(path))?;
        let mut v = [0.0; 6];
        for (k, slot) in v.iter_mut().enumerate() {
            *slot = rec[k]
                .trim()
                .parse()
                .map_err(|_| invalid(format!("row {}: bad {}", i + 1, FEATURE_NAMES[k])))?;
        }
        let label = match rec[6].trim() {
            "" => None,
            t => Some(
                t.parse()
                    .map_err(|_| invalid(format!("row {}: bad label", i + 1)))?,
            ),
        };
        d.samples.push(Sample {
            features: FeatureVector::from_array(v),
            label,
            source: rec[7].to_owned(),
        });
    }
    Ok(d)
}

pub fn read_model(path: &Path) -> Result<RegressionTree, InputError> {
    read_json(path)
}

/// Everything needed to re-validate a mapping without the solver.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionRecord {
    pub graph: String,
    pub initial_map: Vec<usize>,
    pub gate_times: Vec<usize>,
    pub swaps: Vec<ScheduledSwap>,
    pub swap_duration: usize,
    pub final_depth: usize,
    pub swap_count: usize,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub layouts: Vec<Vec<usize>>,
    pub mapped_qasm: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub telemetry: Option<Telemetry>,
}

impl SolutionRecord {
    pub fn new(graph: &CouplingGraph, sol: &MappingSolution, telemetry: Option<Telemetry>) -> Self {
        SolutionRecord {
            graph: graph.name().to_owned(),
            initial_map: sol.initial_map.clone(),
            gate_times: sol.gate_times.clone(),
            swaps: sol.swaps.clone(),
            swap_duration: sol.swap_duration,
            final_depth: sol.final_depth,
            swap_count: sol.swap_count,
            layouts: sol.layouts.clone(),
            mapped_qasm: emit_qasm(&sol.mapped_circuit),
            telemetry,
        }
    }

    pub fn to_solution(&self) -> Result<MappingSolution, ParseError> {
        Ok(MappingSolution {
            initial_map: self.initial_map.clone(),
            gate_times: self.gate_times.clone(),
            swaps: self.swaps.clone(),
            swap_duration: self.swap_duration,
            final_depth: self.final_depth,
            swap_count: self.swap_count,
            layouts: self.layouts.clone(),
            mapped_circuit: parse_qasm(&self.mapped_qasm)?,
        })
    }
}
