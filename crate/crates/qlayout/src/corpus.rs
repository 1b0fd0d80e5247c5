//! Labeled corpus construction: chunk seed circuits, solve each chunk to
//! optimality, write per-sample directories and feature datasets.

use std::path::{Path, PathBuf};

use log::{info, warn};
use qlayout_core::augment::{allknn_refine, allocate, ChunkPlan, Dataset, Sample, Target};
use qlayout_core::features::extract_features;
use qlayout_core::search::{solve_optimal, Predictions, SearchError, SearchOutcome, SearchParams};
use qlayout_core::{Circuit, CouplingGraph};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::io::{read_circuit, write_circuit, write_dataset, write_json, InputError};
use crate::solver::{ProcessChecker, SolverConfig};

/// Optimal depth and swap count with no predictor: the depth search starts
/// at the longest dependency chain, the swap search at the first model's count.
pub fn label_sample(
    c: &Circuit,
    g: &CouplingGraph,
    params: &SearchParams,
    solver: &SolverConfig,
) -> Result<SearchOutcome, SearchError> {
    let mut checker = ProcessChecker::new(solver.clone());
    solve_optimal(c, g, Predictions::default(), params, &mut checker)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchCounts {
    pub depth_checks: usize,
    pub swap_checks: usize,
}

/// `info.json` of a sample directory.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleInfo {
    pub depth: usize,
    pub swaps: usize,
    pub graph: String,
    pub search_counts: SearchCounts,
    pub source: String,
}

/// A chunk waiting to be labeled.
#[derive(Debug, Clone)]
pub struct PendingSample {
    pub name: String,
    pub source: String,
    pub circuit: Circuit,
}

/// Chunks every input with every plan, in input order then plan order.
/// Chunks wider than `max_width` are skipped.
pub fn chunk_inputs(
    inputs: &[(String, Circuit)],
    plans: &[ChunkPlan],
    max_width: usize,
) -> Vec<PendingSample> {
    let mut out = Vec::new();
    for (label, c) in inputs {
        for (p, plan) in plans.iter().enumerate() {
            for (k, chunk) in allocate(c, plan).into_iter().enumerate() {
                let name = format!("{label}_p{p}_c{k:04}");
                if chunk.circuit.num_qubits() > max_width {
                    warn!("{name}: {} qubits do not fit the device", chunk.circuit.num_qubits());
                    continue;
                }
                out.push(PendingSample {
                    source: format!("{label}#pass{p}#chunk{k}"),
                    name,
                    circuit: chunk.circuit,
                });
            }
        }
    }
    out
}

#[derive(Debug, Clone)]
pub struct CorpusOptions {
    pub plans: Vec<ChunkPlan>,
    pub params: SearchParams,
    pub solver: SolverConfig,
    pub jobs: usize,
    /// AllKNN neighbourhood limit; 0 disables cleaning.
    pub k_max: usize,
}

#[derive(Debug, Clone)]
pub struct CorpusReport {
    pub depth: Dataset,
    pub swaps: Dataset,
    pub depth_refined: Dataset,
    pub swaps_refined: Dataset,
    pub failures: Vec<(String, String)>,
}

fn file_label(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "circuit".to_owned())
}

/// Runs `f` on a pool of `jobs` threads (0 = rayon default).
pub fn with_jobs<T: Send>(jobs: usize, f: impl FnOnce() -> T + Send) -> T {
    match rayon::ThreadPoolBuilder::new().num_threads(jobs).build() {
        Ok(pool) => pool.install(f),
        Err(_) => f(),
    }
}

/// Builds the corpus under `out`: `samples/<name>/{original.qasm,
/// result/mapped.qasm, info.json}` plus `depth.csv` and `swaps.csv`
/// (after AllKNN) and `depth_all.csv`, `swaps_all.csv` (before).
pub fn build_corpus(
    inputs: &[PathBuf],
    g: &CouplingGraph,
    out: &Path,
    opts: &CorpusOptions,
) -> Result<CorpusReport, InputError> {
    let circuits = inputs
        .iter()
        .map(|p| Ok((file_label(p), read_circuit(p)?)))
        .collect::<Result<Vec<_>, InputError>>()?;
    std::fs::create_dir_all(out).map_err(|source| InputError::Io {
        path: out.to_owned(),
        source,
    })?;
    let pending = chunk_inputs(&circuits, &opts.plans, g.num_qubits());
    info!("labeling {} samples on {}", pending.len(), g.name());

    let results: Vec<_> = with_jobs(opts.jobs, || {
        pending
            .par_iter()
            .map(|s| label_sample(&s.circuit, g, &opts.params, &opts.solver))
            .collect()
    });

    let mut depth = Dataset::new(Target::Depth, g.name());
    let mut swaps = Dataset::new(Target::Swaps, g.name());
    let mut failures = Vec::new();
    for (s, r) in pending.iter().zip(results) {
        let outcome = match r {
            Ok(o) => o,
            Err(e) => {
                warn!("{}: skipped: {e}", s.name);
                failures.push((s.name.clone(), e.to_string()));
                continue;
            }
        };
        let dir = out.join("samples").join(&s.name);
        write_circuit(&dir.join("original.qasm"), &s.circuit)?;
        write_circuit(&dir.join("result").join("mapped.qasm"), &outcome.solution.mapped_circuit)?;
        let t = &outcome.telemetry;
        let info = SampleInfo {
            depth: outcome.solution.final_depth,
            swaps: outcome.solution.swap_count,
            graph: g.name().to_owned(),
            search_counts: SearchCounts {
                depth_checks: t.depth_checks,
                swap_checks: t.swap_checks,
            },
            source: s.source.clone(),
        };
        write_json(&dir.join("info.json"), &info)?;
        let features = extract_features(&s.circuit);
        let source = format!("samples/{}/original.qasm", s.name);
        depth.samples.push(Sample {
            features,
            label: Some(info.depth as u64),
            source: source.clone(),
        });
        swaps.samples.push(Sample {
            features,
            label: Some(info.swaps as u64),
            source,
        });
    }
    let refine = |d: &Dataset| {
        if opts.k_max == 0 || d.len() <= opts.k_max {
            d.clone()
        } else {
            allknn_refine(d, opts.k_max).expect("every sample is labeled")
        }
    };
    let depth_refined = refine(&depth);
    let swaps_refined = refine(&swaps);
    write_dataset(&out.join("depth_all.csv"), &depth)?;
    write_dataset(&out.join("swaps_all.csv"), &swaps)?;
    write_dataset(&out.join("depth.csv"), &depth_refined)?;
    write_dataset(&out.join("swaps.csv"), &swaps_refined)?;
    Ok(CorpusReport {
        depth,
        swaps,
        depth_refined,
        swaps_refined,
        failures,
    })
}
