//! Search-count comparison with and without predictions.

use qlayout_core::search::{solve_optimal, ModelPair, Predictions, SearchError, SearchParams, Telemetry};
use qlayout_core::{Circuit, CouplingGraph};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::with_jobs;
use crate::solver::{ProcessChecker, SolverConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub source: String,
    pub depth_off: usize,
    pub swaps_off: usize,
    pub depth_on: usize,
    pub swaps_on: usize,
    pub depth_checks_off: usize,
    pub swap_checks_off: usize,
    pub depth_checks_on: usize,
    pub swap_checks_on: usize,
    pub pred_depth: Option<u64>,
    pub pred_swaps: Option<u64>,
    pub wall_off: f64,
    pub wall_on: f64,
}

impl BenchRow {
    pub fn same_optima(&self) -> bool {
        (self.depth_off, self.swaps_off) == (self.depth_on, self.swaps_on)
    }
}

fn run(
    c: &Circuit,
    g: &CouplingGraph,
    hints: Predictions,
    params: &SearchParams,
    solver: &SolverConfig,
) -> Result<Telemetry, SearchError> {
    let mut checker = ProcessChecker::new(solver.clone());
    solve_optimal(c, g, hints, params, &mut checker).map(|o| o.telemetry)
}

/// Solves every circuit twice: from the plain lower bounds, then from the
/// models' predictions (or from `hints` when no models are given).
pub fn run_bench(
    circuits: &[(String, Circuit)],
    g: &CouplingGraph,
    models: Option<&ModelPair>,
    params: &SearchParams,
    solver: &SolverConfig,
    jobs: usize,
) -> Vec<Result<BenchRow, (String, SearchError)>> {
    with_jobs(jobs, || {
        circuits
            .par_iter()
            .map(|(name, c)| {
                let hints = models.map(|m| m.predict(c)).unwrap_or_default();
                let fail = |e| (name.clone(), e);
                let off = run(c, g, Predictions::default(), params, solver).map_err(fail)?;
                let on = run(c, g, hints, params, solver).map_err(fail)?;
                let wall = |t: &Telemetry| t.wall_time_per_check.iter().sum::<f64>();
                Ok(BenchRow {
                    source: name.clone(),
                    depth_off: off.optimal_depth.unwrap_or(0),
                    swaps_off: off.optimal_swaps.unwrap_or(0),
                    depth_on: on.optimal_depth.unwrap_or(0),
                    swaps_on: on.optimal_swaps.unwrap_or(0),
                    depth_checks_off: off.depth_checks,
                    swap_checks_off: off.swap_checks,
                    depth_checks_on: on.depth_checks,
                    swap_checks_on: on.swap_checks,
                    pred_depth: hints.depth,
                    pred_swaps: hints.swaps,
                    wall_off: wall(&off),
                    wall_on: wall(&on),
                })
            })
            .collect()
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BenchSummary {
    pub instances: usize,
    pub mean_depth_checks_off: f64,
    pub mean_depth_checks_on: f64,
    pub mean_swap_checks_off: f64,
    pub mean_swap_checks_on: f64,
    pub total_wall_off: f64,
    pub total_wall_on: f64,
    pub optima_agree: bool,
}

pub fn summarize(rows: &[BenchRow]) -> BenchSummary {
    let n = rows.len().max(1) as f64;
    let mean = |f: fn(&BenchRow) -> usize| rows.iter().map(f).sum::<usize>() as f64 / n;
    BenchSummary {
        instances: rows.len(),
        mean_depth_checks_off: mean(|r| r.depth_checks_off),
        mean_depth_checks_on: mean(|r| r.depth_checks_on),
        mean_swap_checks_off: mean(|r| r.swap_checks_off),
        mean_swap_checks_on: mean(|r| r.swap_checks_on),
        total_wall_off: rows.iter().map(|r| r.wall_off).sum(),
        total_wall_on: rows.iter().map(|r| r.wall_on).sum(),
        optima_agree: rows.iter().all(BenchRow::same_optima),
    }
}
