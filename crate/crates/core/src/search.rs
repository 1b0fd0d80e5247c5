//! Bound search for the optimal depth, then the optimal swap count at that
//! depth, seeded by predictions and with adaptive sizing of the time axis.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::arch::CouplingGraph;
use crate::bit_length;
use crate::circuit::{ldc_length, Circuit};
use crate::encode::{
    build_context, encode_instance, sigma_name, BoundSet, EncodeError, EncodingContext,
    DEFAULT_SWAP_DURATION,
};
use crate::features::extract_features;
use crate::model::{Response, Value, ValueTable};
use crate::regressor::RegressionTree;
use crate::solution::{decode_solution, DecodeError, MappingSolution, SwapEmission};

/// Which side of the threshold gets the large extent increment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IncrementRule {
    /// Bounds at or above the threshold grow by the large step.
    #[default]
    LargeAboveThreshold,
    /// Bounds below the threshold grow by the large step.
    LargeBelowThreshold,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchParams {
    pub d_th: usize,
    pub d_dl: usize,
    pub d_ds: usize,
    pub swap_duration: usize,
    pub increment_rule: IncrementRule,
    pub emission: SwapEmission,
}

impl Default for SearchParams {
    fn default() -> Self {
        SearchParams {
            d_th: 50,
            d_dl: 15,
            d_ds: 10,
            swap_duration: DEFAULT_SWAP_DURATION,
            increment_rule: IncrementRule::default(),
            emission: SwapEmission::default(),
        }
    }
}

impl SearchParams {
    /// Extent increment for a trial bound.
    pub fn increment(&self, d_try: usize) -> usize {
        let large = match self.increment_rule {
            IncrementRule::LargeAboveThreshold => d_try >= self.d_th,
            IncrementRule::LargeBelowThreshold => d_try < self.d_th,
        };
        if large {
            self.d_dl
        } else {
            self.d_ds
        }
    }
}

/// What to do after a check.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Action {
    Try(usize),
    /// Check `unsat + 1`, the only bound left between a failing and a
    /// passing trial.
    Refine { unsat: usize, sat: usize },
    Done(usize),
    /// The next trial would exceed the cap.
    Exhausted,
}

impl Action {
    pub fn bound(self) -> Option<usize> {
        match self {
            Action::Try(b) => Some(b),
            Action::Refine { unsat, .. } => Some(unsat + 1),
            Action::Done(_) | Action::Exhausted => None,
        }
    }
}

/// Monotone bound search in steps of two with a final single-unit refinement.
///
/// Assumes satisfiability is monotone in the bound. UNSAT moves the trial up
/// by two, SAT moves it down by two (never below `floor`); once a failing
/// bound `u` and a passing bound `u + 2` are known, `u + 1` decides.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundSearch {
    floor: usize,
    cap: usize,
    next: Action,
    highest_unsat: Option<usize>,
    lowest_sat: Option<usize>,
}

impl BoundSearch {
    pub fn new(start: usize, floor: usize) -> Self {
        BoundSearch {
            floor,
            cap: usize::MAX,
            next: Action::Try(start.max(floor)),
            highest_unsat: None,
            lowest_sat: None,
        }
    }

    /// Gives up instead of trying bounds above `cap`.
    pub fn with_cap(mut self, cap: usize) -> Self {
        self.cap = cap;
        if matches!(self.next, Action::Try(b) if b > cap) {
            self.next = Action::Exhausted;
        }
        self
    }

    pub fn next_action(&self) -> Action {
        self.next
    }

    /// The bound to check next, if the search is still running.
    pub fn next_bound(&self) -> Option<usize> {
        self.next.bound()
    }

    pub fn optimum(&self) -> Option<usize> {
        match self.next {
            Action::Done(b) => Some(b),
            _ => None,
        }
    }

    pub fn highest_unsat(&self) -> Option<usize> {
        self.highest_unsat
    }

    pub fn lowest_sat(&self) -> Option<usize> {
        self.lowest_sat
    }

    /// Records the verdict for [`Self::next_bound`] and returns the next action.
    pub fn report(&mut self, sat: bool) -> Action {
        let Some(bound) = self.next_bound() else {
            return self.next;
        };
        if sat {
            self.lowest_sat = Some(self.lowest_sat.map_or(bound, |s| s.min(bound)));
        } else {
            self.highest_unsat = Some(self.highest_unsat.map_or(bound, |u| u.max(bound)));
        }
        self.next = self.decide(bound);
        self.next
    }

    fn decide(&self, last: usize) -> Action {
        // lowest bound not yet ruled out
        let open = self.highest_unsat.map_or(self.floor, |u| u + 1).max(self.floor);
        match self.lowest_sat {
            Some(s) if s <= open => Action::Done(s),
            Some(s) if s == open + 1 && self.highest_unsat.is_some_and(|u| u + 1 == open) => Action::Refine {
                unsat: open - 1,
                sat: s,
            },
            Some(s) if s == open + 1 => Action::Try(open),
            Some(s) => Action::Try((s - 2).max(open)),
            None => {
                let up = (last + 2).max(open);
                if up > self.cap {
                    Action::Exhausted
                } else {
                    Action::Try(up)
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Depth,
    Swaps,
}

/// New sizes for the time axis after a check.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Resize {
    pub d_ub: usize,
    pub l_b: u32,
}

/// Bound search plus the extents of the encoding it drives.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchState {
    pub phase: Phase,
    pub search: BoundSearch,
    pub prev_d_try: Option<usize>,
    pub d_ub: usize,
    pub l_b: u32,
    pub params: SearchParams,
    pub n_last: Option<usize>,
    pub checks: usize,
    pub resize_events: usize,
}

/// Depth search starting at `max(d_pred, ldc)` with the time axis sized one
/// increment past the start.
pub fn init_depth_search(d_pred: usize, ldc: usize, params: SearchParams) -> SearchState {
    let floor = ldc.max(1);
    let d_try = d_pred.max(floor);
    let d_ub = d_try + params.increment(d_try);
    SearchState {
        phase: Phase::Depth,
        search: BoundSearch::new(d_try, floor),
        prev_d_try: None,
        d_ub,
        l_b: bit_length(d_ub as u64),
        params,
        n_last: None,
        checks: 0,
        resize_events: 0,
    }
}

/// Swap search starting at `min(n_pred, n_last)` with the extents left by
/// the depth phase. `depth` is the optimal depth that stays asserted.
pub fn init_swap_search(
    n_pred: usize,
    n_last: usize,
    depth: usize,
    d_ub: usize,
    l_b: u32,
    params: SearchParams,
) -> SearchState {
    let start = n_pred.min(n_last);
    let mut state = SearchState {
        phase: Phase::Swaps,
        search: BoundSearch::new(start, 0).with_cap(start.max(n_last) + 2),
        prev_d_try: None,
        d_ub,
        l_b,
        params,
        n_last: Some(n_last),
        checks: 0,
        resize_events: 0,
    };
    if state.fit_depth_bound(depth) {
        state.resize_events += 1;
    }
    state
}

impl SearchState {
    /// Bound for the next check, if any.
    pub fn d_try(&self) -> Option<usize> {
        self.search.next_bound()
    }

    /// Grows the extents so that `bound` can be asserted as a depth limit.
    /// Returns whether anything changed.
    fn fit_depth_bound(&mut self, bound: usize) -> bool {
        let mut changed = false;
        if bound > self.d_ub {
            self.d_ub = bound + self.params.increment(bound);
            changed = true;
        }
        if bit_length(bound as u64) > self.l_b {
            self.l_b = bit_length(bound as u64);
            changed = true;
        }
        changed
    }

    /// Records a verdict for the current trial and sizes the time axis for
    /// the next one.
    pub fn apply(&mut self, sat: bool) -> (Action, Option<Resize>) {
        let current = self.d_try();
        self.checks += 1;
        let action = self.search.report(sat);
        self.prev_d_try = current;
        let resize = match (current, action.bound()) {
            (Some(cur), Some(next)) => resize_variables(self, sat, cur, next),
            _ => None,
        };
        if let Some(r) = resize {
            self.d_ub = r.d_ub;
            self.l_b = r.l_b;
            self.resize_events += 1;
        }
        (action, resize)
    }
}

/// Extent changes needed to move from trial `current` to trial `next`.
///
/// Only the depth phase resizes. After UNSAT the axis grows to
/// `current + increment` once `next` no longer fits below it, and `l_b`
/// widens when `next` needs more bits. After SAT `l_b` narrows when the next
/// bound needs fewer bits than the last one.
pub fn resize_variables(
    state: &SearchState,
    sat: bool,
    current: usize,
    next: usize,
) -> Option<Resize> {
    if state.phase == Phase::Swaps {
        return None;
    }
    let mut r = Resize {
        d_ub: state.d_ub,
        l_b: state.l_b,
    };
    let next_bits = bit_length(next as u64);
    if !sat {
        if next >= state.d_ub {
            r.d_ub = (current + state.params.increment(current)).max(next + 1);
        }
        r.l_b = r.l_b.max(next_bits);
    } else if next_bits < bit_length(current as u64) && next_bits < r.l_b {
        r.l_b = next_bits.max(1);
    }
    // a refinement above the last trial can still cross a power of two
    r.l_b = r.l_b.max(next_bits);
    if next > r.d_ub {
        r.d_ub = next + state.params.increment(next);
    }
    (r != Resize {
        d_ub: state.d_ub,
        l_b: state.l_b,
    })
    .then_some(r)
}

/// One satisfiability oracle call per script.
pub trait Checker {
    type Error: core::fmt::Display;

    fn check(&mut self, script: &str) -> Result<Response, Self::Error>;

    /// Wall-clock seconds spent in the last check, when measured.
    fn last_elapsed(&self) -> Option<f64> {
        None
    }
}

/// Starting points for the two phases.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Predictions {
    pub depth: Option<u64>,
    pub swaps: Option<u64>,
}

/// Trained depth and swap models.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelPair {
    pub depth: RegressionTree,
    pub swaps: RegressionTree,
}

impl ModelPair {
    pub fn predict(&self, c: &Circuit) -> Predictions {
        let f = extract_features(c);
        Predictions {
            depth: Some(self.depth.predict(&f)),
            swaps: Some(self.swaps.predict(&f)),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Telemetry {
    pub optimal_depth: Option<usize>,
    pub optimal_swaps: Option<usize>,
    pub depth_checks: usize,
    pub swap_checks: usize,
    pub resize_events: usize,
    pub wall_time_per_check: Vec<f64>,
}

impl Telemetry {
    pub fn total_checks(&self) -> usize {
        self.depth_checks + self.swap_checks
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub phase: Phase,
    pub bound: usize,
    pub sat: bool,
    pub d_ub: usize,
    pub l_b: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchOutcome {
    pub solution: MappingSolution,
    pub telemetry: Telemetry,
    pub trace: Vec<CheckRecord>,
}

impl SearchOutcome {
    /// Failing bounds per phase; the certificates that the optimum cannot
    /// be lowered.
    pub fn unsat_bounds(&self, phase: Phase) -> Vec<usize> {
        self.trace
            .iter()
            .filter(|r| r.phase == phase && !r.sat)
            .map(|r| r.bound)
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SearchError {
    #[error(transparent)]
    Encode(#[from] EncodeError),
    #[error("solver failed: {message}")]
    Solver {
        message: String,
        telemetry: Telemetry,
    },
    #[error("solver returned unknown for bound {bound}")]
    Unknown { bound: usize, telemetry: Telemetry },
    #[error("no mapping found up to bound {cap}")]
    Exhausted { cap: usize, telemetry: Telemetry },
    #[error("model could not be decoded: {source}")]
    Decode {
        source: DecodeError,
        telemetry: Telemetry,
    },
}

impl SearchError {
    pub fn telemetry(&self) -> Option<&Telemetry> {
        match self {
            SearchError::Encode(_) => None,
            SearchError::Solver { telemetry, .. }
            | SearchError::Unknown { telemetry, .. }
            | SearchError::Exhausted { telemetry, .. }
            | SearchError::Decode { telemetry, .. } => Some(telemetry),
        }
    }
}

fn count_swaps(values: &ValueTable, ctx: &EncodingContext) -> usize {
    (0..ctx.edges().len())
        .flat_map(|k| (0..ctx.d_ub()).map(move |t| sigma_name(k, t)))
        .filter(|n| values.get(n) == Some(&Value::Bool(true)))
        .count()
}

/// Depth bound past which the device cannot be helping: every two-qubit
/// gate routed on its own across the whole device.
pub fn depth_cap(c: &Circuit, g: &CouplingGraph, swap_duration: usize) -> usize {
    ldc_length(c) + c.two_qubit_count() * g.num_qubits() * swap_duration + 2
}

struct Runner<'a, C: Checker> {
    checker: &'a mut C,
    telemetry: Telemetry,
    trace: Vec<CheckRecord>,
}

impl<C: Checker> Runner<'_, C> {
    fn run(
        &mut self,
        phase: Phase,
        ctx: &EncodingContext,
        bounds: BoundSet,
    ) -> Result<Option<ValueTable>, SearchError> {
        let script = encode_instance(ctx, bounds)?;
        let bound = match phase {
            Phase::Depth => bounds.depth,
            Phase::Swaps => bounds.swaps.unwrap_or(0),
        };
        match phase {
            Phase::Depth => self.telemetry.depth_checks += 1,
            Phase::Swaps => self.telemetry.swap_checks += 1,
        }
        let response = self.checker.check(&script);
        self.telemetry
            .wall_time_per_check
            .push(self.checker.last_elapsed().unwrap_or(0.0));
        let response = response.map_err(|e| SearchError::Solver {
            message: format!("{e}"),
            telemetry: self.telemetry.clone(),
        })?;
        let model = match response {
            Response::Sat(values) => Some(values),
            Response::Unsat => None,
            Response::Unknown => {
                return Err(SearchError::Unknown {
                    bound,
                    telemetry: self.telemetry.clone(),
                })
            }
        };
        self.trace.push(CheckRecord {
            phase,
            bound,
            sat: model.is_some(),
            d_ub: ctx.d_ub(),
            l_b: ctx.l_b(),
        });
        Ok(model)
    }
}

/// Finds a mapping with minimal depth and, among those, minimal swaps.
pub fn solve_optimal<C: Checker>(
    c: &Circuit,
    g: &CouplingGraph,
    hints: Predictions,
    params: &SearchParams,
    checker: &mut C,
) -> Result<SearchOutcome, SearchError> {
    if c.num_qubits() > g.num_qubits() {
        return Err(EncodeError::TooWide {
            logical: c.num_qubits(),
            physical: g.num_qubits(),
        }
        .into());
    }
    if params.swap_duration == 0 {
        return Err(EncodeError::SwapDuration.into());
    }
    if c.is_empty() {
        let solution = MappingSolution::from_schedule(
            c,
            g,
            (0..c.num_qubits()).collect(),
            Vec::new(),
            Vec::new(),
            params.swap_duration,
            params.emission,
        );
        let telemetry = Telemetry {
            optimal_depth: Some(0),
            optimal_swaps: Some(0),
            ..Telemetry::default()
        };
        return Ok(SearchOutcome {
            solution,
            telemetry,
            trace: Vec::new(),
        });
    }

    let mut runner = Runner {
        checker,
        telemetry: Telemetry::default(),
        trace: Vec::new(),
    };
    let to_usize = |v: Option<u64>| v.map(|x| usize::try_from(x).unwrap_or(usize::MAX));
    let ldc = ldc_length(c);
    let cap = depth_cap(c, g, params.swap_duration);

    let mut state = init_depth_search(to_usize(hints.depth).unwrap_or(0), ldc, *params);
    state.search = state.search.clone().with_cap(cap.max(state.d_try().unwrap_or(0)));
    let mut ctx = build_context(c, g, state.d_ub, state.l_b, params.swap_duration)?;
    let mut depth_model: Option<(ValueTable, EncodingContext)> = None;
    let depth = loop {
        let Some(bound) = state.d_try() else {
            unreachable!("the loop exits on terminal actions");
        };
        let model = runner.run(Phase::Depth, &ctx, BoundSet { depth: bound, swaps: None })?;
        let sat = model.is_some();
        if let Some(values) = model {
            state.n_last = Some(count_swaps(&values, &ctx));
            depth_model = Some((values, ctx.clone()));
        }
        let (action, resize) = state.apply(sat);
        if resize.is_some() {
            ctx = build_context(c, g, state.d_ub, state.l_b, params.swap_duration)?;
        }
        match action {
            Action::Done(d) => break d,
            Action::Exhausted => {
                runner.telemetry.resize_events = state.resize_events;
                return Err(SearchError::Exhausted {
                    cap,
                    telemetry: runner.telemetry,
                });
            }
            Action::Try(_) | Action::Refine { .. } => {}
        }
    };
    runner.telemetry.optimal_depth = Some(depth);
    let n_last = state.n_last.expect("a depth optimum always has a model");

    let mut swap_state = init_swap_search(
        to_usize(hints.swaps).unwrap_or(usize::MAX),
        n_last,
        depth,
        state.d_ub,
        state.l_b,
        *params,
    );
    let resizes = state.resize_events + swap_state.resize_events;
    let ctx = build_context(c, g, swap_state.d_ub, swap_state.l_b, params.swap_duration)?;
    let mut best: Option<(usize, ValueTable, EncodingContext)> = None;
    let swaps = loop {
        let Some(bound) = swap_state.d_try() else {
            unreachable!("the loop exits on terminal actions");
        };
        let model = runner.run(
            Phase::Swaps,
            &ctx,
            BoundSet {
                depth,
                swaps: Some(bound),
            },
        )?;
        let sat = model.is_some();
        if let Some(values) = model {
            if best.as_ref().is_none_or(|(b, _, _)| bound < *b) {
                best = Some((bound, values, ctx.clone()));
            }
        }
        match swap_state.apply(sat).0 {
            Action::Done(s) => break s,
            Action::Exhausted => {
                runner.telemetry.resize_events = resizes;
                return Err(SearchError::Exhausted {
                    cap: n_last + 2,
                    telemetry: runner.telemetry,
                });
            }
            Action::Try(_) | Action::Refine { .. } => {}
        }
    };
    runner.telemetry.optimal_swaps = Some(swaps);
    runner.telemetry.resize_events = resizes;

    let (values, model_ctx) = match best {
        Some((_, v, cx)) => (v, cx),
        None => depth_model.expect("depth phase ended on a model"),
    };
    let solution = decode_solution(&values, &model_ctx, c, g, params.emission).map_err(|source| {
        SearchError::Decode {
            source,
            telemetry: runner.telemetry.clone(),
        }
    })?;
    Ok(SearchOutcome {
        solution,
        telemetry: runner.telemetry,
        trace: runner.trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    /// Drives a search against a threshold oracle and returns the checked
    /// bounds with their verdicts.
    fn trace(mut s: BoundSearch, threshold: usize) -> (Vec<(usize, bool)>, Option<usize>) {
        let mut out = Vec::new();
        while let Some(b) = s.next_bound() {
            let sat = b >= threshold;
            out.push((b, sat));
            s.report(sat);
            assert!(out.len() < 200);
        }
        (out, s.optimum())
    }

    #[test]
    fn refinement_after_upward_crossing() {
        let (seq, opt) = trace(BoundSearch::new(23, 9), 25);
        assert_eq!(seq, vec![(23, false), (25, true), (24, false)]);
        assert_eq!(opt, Some(25));
        let (seq, opt) = trace(BoundSearch::new(23, 9), 24);
        assert_eq!(seq, vec![(23, false), (25, true), (24, true)]);
        assert_eq!(opt, Some(24));
    }

    #[test]
    fn refinement_after_downward_crossing() {
        let (seq, opt) = trace(BoundSearch::new(30, 9), 29);
        assert_eq!(seq, vec![(30, true), (28, false), (29, true)]);
        assert_eq!(opt, Some(29));
        let (seq, opt) = trace(BoundSearch::new(30, 9), 30);
        assert_eq!(seq, vec![(30, true), (28, false), (29, false)]);
        assert_eq!(opt, Some(30));
    }

    #[test]
    fn start_at_floor() {
        let (seq, opt) = trace(BoundSearch::new(9, 9), 5);
        assert_eq!(seq, vec![(9, true)]);
        assert_eq!(opt, Some(9));
        let (seq, opt) = trace(BoundSearch::new(0, 0), 0);
        assert_eq!(seq, vec![(0, true)]);
        assert_eq!(opt, Some(0));
    }

    #[test]
    fn downward_steps_clamp_at_floor() {
        let (seq, opt) = trace(BoundSearch::new(10, 9), 9);
        assert_eq!(seq, vec![(10, true), (9, true)]);
        assert_eq!(opt, Some(9));
        let (seq, opt) = trace(BoundSearch::new(10, 9), 10);
        assert_eq!(seq, vec![(10, true), (9, false)]);
        assert_eq!(opt, Some(10));
    }

    #[test]
    fn swap_phase_examples() {
        let (seq, opt) = trace(BoundSearch::new(2, 0), 3);
        assert_eq!(seq, vec![(2, false), (4, true), (3, true)]);
        assert_eq!(opt, Some(3));
    }

    #[test]
    fn matches_linear_scan_for_all_thresholds() {
        for floor in 0..5 {
            for start in floor..25 {
                for threshold in 0..30 {
                    let (seq, opt) = trace(BoundSearch::new(start, floor), threshold);
                    assert_eq!(opt, Some(threshold.max(floor)));
                    // the optimum has a passing check and, above the floor,
                    // its predecessor a failing one
                    let best = threshold.max(floor);
                    assert!(seq.contains(&(best, true)));
                    if best > floor {
                        assert!(seq.contains(&(best - 1, false)));
                    }
                    if start == best {
                        assert!(seq.len() <= 3);
                    }
                }
            }
        }
    }

    #[test]
    fn cap_stops_upward_search() {
        let (seq, opt) = trace(BoundSearch::new(1, 1).with_cap(6), 100);
        assert_eq!(seq, vec![(1, false), (3, false), (5, false)]);
        assert_eq!(opt, None);
    }

    #[test]
    fn depth_search_initialisation() {
        let s = init_depth_search(0, 9, SearchParams::default());
        assert_eq!((s.d_try(), s.d_ub, s.l_b), (Some(9), 19, 5));
        let s = init_depth_search(60, 9, SearchParams::default());
        assert_eq!((s.d_try(), s.d_ub), (Some(60), 75));
        let s = init_depth_search(9, 9, SearchParams::default());
        assert_eq!(s.d_try(), Some(9));
    }

    #[test]
    fn swap_search_initialisation() {
        let s = init_swap_search(5, 3, 9, 19, 5, SearchParams::default());
        assert_eq!(s.d_try(), Some(3));
        assert_eq!(s.resize_events, 0);
        // an optimum with more bits than the narrowed width forces a resize
        let s = init_swap_search(5, 3, 16, 19, 4, SearchParams::default());
        assert_eq!(s.l_b, 5);
        assert_eq!(s.resize_events, 1);
    }

    fn state_at(d_try: usize, d_ub: usize, l_b: u32) -> SearchState {
        let mut s = init_depth_search(d_try, 1, SearchParams::default());
        s.d_ub = d_ub;
        s.l_b = l_b;
        s
    }

    #[test]
    fn resize_examples() {
        let s = state_at(48, 49, 6);
        assert_eq!(
            resize_variables(&s, false, 48, 50),
            Some(Resize { d_ub: 58, l_b: 6 })
        );
        let s = state_at(60, 61, 6);
        assert_eq!(
            resize_variables(&s, false, 60, 62),
            Some(Resize { d_ub: 75, l_b: 6 })
        );
        // widening at a power of two
        let s = state_at(15, 30, 4);
        assert_eq!(
            resize_variables(&s, false, 15, 17),
            Some(Resize { d_ub: 30, l_b: 5 })
        );
        // narrowing after SAT
        let s = state_at(17, 30, 5);
        assert_eq!(
            resize_variables(&s, true, 17, 15),
            Some(Resize { d_ub: 30, l_b: 4 })
        );
        assert_eq!(resize_variables(&s, true, 17, 16), None);
        assert_eq!(bit_length(23), 5);
    }

    #[test]
    fn literal_branch_rule_swaps_increments() {
        let p = SearchParams {
            increment_rule: IncrementRule::LargeBelowThreshold,
            ..SearchParams::default()
        };
        assert_eq!(p.increment(48), 15);
        assert_eq!(p.increment(60), 10);
        let d = SearchParams::default();
        assert_eq!(d.increment(48), 10);
        assert_eq!(d.increment(50), 15);
    }

    #[test]
    fn state_keeps_extent_ahead_of_trials() {
        for start in 1..70 {
            for threshold in start..90 {
                let mut s = init_depth_search(start, 1, SearchParams::default());
                while let Some(b) = s.d_try() {
                    assert!(s.d_ub > b);
                    assert!(s.l_b >= bit_length(b as u64));
                    s.apply(b >= threshold);
                }
                assert_eq!(s.search.optimum(), Some(threshold));
            }
        }
    }
}
