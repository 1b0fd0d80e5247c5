//! Decoded mappings, physical circuit reconstruction and an independent
//! validator that replays a schedule without looking at the encoding.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::arch::CouplingGraph;
use crate::circuit::{build_dag, Circuit};
use crate::encode::{pi_name, sigma_name, time_name, EncodingContext};
use crate::model::{Value, ValueTable};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DecodeError {
    #[error("value for `{0}` missing from the model")]
    Missing(String),
    #[error("value for `{0}` has the wrong sort")]
    WrongSort(String),
    #[error("context and circuit disagree on {0}")]
    Shape(&'static str),
}

/// How inserted swaps appear in the physical circuit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SwapEmission {
    /// `cx a,b; cx b,a; cx a,b`
    #[default]
    ThreeCnots,
    /// A single `swap a,b`.
    Opcode,
}

/// A swap on physical edge `edge` finishing at step `time`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ScheduledSwap {
    pub time: usize,
    pub edge: (usize, usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MappingSolution {
    /// `initial_map[logical] = physical` at step 0.
    pub initial_map: Vec<usize>,
    pub gate_times: Vec<usize>,
    /// Sorted by completion time, then edge.
    pub swaps: Vec<ScheduledSwap>,
    pub swap_duration: usize,
    pub final_depth: usize,
    pub swap_count: usize,
    /// Per-step layouts as reported by the solver, `layouts[t][q]`; empty when
    /// the solution was not decoded from a model.
    pub layouts: Vec<Vec<usize>>,
    pub mapped_circuit: Circuit,
}

/// `1 + ` the latest gate or swap completion step, 0 for an empty schedule.
pub fn schedule_depth(gate_times: &[usize], swaps: &[ScheduledSwap]) -> usize {
    gate_times
        .iter()
        .copied()
        .chain(swaps.iter().map(|s| s.time))
        .max()
        .map_or(0, |t| t + 1)
}

/// Replays the schedule onto physical qubits. Gates run at their step on the
/// current layout; a swap is written at its start step and changes the layout
/// after its completion step.
pub fn reconstruct(
    original: &Circuit,
    num_physical: usize,
    initial_map: &[usize],
    gate_times: &[usize],
    swaps: &[ScheduledSwap],
    swap_duration: usize,
    emission: SwapEmission,
) -> Circuit {
    let mut out = Circuit::new(num_physical);
    let mut pos = initial_map.to_vec();
    let depth = schedule_depth(gate_times, swaps);
    for t in 0..depth {
        for g in original.gates().iter().filter(|g| gate_times.get(g.id) == Some(&t)) {
            let qubits: Vec<usize> = g.qubits.iter().map(|&q| pos[q]).collect();
            // a malformed schedule can only be reported by the validator
            let _ = out.push(g.name.clone(), &qubits, g.params.clone());
        }
        for s in swaps.iter().filter(|s| s.time + 1 == t + swap_duration) {
            let (a, b) = s.edge;
            match emission {
                SwapEmission::ThreeCnots => {
                    let _ = out.push("cx", &[a, b], Vec::new());
                    let _ = out.push("cx", &[b, a], Vec::new());
                    let _ = out.push("cx", &[a, b], Vec::new());
                }
                SwapEmission::Opcode => {
                    let _ = out.push("swap", &[a, b], Vec::new());
                }
            }
        }
        for s in swaps.iter().filter(|s| s.time == t) {
            let (a, b) = s.edge;
            for p in pos.iter_mut() {
                if *p == a {
                    *p = b;
                } else if *p == b {
                    *p = a;
                }
            }
        }
    }
    out
}

impl MappingSolution {
    /// Builds a solution from a schedule, deriving depth, swap count and the
    /// physical circuit.
    pub fn from_schedule(
        original: &Circuit,
        graph: &CouplingGraph,
        initial_map: Vec<usize>,
        gate_times: Vec<usize>,
        mut swaps: Vec<ScheduledSwap>,
        swap_duration: usize,
        emission: SwapEmission,
    ) -> Self {
        swaps.sort();
        let mapped_circuit = reconstruct(
            original,
            graph.num_qubits(),
            &initial_map,
            &gate_times,
            &swaps,
            swap_duration,
            emission,
        );
        MappingSolution {
            final_depth: schedule_depth(&gate_times, &swaps),
            swap_count: swaps.len(),
            initial_map,
            gate_times,
            swaps,
            swap_duration,
            layouts: Vec::new(),
            mapped_circuit,
        }
    }
}

fn lookup(values: &ValueTable, name: String) -> Result<Value, DecodeError> {
    values.get(&name).copied().ok_or(DecodeError::Missing(name))
}

fn lookup_bits(values: &ValueTable, name: String) -> Result<usize, DecodeError> {
    match lookup(values, name.clone())? {
        Value::Bits { value, .. } => Ok(value as usize),
        Value::Bool(_) => Err(DecodeError::WrongSort(name)),
    }
}

/// Turns a satisfying assignment into a schedule and physical circuit.
pub fn decode_solution(
    values: &ValueTable,
    ctx: &EncodingContext,
    circuit: &Circuit,
    graph: &CouplingGraph,
    emission: SwapEmission,
) -> Result<MappingSolution, DecodeError> {
    if ctx.num_gates() != circuit.len() || ctx.num_logical() != circuit.num_qubits() {
        return Err(DecodeError::Shape("circuit size"));
    }
    if ctx.edges() != graph.edges() {
        return Err(DecodeError::Shape("edge list"));
    }
    let initial_map = (0..ctx.num_logical())
        .map(|q| lookup_bits(values, pi_name(q, 0)))
        .collect::<Result<Vec<_>, _>>()?;
    let gate_times = (0..ctx.num_gates())
        .map(|g| lookup_bits(values, time_name(g)))
        .collect::<Result<Vec<_>, _>>()?;
    let mut swaps = Vec::new();
    for (k, &edge) in ctx.edges().iter().enumerate() {
        for t in 0..ctx.d_ub() {
            let name = sigma_name(k, t);
            match lookup(values, name.clone())? {
                Value::Bool(true) => swaps.push(ScheduledSwap { time: t, edge }),
                Value::Bool(false) => {}
                Value::Bits { .. } => return Err(DecodeError::WrongSort(name)),
            }
        }
    }
    let mut sol = MappingSolution::from_schedule(
        circuit,
        graph,
        initial_map,
        gate_times,
        swaps,
        ctx.swap_duration(),
        emission,
    );
    sol.layouts = (0..sol.final_depth.min(ctx.d_ub()))
        .map(|t| {
            (0..ctx.num_logical())
                .map(|q| lookup_bits(values, pi_name(q, t)))
                .collect::<Result<Vec<_>, _>>()
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(sol)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    /// Wrong vector lengths.
    Malformed,
    /// Layout not an injection into the device.
    Injectivity,
    /// Two-qubit gate or swap on an uncoupled pair.
    Adjacency,
    /// Dependent gates not strictly ordered.
    Order,
    /// Swap window clashing with another swap or with a gate, or starting
    /// before step 0.
    SwapOverlap,
    /// Reported per-step layouts disagree with the swap replay.
    MappingUpdate,
    /// Reported depth, swap count or physical circuit disagree with the schedule.
    Consistency,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub kind: ViolationKind,
    pub detail: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn first(&self) -> Option<&Violation> {
        self.violations.first()
    }

    pub fn has(&self, kind: ViolationKind) -> bool {
        self.violations.iter().any(|v| v.kind == kind)
    }

    fn add(&mut self, kind: ViolationKind, detail: String) {
        self.violations.push(Violation { kind, detail });
    }
}

fn windows_overlap(a: &ScheduledSwap, b: &ScheduledSwap, dur: usize) -> bool {
    // [t - dur + 1, t] intersect, written without underflow
    a.time < b.time + dur && b.time < a.time + dur
}

fn shares_qubit(a: (usize, usize), b: (usize, usize)) -> bool {
    a.0 == b.0 || a.0 == b.1 || a.1 == b.0 || a.1 == b.1
}

/// Checks a solution against the circuit and device by replaying it step by
/// step. Every violation found is reported, in check order.
pub fn validate_solution(
    original: &Circuit,
    graph: &CouplingGraph,
    sol: &MappingSolution,
) -> ValidationReport {
    use ViolationKind::*;
    let mut report = ValidationReport::default();
    let n_phys = graph.num_qubits();
    let dur = sol.swap_duration.max(1);

    if sol.initial_map.len() != original.num_qubits() {
        report.add(
            Malformed,
            format!(
                "initial map has {} entries for {} qubits",
                sol.initial_map.len(),
                original.num_qubits()
            ),
        );
    }
    if sol.gate_times.len() != original.len() {
        report.add(
            Malformed,
            format!(
                "{} gate times for {} gates",
                sol.gate_times.len(),
                original.len()
            ),
        );
    }
    if !report.is_valid() {
        return report;
    }

    let mut seen = vec![None; n_phys];
    for (q, &p) in sol.initial_map.iter().enumerate() {
        if p >= n_phys {
            report.add(Injectivity, format!("q{q} mapped to missing p{p}"));
        } else if let Some(other) = seen[p] {
            report.add(Injectivity, format!("q{other} and q{q} share p{p}"));
        } else {
            seen[p] = Some(q);
        }
    }
    if !report.is_valid() {
        return report;
    }

    for s in &sol.swaps {
        if !graph.has_edge(s.edge.0, s.edge.1) {
            report.add(
                Adjacency,
                format!("swap on uncoupled pair {:?} at {}", s.edge, s.time),
            );
        }
        if s.time + 1 < dur {
            report.add(
                SwapOverlap,
                format!("swap on {:?} completing at {} starts before step 0", s.edge, s.time),
            );
        }
    }
    for (i, a) in sol.swaps.iter().enumerate() {
        for b in &sol.swaps[i + 1..] {
            if shares_qubit(a.edge, b.edge) && windows_overlap(a, b, dur) {
                report.add(
                    SwapOverlap,
                    format!(
                        "swaps {:?}@{} and {:?}@{} overlap",
                        a.edge, a.time, b.edge, b.time
                    ),
                );
            }
        }
    }

    for &(a, b) in build_dag(original).edges() {
        if sol.gate_times[a] >= sol.gate_times[b] {
            report.add(
                Order,
                format!(
                    "gate {b} at {} does not follow gate {a} at {}",
                    sol.gate_times[b], sol.gate_times[a]
                ),
            );
        }
    }

    let horizon = schedule_depth(&sol.gate_times, &sol.swaps);
    let mut pos = sol.initial_map.clone();
    for t in 0..horizon {
        if let Some(layout) = sol.layouts.get(t) {
            if *layout != pos {
                report.add(
                    MappingUpdate,
                    format!("reported layout {layout:?} at step {t}, replay gives {pos:?}"),
                );
            }
        }
        for g in original.gates() {
            if sol.gate_times[g.id] != t {
                continue;
            }
            let phys: Vec<usize> = g.qubits.iter().map(|&q| pos[q]).collect();
            if let [a, b] = phys[..] {
                if !graph.has_edge(a, b) {
                    report.add(
                        Adjacency,
                        format!("gate {} on uncoupled p{a},p{b} at step {t}", g.id),
                    );
                }
            }
            for s in &sol.swaps {
                let active = t <= s.time && s.time < t + dur;
                if active && phys.iter().any(|&p| p == s.edge.0 || p == s.edge.1) {
                    report.add(
                        SwapOverlap,
                        format!(
                            "gate {} at step {t} touches swap {:?}@{}",
                            g.id, s.edge, s.time
                        ),
                    );
                }
            }
        }
        for s in sol.swaps.iter().filter(|s| s.time == t) {
            let (a, b) = s.edge;
            for p in pos.iter_mut() {
                if *p == a {
                    *p = b;
                } else if *p == b {
                    *p = a;
                }
            }
        }
    }

    if sol.swap_count != sol.swaps.len() {
        report.add(
            Consistency,
            format!(
                "swap count {} but {} swaps scheduled",
                sol.swap_count,
                sol.swaps.len()
            ),
        );
    }
    if sol.final_depth != horizon {
        report.add(
            Consistency,
            format!("depth {} but schedule spans {horizon}", sol.final_depth),
        );
    }
    let extra_per_swap = sol.mapped_circuit.len().checked_sub(original.len());
    let gate_count_ok = match extra_per_swap {
        Some(extra) if sol.swaps.is_empty() => extra == 0,
        Some(extra) => extra == sol.swaps.len() || extra == 3 * sol.swaps.len(),
        None => false,
    };
    if !gate_count_ok || sol.mapped_circuit.num_qubits() != n_phys {
        report.add(
            Consistency,
            "physical circuit size does not match the schedule".to_string(),
        );
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arch::line_graph;

    /// cx(q0,q1) then cx(q0,q2) on line(3) with q0..q2 on p0..p2: swap p0,p1
    /// over steps 1..=3, second gate at step 4.
    fn routed() -> (Circuit, CouplingGraph, MappingSolution) {
        let c = Circuit::new(3)
            .with("cx", &[0, 1])
            .unwrap()
            .with("cx", &[0, 2])
            .unwrap();
        let g = line_graph(3).unwrap();
        let sol = MappingSolution::from_schedule(
            &c,
            &g,
            vec![0, 1, 2],
            vec![0, 4],
            vec![ScheduledSwap {
                time: 3,
                edge: (0, 1),
            }],
            3,
            SwapEmission::ThreeCnots,
        );
        (c, g, sol)
    }

    #[test]
    fn valid_hand_built_solution() {
        let (c, g, sol) = routed();
        assert_eq!(sol.final_depth, 5);
        assert_eq!(sol.swap_count, 1);
        assert_eq!(sol.mapped_circuit.len(), 5);
        assert_eq!(sol.mapped_circuit.gates()[4].qubits, vec![1, 2]);
        let report = validate_solution(&c, &g, &sol);
        assert!(report.is_valid(), "{report:?}");
    }

    #[test]
    fn order_violation() {
        let (c, g, mut sol) = routed();
        sol.gate_times[1] = 0;
        let report = validate_solution(&c, &g, &sol);
        assert_eq!(report.first().unwrap().kind, ViolationKind::Order);
    }

    #[test]
    fn adjacency_violation_without_swap() {
        let (c, g, _) = routed();
        let sol = MappingSolution::from_schedule(
            &c,
            &g,
            vec![0, 1, 2],
            vec![0, 1],
            vec![],
            3,
            SwapEmission::Opcode,
        );
        let report = validate_solution(&c, &g, &sol);
        assert!(report.has(ViolationKind::Adjacency));
        assert!(!report.has(ViolationKind::Order));
    }

    #[test]
    fn swap_clashes() {
        let (c, g, mut sol) = routed();
        sol.gate_times[1] = 3;
        sol.final_depth = 4;
        let report = validate_solution(&c, &g, &sol);
        assert!(report.has(ViolationKind::SwapOverlap));

        let (c, g, mut sol) = routed();
        sol.swaps.push(ScheduledSwap {
            time: 4,
            edge: (1, 2),
        });
        sol.swap_count = 2;
        assert!(validate_solution(&c, &g, &sol).has(ViolationKind::SwapOverlap));

        let (c, g, mut sol) = routed();
        sol.swaps[0].time = 1;
        assert!(validate_solution(&c, &g, &sol).has(ViolationKind::SwapOverlap));
    }

    #[test]
    fn injectivity_and_consistency() {
        let (c, g, mut sol) = routed();
        sol.initial_map[2] = 0;
        assert_eq!(
            validate_solution(&c, &g, &sol).first().unwrap().kind,
            ViolationKind::Injectivity
        );
        let (c, g, mut sol) = routed();
        sol.swap_count = 0;
        assert!(validate_solution(&c, &g, &sol).has(ViolationKind::Consistency));
        let (c, g, mut sol) = routed();
        sol.layouts = vec![vec![0, 1, 2]; 5];
        let report = validate_solution(&c, &g, &sol);
        assert!(report.has(ViolationKind::MappingUpdate));
    }

    #[test]
    fn zero_swap_solution_is_a_relabeling() {
        let c = Circuit::new(2).with("cx", &[0, 1]).unwrap().with("h", &[1]).unwrap();
        let g = line_graph(3).unwrap();
        let sol = MappingSolution::from_schedule(
            &c,
            &g,
            vec![2, 1],
            vec![0, 1],
            vec![],
            3,
            SwapEmission::ThreeCnots,
        );
        let names: Vec<&str> = sol.mapped_circuit.gates().iter().map(|g| g.name.as_str()).collect();
        assert_eq!(names, ["cx", "h"]);
        assert_eq!(sol.mapped_circuit.gates()[0].qubits, vec![2, 1]);
        assert!(validate_solution(&c, &g, &sol).is_valid());
    }
}
