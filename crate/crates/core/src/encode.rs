//! SMT-LIB2 (QF_BV) encoding of the decision problem "is there a mapping of
//! this circuit onto this device finishing within `T_B` time steps using at
//! most `S_B` swaps".
//!
//! Variables, for logical qubit `q`, edge `e`, gate `g` and step `t < d_ub`:
//!
//! - `pi_q_t`: physical qubit holding `q` at `t` (bit vector, `qubit_bits` wide)
//! - `sg_e_t`: a swap on `e` completes at `t` (Bool); it occupies
//!   `[t - swap_duration + 1, t]` and the exchange is visible from `t + 1`
//! - `tg_g`: execution step of gate `g` (bit vector, `l_b` wide)
//!
//! A schedule with every `tg_g < T_B` and no swap completing at or after
//! `T_B` has depth at most `T_B`.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write;

use crate::arch::CouplingGraph;
use crate::bit_length;
use crate::circuit::{build_dag, ldc_length, Circuit};

pub const DEFAULT_SWAP_DURATION: usize = 3;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EncodeError {
    #[error("circuit uses {logical} qubits but the device has {physical}")]
    TooWide { logical: usize, physical: usize },
    #[error("time extent {d_ub} is below the longest dependency chain {ldc}")]
    ExtentTooSmall { d_ub: usize, ldc: usize },
    #[error("gate time width {l_b} bits cannot hold depth bound {bound}")]
    WidthTooSmall { l_b: u32, bound: usize },
    #[error("depth bound {bound} exceeds time extent {d_ub}; resize first")]
    BoundExceedsExtent { bound: usize, d_ub: usize },
    #[error("swap duration must be at least 1")]
    SwapDuration,
}

/// Sizes and static data for one family of decision scripts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EncodingContext {
    num_logical: usize,
    num_physical: usize,
    edges: Vec<(usize, usize)>,
    gate_qubits: Vec<Vec<usize>>,
    dependencies: Vec<(usize, usize)>,
    d_ub: usize,
    l_b: u32,
    swap_duration: usize,
    qubit_bits: u32,
}

/// Depth limit `T_B` and optional swap limit `S_B`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BoundSet {
    pub depth: usize,
    pub swaps: Option<usize>,
}

/// A group of `(assert ...)` bodies.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Fragment {
    pub assertions: Vec<String>,
}

impl Fragment {
    fn push(&mut self, s: String) {
        self.assertions.push(s);
    }

    pub fn len(&self) -> usize {
        self.assertions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assertions.is_empty()
    }
}

pub fn pi_name(q: usize, t: usize) -> String {
    format!("pi_{q}_{t}")
}

pub fn sigma_name(e: usize, t: usize) -> String {
    format!("sg_{e}_{t}")
}

pub fn time_name(g: usize) -> String {
    format!("tg_{g}")
}

/// `#b...` literal of `value` in `width` bits.
pub fn bv_literal(value: u64, width: u32) -> String {
    let mut s = String::with_capacity(width as usize + 2);
    s.push_str("#b");
    for i in (0..width).rev() {
        s.push(if (value >> i) & 1 == 1 { '1' } else { '0' });
    }
    s
}

pub fn build_context(
    c: &Circuit,
    g: &CouplingGraph,
    d_ub: usize,
    l_b: u32,
    swap_duration: usize,
) -> Result<EncodingContext, EncodeError> {
    if c.num_qubits() > g.num_qubits() {
        return Err(EncodeError::TooWide {
            logical: c.num_qubits(),
            physical: g.num_qubits(),
        });
    }
    if swap_duration == 0 {
        return Err(EncodeError::SwapDuration);
    }
    let ldc = ldc_length(c);
    if d_ub < ldc.max(1) {
        return Err(EncodeError::ExtentTooSmall { d_ub, ldc });
    }
    let l_b = l_b.max(1);
    let qubit_bits = bit_length(g.num_qubits().saturating_sub(1) as u64).max(1);
    Ok(EncodingContext {
        num_logical: c.num_qubits(),
        num_physical: g.num_qubits(),
        edges: g.edges().to_vec(),
        gate_qubits: c.gates().iter().map(|g| g.qubits.clone()).collect(),
        dependencies: build_dag(c).edges().to_vec(),
        d_ub,
        l_b,
        swap_duration,
        qubit_bits,
    })
}

impl EncodingContext {
    pub fn d_ub(&self) -> usize {
        self.d_ub
    }

    pub fn l_b(&self) -> u32 {
        self.l_b
    }

    pub fn swap_duration(&self) -> usize {
        self.swap_duration
    }

    pub fn qubit_bits(&self) -> u32 {
        self.qubit_bits
    }

    pub fn num_logical(&self) -> usize {
        self.num_logical
    }

    pub fn num_physical(&self) -> usize {
        self.num_physical
    }

    pub fn num_gates(&self) -> usize {
        self.gate_qubits.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn gate_qubits(&self, g: usize) -> &[usize] {
        &self.gate_qubits[g]
    }

    /// `|Q| * d_ub + |E| * d_ub + |gates|`.
    pub fn num_declarations(&self) -> usize {
        (self.num_logical + self.edges.len()) * self.d_ub + self.gate_qubits.len()
    }

    pub fn num_sigma(&self) -> usize {
        self.edges.len() * self.d_ub
    }

    /// Time steps a gate variable can actually take.
    fn time_steps(&self) -> usize {
        let representable = if self.l_b >= 63 {
            usize::MAX
        } else {
            1usize << self.l_b
        };
        self.d_ub.min(representable)
    }

    fn time_lit(&self, t: usize) -> String {
        bv_literal(t as u64, self.l_b)
    }

    fn qubit_lit(&self, p: usize) -> String {
        bv_literal(p as u64, self.qubit_bits)
    }

    fn incident(&self, p: usize) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().enumerate().filter_map(move |(k, &(a, b))| {
            if a == p {
                Some((k, b))
            } else if b == p {
                Some((k, a))
            } else {
                None
            }
        })
    }

    fn overlapping(&self, k: usize) -> impl Iterator<Item = usize> + '_ {
        let (a, b) = self.edges[k];
        self.edges
            .iter()
            .enumerate()
            .filter(move |&(i, &(c, d))| i != k && (c == a || c == b || d == a || d == b))
            .map(|(i, _)| i)
    }

    /// All declared variable names, in declaration order.
    pub fn variable_names(&self) -> Vec<String> {
        let mut out = Vec::with_capacity(self.num_declarations());
        for q in 0..self.num_logical {
            for t in 0..self.d_ub {
                out.push(pi_name(q, t));
            }
        }
        for e in 0..self.edges.len() {
            for t in 0..self.d_ub {
                out.push(sigma_name(e, t));
            }
        }
        for g in 0..self.gate_qubits.len() {
            out.push(time_name(g));
        }
        out
    }
}

fn or_all(terms: Vec<String>) -> String {
    match terms.len() {
        0 => String::from("false"),
        1 => terms.into_iter().next().unwrap_or_default(),
        _ => format!("(or {})", terms.join(" ")),
    }
}

fn and_all(terms: Vec<String>) -> String {
    match terms.len() {
        0 => String::from("true"),
        1 => terms.into_iter().next().unwrap_or_default(),
        _ => format!("(and {})", terms.join(" ")),
    }
}

/// Injective mapping, adjacency at two-qubit gate times, gate order, swap
/// exclusivity and the swap-driven mapping update.
pub fn encode_base(ctx: &EncodingContext) -> Fragment {
    let mut f = Fragment::default();
    let steps = ctx.time_steps();

    // mapping: in range and injective per step
    let power_of_two = ctx.num_physical.is_power_of_two() && ctx.num_physical > 1;
    for t in 0..ctx.d_ub {
        if !power_of_two {
            for q in 0..ctx.num_logical {
                f.push(format!(
                    "(bvult {} {})",
                    pi_name(q, t),
                    ctx.qubit_lit(ctx.num_physical)
                ));
            }
        }
        if ctx.num_logical >= 2 {
            let names: Vec<String> = (0..ctx.num_logical).map(|q| pi_name(q, t)).collect();
            f.push(format!("(distinct {})", names.join(" ")));
        }
    }

    // gate times stay inside the time arrays
    if ctx.l_b >= 63 || (1usize << ctx.l_b) > ctx.d_ub {
        for g in 0..ctx.num_gates() {
            f.push(format!("(bvult {} {})", time_name(g), ctx.time_lit(ctx.d_ub)));
        }
    }

    // two-qubit gates act on coupled qubits
    for (g, qs) in ctx.gate_qubits.iter().enumerate() {
        let &[q1, q2] = qs.as_slice() else {
            continue;
        };
        for t in 0..steps {
            let options: Vec<String> = ctx
                .edges
                .iter()
                .map(|&(a, b)| {
                    let (pa, pb) = (ctx.qubit_lit(a), ctx.qubit_lit(b));
                    let (x, y) = (pi_name(q1, t), pi_name(q2, t));
                    format!(
                        "(or (and (= {x} {pa}) (= {y} {pb})) (and (= {x} {pb}) (= {y} {pa})))"
                    )
                })
                .collect();
            f.push(format!(
                "(=> (= {} {}) {})",
                time_name(g),
                ctx.time_lit(t),
                or_all(options)
            ));
        }
    }

    // dependency order
    for &(a, b) in &ctx.dependencies {
        f.push(format!("(bvult {} {})", time_name(a), time_name(b)));
    }

    // swaps: no completion before a full duration fits, no overlap with
    // swaps sharing a qubit, no gate on either endpoint while running
    let dur = ctx.swap_duration;
    for k in 0..ctx.edges.len() {
        let (a, b) = ctx.edges[k];
        for t in 0..ctx.d_ub {
            if t + 1 < dur {
                f.push(format!("(not {})", sigma_name(k, t)));
                continue;
            }
            let start = t + 1 - dur;
            let mut forbidden = Vec::new();
            for tt in start..t {
                forbidden.push(format!("(not {})", sigma_name(k, tt)));
            }
            for kk in ctx.overlapping(k) {
                for tt in start..=t {
                    forbidden.push(format!("(not {})", sigma_name(kk, tt)));
                }
            }
            let (pa, pb) = (ctx.qubit_lit(a), ctx.qubit_lit(b));
            for tt in (start..=t).filter(|&tt| tt < steps) {
                for (g, qs) in ctx.gate_qubits.iter().enumerate() {
                    let on_edge: Vec<String> = qs
                        .iter()
                        .flat_map(|&q| {
                            let p = pi_name(q, tt);
                            [format!("(= {p} {pa})"), format!("(= {p} {pb})")]
                        })
                        .collect();
                    forbidden.push(format!(
                        "(not (and (= {} {}) {}))",
                        time_name(g),
                        ctx.time_lit(tt),
                        or_all(on_edge)
                    ));
                }
            }
            if !forbidden.is_empty() {
                f.push(format!("(=> {} {})", sigma_name(k, t), and_all(forbidden)));
            }
        }
    }

    // mapping update
    for t in 0..ctx.d_ub.saturating_sub(1) {
        for p in 0..ctx.num_physical {
            let pl = ctx.qubit_lit(p);
            let incident: Vec<(usize, usize)> = ctx.incident(p).collect();
            let busy = or_all(incident.iter().map(|&(k, _)| sigma_name(k, t)).collect());
            for q in 0..ctx.num_logical {
                let here = format!("(= {} {pl})", pi_name(q, t));
                let stay = format!("(= {} {pl})", pi_name(q, t + 1));
                if incident.is_empty() {
                    f.push(format!("(=> {here} {stay})"));
                } else {
                    f.push(format!("(=> (and {here} (not {busy})) {stay})"));
                }
                for &(k, other) in &incident {
                    f.push(format!(
                        "(=> (and {} {here}) (= {} {}))",
                        sigma_name(k, t),
                        pi_name(q, t + 1),
                        ctx.qubit_lit(other)
                    ));
                }
            }
        }
    }
    f
}

/// Every gate before `bound` and no swap completing at or after it.
pub fn encode_depth_bound(ctx: &EncodingContext, bound: usize) -> Result<Fragment, EncodeError> {
    if bound > ctx.d_ub {
        return Err(EncodeError::BoundExceedsExtent {
            bound,
            d_ub: ctx.d_ub,
        });
    }
    if ctx.num_gates() > 0 && bit_length(bound as u64) > ctx.l_b {
        return Err(EncodeError::WidthTooSmall {
            l_b: ctx.l_b,
            bound,
        });
    }
    let mut f = Fragment::default();
    for g in 0..ctx.num_gates() {
        f.push(format!("(bvult {} {})", time_name(g), ctx.time_lit(bound)));
    }
    for k in 0..ctx.edges.len() {
        for t in bound..ctx.d_ub {
            f.push(format!("(not {})", sigma_name(k, t)));
        }
    }
    Ok(f)
}

/// Balanced `bvadd` tree over zero-extended swap indicators, `width` bits wide.
pub fn popcount_term(names: &[String], width: u32) -> String {
    let leaf = |n: &String| {
        let ite = format!("(ite {n} #b1 #b0)");
        if width > 1 {
            format!("((_ zero_extend {}) {ite})", width - 1)
        } else {
            ite
        }
    };
    let mut level: Vec<String> = names.iter().map(leaf).collect();
    if level.is_empty() {
        return bv_literal(0, width);
    }
    while level.len() > 1 {
        let mut next = Vec::with_capacity(level.len().div_ceil(2));
        let mut it = level.into_iter();
        while let Some(a) = it.next() {
            match it.next() {
                Some(b) => next.push(format!("(bvadd {a} {b})")),
                None => next.push(a),
            }
        }
        level = next;
    }
    level.pop().unwrap_or_default()
}

/// At most `bound` swap indicators are true.
pub fn encode_swap_bound(ctx: &EncodingContext, bound: usize) -> Fragment {
    let mut f = Fragment::default();
    let total = ctx.num_sigma();
    if total == 0 {
        return f;
    }
    let width = bit_length(total as u64);
    let names: Vec<String> = (0..ctx.edges.len())
        .flat_map(|k| (0..ctx.d_ub).map(move |t| sigma_name(k, t)))
        .collect();
    f.push(format!(
        "(bvule {} {})",
        popcount_term(&names, width),
        bv_literal(bound.min(total) as u64, width)
    ));
    f
}

/// Complete script: declarations, the given assertion groups, `check-sat`
/// and one `get-value` over every variable.
pub fn emit_script(ctx: &EncodingContext, fragments: &[&Fragment]) -> String {
    let mut out = String::from("(set-option :produce-models true)\n(set-logic QF_BV)\n");
    for q in 0..ctx.num_logical {
        for t in 0..ctx.d_ub {
            let _ = writeln!(
                out,
                "(declare-const {} (_ BitVec {}))",
                pi_name(q, t),
                ctx.qubit_bits
            );
        }
    }
    for k in 0..ctx.edges.len() {
        for t in 0..ctx.d_ub {
            let _ = writeln!(out, "(declare-const {} Bool)", sigma_name(k, t));
        }
    }
    for g in 0..ctx.num_gates() {
        let _ = writeln!(out, "(declare-const {} (_ BitVec {}))", time_name(g), ctx.l_b);
    }
    for frag in fragments {
        for a in &frag.assertions {
            let _ = writeln!(out, "(assert {a})");
        }
    }
    out.push_str("(check-sat)\n");
    let names = ctx.variable_names();
    if !names.is_empty() {
        let _ = writeln!(out, "(get-value ({}))", names.join(" "));
    }
    out.push_str("(exit)\n");
    out
}

/// Base constraints plus the given bounds, as one script.
pub fn encode_instance(ctx: &EncodingContext, bounds: BoundSet) -> Result<String, EncodeError> {
    let base = encode_base(ctx);
    let depth = encode_depth_bound(ctx, bounds.depth)?;
    let swaps = bounds.swaps.map(|s| encode_swap_bound(ctx, s));
    let mut frags = alloc::vec![&base, &depth];
    if let Some(s) = swaps.as_ref() {
        frags.push(s);
    }
    Ok(emit_script(ctx, &frags))
}
