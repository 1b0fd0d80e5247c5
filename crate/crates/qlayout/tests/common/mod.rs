//! Shared helpers for solver-backed tests: solver discovery, a caching
//! checker, an exhaustive small-instance scheduler and random circuits.
#![allow(dead_code)]

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};

use qlayout::io::read_circuit;
use qlayout::solver::{ProcessChecker, SolverConfig, SolverError};
use qlayout_core::arch::CouplingGraph;
use qlayout_core::circuit::{build_dag, Circuit};
use qlayout_core::model::Response;
use qlayout_core::search::Checker;
use rand::Rng;

pub fn solver() -> Option<SolverConfig> {
    let cfg = SolverConfig::default();
    if cfg.available() {
        Some(cfg)
    } else {
        eprintln!("no SMT solver found (set QLAYOUT_SOLVER); skipping");
        None
    }
}

pub fn data_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data")
}

pub fn bundled(name: &str) -> Circuit {
    read_circuit(&data_dir().join("circuits").join(format!("{name}.qasm"))).unwrap()
}

/// Remembers answers per script; a fresh solver process is still started
/// for every script it has not seen.
#[derive(Clone)]
pub struct CachingChecker {
    inner: ProcessChecker,
    cache: Arc<Mutex<HashMap<String, Response>>>,
    pub scripts: Vec<String>,
}

impl CachingChecker {
    pub fn new(cfg: SolverConfig, cache: Arc<Mutex<HashMap<String, Response>>>) -> Self {
        CachingChecker {
            inner: ProcessChecker::new(cfg),
            cache,
            scripts: Vec::new(),
        }
    }
}

impl Checker for CachingChecker {
    type Error = SolverError;

    fn check(&mut self, script: &str) -> Result<Response, SolverError> {
        self.scripts.push(script.to_owned());
        if let Some(r) = self.cache.lock().unwrap().get(script) {
            return Ok(r.clone());
        }
        let r = self.inner.check(script)?;
        self.cache.lock().unwrap().insert(script.to_owned(), r.clone());
        Ok(r)
    }
}

/// Exhaustive search over initial placements and step-by-step schedules:
/// gates on adjacent qubits once their predecessors are done, swaps of
/// `dur` steps with no other activity on their endpoints, layout exchange
/// after the last step of a swap. Returns the least depth up to
/// `max_depth` and the least swap count at that depth.
pub fn brute_force_optimum(
    c: &Circuit,
    g: &CouplingGraph,
    dur: usize,
    max_depth: usize,
) -> Option<(usize, usize)> {
    let n = c.len();
    if n == 0 {
        return Some((0, 0));
    }
    let mut preds = vec![0u64; n];
    for &(a, b) in build_dag(c).edges() {
        preds[b] |= 1 << a;
    }
    let placements = injections(c.num_qubits(), g.num_qubits());
    for depth in 1..=max_depth {
        let mut s = Scheduler {
            c,
            g,
            dur,
            depth,
            preds: &preds,
            memo: HashMap::new(),
        };
        let best = placements
            .iter()
            .filter_map(|p| s.solve(0, p.clone(), 0, Vec::new()))
            .min();
        if let Some(swaps) = best {
            return Some((depth, swaps));
        }
    }
    None
}

fn injections(k: usize, n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::new();
    fn rec(k: usize, n: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for p in 0..n {
            if !cur.contains(&p) {
                cur.push(p);
                rec(k, n, cur, out);
                cur.pop();
            }
        }
    }
    rec(k, n, &mut cur, &mut out);
    out
}

type Key = (usize, Vec<usize>, u64, Vec<(usize, usize, usize)>);

struct Scheduler<'a> {
    c: &'a Circuit,
    g: &'a CouplingGraph,
    dur: usize,
    depth: usize,
    preds: &'a [u64],
    memo: HashMap<Key, Option<usize>>,
}

impl Scheduler<'_> {
    /// Least swaps to finish from step `t` with layout `pos`, gates `done`
    /// and running swaps `(a, b, last_step)`.
    fn solve(
        &mut self,
        t: usize,
        pos: Vec<usize>,
        done: u64,
        active: Vec<(usize, usize, usize)>,
    ) -> Option<usize> {
        let n = self.c.len();
        let all = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
        if done == all && active.is_empty() {
            return Some(0);
        }
        if t >= self.depth || self.remaining_chain(done) > self.depth - t {
            return None;
        }
        let key = (t, pos.clone(), done, active.clone());
        if let Some(r) = self.memo.get(&key) {
            return *r;
        }
        let mut busy = vec![false; self.g.num_qubits()];
        for &(a, b, _) in &active {
            busy[a] = true;
            busy[b] = true;
        }
        let ready: Vec<usize> = (0..n)
            .filter(|&i| done & (1 << i) == 0 && self.preds[i] & !done == 0)
            .filter(|&i| {
                let phys: Vec<usize> = self.c.gates()[i].qubits.iter().map(|&q| pos[q]).collect();
                phys.iter().all(|&p| !busy[p])
                    && (phys.len() < 2 || self.g.has_edge(phys[0], phys[1]))
            })
            .collect();
        let occupied: Vec<bool> = {
            let mut o = vec![false; self.g.num_qubits()];
            for &p in &pos {
                o[p] = true;
            }
            o
        };
        let mut best: Option<usize> = None;
        for gmask in 0..(1u32 << ready.len()) {
            let mut used = busy.clone();
            let mut new_done = done;
            for (k, &i) in ready.iter().enumerate() {
                if gmask & (1 << k) != 0 {
                    new_done |= 1 << i;
                    for &q in &self.c.gates()[i].qubits {
                        used[pos[q]] = true;
                    }
                }
            }
            let last = t + self.dur - 1;
            let candidates: Vec<(usize, usize)> = if last < self.depth {
                self.g
                    .edges()
                    .iter()
                    .copied()
                    .filter(|&(a, b)| !used[a] && !used[b] && (occupied[a] || occupied[b]))
                    .collect()
            } else {
                Vec::new()
            };
            for smask in 0..(1u32 << candidates.len()) {
                let chosen: Vec<(usize, usize)> = (0..candidates.len())
                    .filter(|k| smask & (1 << k) != 0)
                    .map(|k| candidates[k])
                    .collect();
                let mut touched = vec![false; self.g.num_qubits()];
                let disjoint = chosen.iter().all(|&(a, b)| {
                    let ok = !touched[a] && !touched[b];
                    touched[a] = true;
                    touched[b] = true;
                    ok
                });
                if !disjoint {
                    continue;
                }
                let mut running = active.clone();
                running.extend(chosen.iter().map(|&(a, b)| (a, b, last)));
                let mut next_pos = pos.clone();
                running.retain(|&(a, b, end)| {
                    if end == t {
                        for p in next_pos.iter_mut() {
                            if *p == a {
                                *p = b;
                            } else if *p == b {
                                *p = a;
                            }
                        }
                        false
                    } else {
                        true
                    }
                });
                running.sort();
                if let Some(rest) = self.solve(t + 1, next_pos, new_done, running) {
                    let total = rest + chosen.len();
                    best = Some(best.map_or(total, |b| b.min(total)));
                }
            }
        }
        self.memo.insert(key, best);
        best
    }

    fn remaining_chain(&self, done: u64) -> usize {
        let n = self.c.len();
        let mut level = vec![0usize; n];
        let mut longest = 0;
        for i in 0..n {
            if done & (1 << i) != 0 {
                continue;
            }
            let mut l = 1;
            for j in 0..i {
                if self.preds[i] & (1 << j) != 0 && done & (1 << j) == 0 {
                    l = l.max(level[j] + 1);
                }
            }
            level[i] = l;
            longest = longest.max(l);
        }
        longest
    }
}

/// Random circuit with a two-qubit fraction of roughly one half.
pub fn random_circuit<R: Rng>(rng: &mut R, width: usize, gates: usize) -> Circuit {
    let mut c = Circuit::new(width);
    for _ in 0..gates {
        if width >= 2 && rng.gen_bool(0.5) {
            let a = rng.gen_range(0..width);
            let mut b = rng.gen_range(0..width - 1);
            if b >= a {
                b += 1;
            }
            c.push("cx", &[a, b], Vec::new()).unwrap();
        } else {
            let name = ["h", "t", "x", "s"][rng.gen_range(0..4)];
            c.push(name, &[rng.gen_range(0..width)], Vec::new()).unwrap();
        }
    }
    c
}
