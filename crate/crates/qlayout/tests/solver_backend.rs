//! Solver process handling and the encoding checked by a real solver.

mod common;

use std::io::Write;
use std::os::unix::fs::PermissionsExt;
use std::time::Duration;

use common::{brute_force_optimum, solver};
use qlayout::solver::{SolverConfig, SolverError};
use qlayout_core::arch::{line_graph, qx2};
use qlayout_core::circuit::Circuit;
use qlayout_core::encode::{build_context, encode_instance, BoundSet};
use qlayout_core::model::{Response, Value};
use qlayout_core::solution::{decode_solution, validate_solution, SwapEmission};

fn fake_solver(dir: &tempfile::TempDir, body: &str) -> SolverConfig {
    let path = dir.path().join("fake-solver");
    let mut f = std::fs::File::create(&path).unwrap();
    writeln!(f, "#!/bin/sh\n{body}").unwrap();
    drop(f);
    std::fs::set_permissions(&path, std::fs::Permissions::from_mode(0o755)).unwrap();
    SolverConfig::with_path(path)
}

#[test]
fn trivial_scripts() {
    let Some(cfg) = solver() else { return };
    let r = cfg
        .run("(set-logic QF_BV)\n(assert false)\n(check-sat)\n(exit)\n")
        .unwrap();
    assert_eq!(r, Response::Unsat);
    let r = cfg
        .run(
            "(set-option :produce-models true)\n(set-logic QF_BV)\n\
             (declare-const a (_ BitVec 4))\n(assert (= a #b0101))\n\
             (check-sat)\n(get-value (a))\n(exit)\n",
        )
        .unwrap();
    let Response::Sat(values) = r else { panic!("expected sat") };
    assert_eq!(values["a"], Value::Bits { value: 5, width: 4 });
}

#[test]
fn unsat_followed_by_get_value_is_still_unsat() {
    let Some(cfg) = solver() else { return };
    let r = cfg
        .run(
            "(set-option :produce-models true)\n(set-logic QF_BV)\n\
             (declare-const b Bool)\n(assert (and b (not b)))\n\
             (check-sat)\n(get-value (b))\n(exit)\n",
        )
        .unwrap();
    assert_eq!(r, Response::Unsat);
}

#[test]
fn process_failures_are_distinct() {
    let dir = tempfile::tempdir().unwrap();
    let missing = SolverConfig::with_path(dir.path().join("no-such-solver"));
    assert!(matches!(missing.run("(check-sat)"), Err(SolverError::Spawn { .. })));

    let crash = fake_solver(&dir, "cat > /dev/null; echo boom >&2; exit 3");
    assert!(matches!(crash.run("(check-sat)"), Err(SolverError::Exit { .. })));

    let garbage = fake_solver(&dir, "cat > /dev/null; echo 'maybe'");
    assert!(matches!(garbage.run("(check-sat)"), Err(SolverError::Parse(_))));

    let slow = fake_solver(&dir, "sleep 5; echo sat")
        .with_timeout(Some(Duration::from_millis(200)));
    let start = std::time::Instant::now();
    assert!(matches!(slow.run("(check-sat)"), Err(SolverError::Timeout(_))));
    assert!(start.elapsed() < Duration::from_secs(4));

    let canned = fake_solver(&dir, "cat > /dev/null; printf 'sat\\n((x #x0a) (y true))\\n'");
    let Response::Sat(v) = canned.run("(check-sat)").unwrap() else { panic!() };
    assert_eq!(v["x"], Value::Bits { value: 10, width: 8 });
    assert_eq!(v["y"], Value::Bool(true));
}

fn cx_chain() -> Circuit {
    // cx(q0,q1) then cx(q0,q2): the second needs routing on line(3) when
    // q0 starts at an end
    Circuit::new(3)
        .with("cx", &[0, 1])
        .unwrap()
        .with("cx", &[1, 2])
        .unwrap()
        .with("cx", &[0, 2])
        .unwrap()
}

#[test]
fn full_instance_reports_every_variable() {
    let Some(cfg) = solver() else { return };
    let c = cx_chain();
    let g = qx2();
    let ctx = build_context(&c, &g, 8, 4, 3).unwrap();
    let script = encode_instance(&ctx, BoundSet { depth: 8, swaps: None }).unwrap();
    let Response::Sat(values) = cfg.run(&script).unwrap() else { panic!("expected sat") };
    assert_eq!(values.len(), ctx.num_declarations());
    for name in ctx.variable_names() {
        assert!(values.contains_key(&name), "{name}");
    }
    let sol = decode_solution(&values, &ctx, &c, &g, SwapEmission::ThreeCnots).unwrap();
    assert!(validate_solution(&c, &g, &sol).is_valid());
}

#[test]
fn forced_verdicts() {
    let Some(cfg) = solver() else { return };
    let g = line_graph(3).unwrap();
    let verdict = |c: &Circuit, d_ub: usize, bounds: BoundSet| {
        let ctx = build_context(c, &g, d_ub, 4, 3).unwrap();
        matches!(cfg.run(&encode_instance(&ctx, bounds).unwrap()).unwrap(), Response::Sat(_))
    };
    let c = cx_chain();
    // the triangle needs a swap, which does not fit in three steps
    assert!(!verdict(&c, 3, BoundSet { depth: 3, swaps: None }));
    // two dependent gates cannot share a step
    let two = Circuit::new(2).with("h", &[0]).unwrap().with("x", &[0]).unwrap();
    assert!(!verdict(&two, 2, BoundSet { depth: 1, swaps: None }));
    assert!(verdict(&two, 2, BoundSet { depth: 2, swaps: None }));

    let (depth, swaps) = brute_force_optimum(&c, &g, 3, 12).unwrap();
    assert!(verdict(&c, depth + 2, BoundSet { depth, swaps: None }));
    assert!(!verdict(&c, depth + 2, BoundSet { depth: depth - 1, swaps: None }));
    assert!(verdict(&c, depth + 2, BoundSet { depth, swaps: Some(swaps) }));
    if swaps > 0 {
        assert!(!verdict(&c, depth + 2, BoundSet { depth, swaps: Some(swaps - 1) }));
    }
    // satisfiable bounds stay satisfiable when loosened
    for extra in 0..3 {
        assert!(verdict(&c, depth + 4, BoundSet { depth: depth + extra, swaps: Some(swaps + extra) }));
    }
}

#[test]
fn swap_bound_counts_exactly() {
    // the solver may use at most k swaps; force k swaps by pinning indicators
    let Some(cfg) = solver() else { return };
    let c = Circuit::new(2).with("h", &[0]).unwrap();
    let g = line_graph(4).unwrap();
    let ctx = build_context(&c, &g, 12, 4, 1).unwrap();
    for forced in 0..4usize {
        for bound in 0..5usize {
            let mut script = encode_instance(&ctx, BoundSet { depth: 12, swaps: Some(bound) }).unwrap();
            let pins: String = (0..forced)
                .map(|t| format!("(assert sg_0_{})\n", 2 * t))
                .collect();
            script = script.replacen("(check-sat)", &format!("{pins}(check-sat)"), 1);
            let sat = matches!(cfg.run(&script).unwrap(), Response::Sat(_));
            assert_eq!(sat, forced <= bound, "forced {forced} bound {bound}");
        }
    }
}
