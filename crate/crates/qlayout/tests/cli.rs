//! End-to-end runs of the `qlayout` binary.

mod common;

use std::path::Path;
use std::process::{Command, Output};

use common::{data_dir, solver};

fn qlayout(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qlayout"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn circuit(name: &str) -> String {
    data_dir()
        .join("circuits")
        .join(format!("{name}.qasm"))
        .display()
        .to_string()
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!(
            "{e}: {}{}",
            String::from_utf8_lossy(&out.stdout),
            String::from_utf8_lossy(&out.stderr)
        )
    })
}

fn write(path: &Path, text: &str) {
    std::fs::write(path, text).unwrap();
}

#[test]
fn features_in_fixed_order() {
    let out = qlayout(&["features", &circuit("cat_n4")]);
    assert!(out.status.success());
    let v = json(&out);
    let keys: Vec<&str> = v.as_object().unwrap().keys().map(String::as_str).collect();
    assert_eq!(
        keys,
        [
            "circuit_depth",
            "circuit_width",
            "max_qubit_depth",
            "operation_density",
            "two_qubit_gate_count",
            "entanglement_variance"
        ]
    );
    assert_eq!(v["circuit_depth"], 4);
    assert_eq!(v["operation_density"], 0.4375);
}

#[test]
fn exit_codes() {
    assert_eq!(qlayout(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(qlayout(&["map", "--circuit", "x.qasm"]).status.code(), Some(1));
    assert_eq!(qlayout(&["--help"]).status.code(), Some(0));
    assert_eq!(
        qlayout(&["features", "/nonexistent/c.qasm"]).status.code(),
        Some(2)
    );
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.qasm");
    write(&bad, "OPENQASM 2.0;\nqreg q[2];\nfoo q[0];\n");
    let out = qlayout(&["features", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains(":3:"));

    let out = qlayout(&[
        "map",
        "--circuit",
        &circuit("cat_n4"),
        "--arch",
        "qx2",
        "--solver",
        "/nonexistent/solver",
        "--out",
        dir.path().join("m.qasm").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(3));
    // six logical qubits do not fit five physical ones
    let out = qlayout(&["map", "--circuit", &circuit("qaoa_n6"), "--arch", "line5"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn map_then_validate() {
    let Some(_) = solver() else { return };
    let dir = tempfile::tempdir().unwrap();
    let mapped = dir.path().join("mapped.qasm");
    let sol = dir.path().join("solution.json");
    let tel = dir.path().join("telemetry.json");
    let out = qlayout(&[
        "map",
        "--circuit",
        &circuit("star_n4"),
        "--arch",
        "line5",
        "--out",
        mapped.to_str().unwrap(),
        "--solution",
        sol.to_str().unwrap(),
        "--telemetry",
        tel.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let t: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&tel).unwrap()).unwrap();
    for key in [
        "optimal_depth",
        "optimal_swaps",
        "depth_checks",
        "swap_checks",
        "resize_events",
        "wall_time_per_check",
    ] {
        assert!(t.get(key).is_some(), "{key}");
    }
    let checks = t["depth_checks"].as_u64().unwrap() + t["swap_checks"].as_u64().unwrap();
    assert_eq!(t["wall_time_per_check"].as_array().unwrap().len() as u64, checks);
    let text = std::fs::read_to_string(&mapped).unwrap();
    assert!(text.contains("qreg q[5];"));

    let args = |s: &str| {
        vec![
            "validate".to_string(),
            "--circuit".into(),
            circuit("star_n4"),
            "--arch".into(),
            "line5".into(),
            "--solution".into(),
            s.to_string(),
        ]
    };
    let run = |a: Vec<String>| qlayout(&a.iter().map(String::as_str).collect::<Vec<_>>());
    let out = run(args(sol.to_str().unwrap()));
    assert!(out.status.success());
    assert_eq!(json(&out)["valid"], true);

    let mut record: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&sol).unwrap()).unwrap();
    record["gate_times"][1] = record["gate_times"][0].clone();
    let broken = dir.path().join("broken.json");
    write(&broken, &record.to_string());
    let out = run(args(broken.to_str().unwrap()));
    assert_eq!(out.status.code(), Some(4));
    assert_eq!(json(&out)["first"]["kind"], "order");
}

#[test]
fn map_without_two_qubit_gates() {
    let Some(_) = solver() else { return };
    let dir = tempfile::tempdir().unwrap();
    let c = dir.path().join("local.qasm");
    write(&c, "OPENQASM 2.0;\ninclude \"qelib1.inc\";\nqreg q[3];\nh q[0];\nt q[0];\nx q[2];\n");
    let out = qlayout(&[
        "map",
        "--circuit",
        c.to_str().unwrap(),
        "--arch",
        "qx2",
        "--out",
        dir.path().join("m.qasm").to_str().unwrap(),
        "--keep-swap-opcode",
    ]);
    assert!(out.status.success());
    let t = json(&out);
    assert_eq!(t["optimal_depth"], 2);
    assert_eq!(t["optimal_swaps"], 0);
    assert!(t["depth_checks"].as_u64().unwrap() <= 2);
}

#[test]
fn augment_train_predict_bench() {
    let Some(_) = solver() else { return };
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("corpus");
    let out = qlayout(&[
        "augment",
        &circuit("toffoli_n3"),
        &circuit("cat_n4"),
        "--arch",
        "line5",
        "--out",
        corpus.to_str().unwrap(),
        "--b-list",
        "5,7",
        "--two-qubit-pass",
        "3",
        "--kmax",
        "1",
        "--jobs",
        "2",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let summary = json(&out);
    let n = summary["samples"].as_u64().unwrap();
    assert!(n >= 4);
    let samples: Vec<_> = std::fs::read_dir(corpus.join("samples")).unwrap().collect();
    assert_eq!(samples.len() as u64, n);
    let first = samples[0].as_ref().unwrap().path();
    assert!(first.join("original.qasm").exists());
    assert!(first.join("result").join("mapped.qasm").exists());
    let info: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(first.join("info.json")).unwrap()).unwrap();
    assert_eq!(info["graph"], "line5");
    assert!(info["search_counts"]["depth_checks"].as_u64().unwrap() >= 1);

    let mut models = Vec::new();
    for target in ["depth", "swaps"] {
        let model = dir.path().join(format!("{target}.json"));
        let out = qlayout(&[
            "train",
            "--data",
            corpus.join(format!("{target}_all.csv")).to_str().unwrap(),
            "--target",
            target,
            "--max-depth",
            "5",
            "--out",
            model.to_str().unwrap(),
        ]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        let m: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(&model).unwrap()).unwrap();
        assert_eq!(m["max_depth"], 5);
        assert_eq!(m["target"], target);
        models.push(model);
    }
    let out = qlayout(&[
        "predict",
        &circuit("cat_n4"),
        "--depth-model",
        models[0].to_str().unwrap(),
        "--swap-model",
        models[1].to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let p = json(&out);
    assert!(p["depth"].is_u64() && p["swaps"].is_u64());

    let table = dir.path().join("bench.csv");
    let out = qlayout(&[
        "bench",
        &circuit("wstate_n3"),
        &circuit("star_n4"),
        "--arch",
        "line5",
        "--depth-model",
        models[0].to_str().unwrap(),
        "--swap-model",
        models[1].to_str().unwrap(),
        "--out",
        table.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(json(&out)["optima_agree"], true);
    let mut rdr = csv::Reader::from_path(&table).unwrap();
    let rows: Vec<csv::StringRecord> = rdr.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 2);
}
