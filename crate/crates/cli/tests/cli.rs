use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rmt-edge")).args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn edge_null_case() {
    let out = run(&["edge", "--pop", "null", "--M", "100", "--d", "1"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["lambda_r"].as_f64().unwrap(), 4.0);
    assert!((v["gamma0"].as_f64().unwrap() - 0.39685).abs() < 1e-5);
    assert_eq!(v["N"].as_u64().unwrap(), 100);
}

#[test]
fn edge_from_population_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("pop.json");
    std::fs::write(&path, r#"{"atoms": [{"sigma": 4, "weight": 0.5}, {"sigma": 1, "weight": 0.5}], "M": 100}"#)
        .unwrap();
    let out = run(&["edge", "--pop", path.to_str().unwrap(), "--d", "4", "--out", dir.path().to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("edge.json")).unwrap()).unwrap();
    assert_eq!(v["atlas"]["intervals"].as_array().unwrap().len(), 2);
}

#[test]
fn tw_right_tail() {
    let out = run(&["tw", "--order", "1", "--s", "8"]);
    assert!(out.status.success());
    let value: f64 = stdout(&out).trim().parse().unwrap();
    assert!((1.0 - 1e-8..=1.0).contains(&value));
    let left = run(&["tw", "--order", "2", "--s", "-3"]);
    let value: f64 = stdout(&left).trim().parse().unwrap();
    assert!((value - 0.080_319_552_939_334_55).abs() < 1e-8, "{value}");
}

#[test]
fn simulate_is_byte_identical() {
    let args = ["simulate", "--dist", "gaussian", "--M", "50", "--N", "50", "--trials", "2", "--seed", "7"];
    let a = run(&args);
    let b = run(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let text = stdout(&a);
    assert!(text.starts_with("trial,lambda1,rescaled,triggered\n"));
    assert_eq!(text.lines().count(), 3);
    let c = run(&[&args[..], &["--threads", "1"]].concat());
    assert_eq!(a.stdout, c.stdout);
}

#[test]
fn simulate_writes_report_and_matrix() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let out = run(&["simulate", "--dist", "pareto:3.5", "--M", "20", "--N", "30", "--trials", "3", "--seed", "1", "--k", "2",
        "--out", d, "--dump-matrix"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(report["trials_completed"].as_u64().unwrap(), 3);
    assert!(report.get("timing_seconds").is_none());
    let bytes = std::fs::read(dir.path().join("matrix.bin")).unwrap();
    assert_eq!(&bytes[..8], b"QMATF64\0");
    assert_eq!(bytes.len(), 16 + 8 * 20 * 30);
}

#[test]
fn exit_codes() {
    // usage errors
    assert_eq!(run(&["edge", "--pop", "null", "--M", "10", "--bogus"]).status.code(), Some(2));
    assert_eq!(run(&["simulate", "--M", "10"]).status.code(), Some(2));
    assert_eq!(run(&[]).status.code(), Some(2));
    // validation
    assert_eq!(run(&["edge", "--pop", "null"]).status.code(), Some(2));
    assert_eq!(run(&["tw", "--order", "3", "--s", "0"]).status.code(), Some(2));
    assert_eq!(run(&["simulate", "--dist", "pareto:2", "--M", "5", "--seed", "1"]).status.code(), Some(2));
    // numerical: 4 nodes cannot resolve F1 to 1e-6
    assert_eq!(run(&["tw", "--order", "1", "--s", "-2", "--nodes", "4"]).status.code(), Some(3));
}

#[test]
fn help_documents_flags() {
    let out = run(&["simulate", "--help"]);
    assert!(out.status.success());
    let text = stdout(&out);
    for flag in ["--dist", "--seed", "--threads", "--out", "--pop", "--M", "--N", "--config", "--dump-matrix", "QMATF64"] {
        assert!(text.contains(flag), "{flag} missing from help");
    }
}

#[test]
fn other_commands_run() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let ok = |args: &[&str]| {
        let out = run(args);
        assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    };
    ok(&["density", "--pop", "two:4,1,0.5", "--M", "50", "--d", "4", "--points", "20", "--out", d]);
    ok(&["tw-table", "--lo", "-4", "--hi", "2", "--step", "0.5", "--out", d]);
    ok(&["universality", "--M", "30", "--trials", "100", "--seed", "3", "--against", "rademacher", "--out", d]);
    ok(&["probe-tail", "--M", "20", "--trials", "20", "--seed", "3", "--ladder", "20,40", "--out", d]);
    ok(&["rigidity", "--M", "60", "--trials", "5", "--seed", "3", "--out", d]);
    ok(&["locallaw", "--M", "60", "--trials", "2", "--seed", "3", "--n-e", "2", "--n-eta", "2", "--out", d]);
    ok(&["cutoff", "--dist", "heavy", "--M", "40", "--trials", "4", "--seed", "3", "--out", d]);
    for f in ["density.csv", "tw_table.csv", "universality.json", "probe.json", "rigidity.json", "locallaw.json", "cutoff.json"] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
    let table = std::fs::read_to_string(dir.path().join("tw_table.csv")).unwrap();
    assert!(table.starts_with("s,F1,F2\n-4,"));
    // same flags, same bytes
    let again = tempfile::tempdir().unwrap();
    let a = again.path().to_str().unwrap();
    ok(&["cutoff", "--dist", "heavy", "--M", "40", "--trials", "4", "--seed", "3", "--out", a]);
    assert_eq!(
        std::fs::read(dir.path().join("cutoff.json")).unwrap(),
        std::fs::read(again.path().join("cutoff.json")).unwrap()
    );
}
