use std::fs;
use std::process::{Command, Output};

use serde_json::Value;

fn kgt(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kgt")).args(args).output().unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).trim().to_string()
}

#[test]
fn count_prints_orbit_numbers() {
    for (args, expected) in [
        (vec!["count", "--n", "2", "--m", "3"], "84"),
        (vec!["count", "--n", "2", "--m", "2"], "12"),
        (vec!["count", "--n", "2", "--m", "2", "--semigroup-classes"], "9"),
        (vec!["count", "--n", "1", "--m", "1"], "1"),
    ] {
        let out = kgt(&args);
        assert!(out.status.success());
        assert_eq!(stdout(&out), expected, "{args:?}");
    }
}

#[test]
fn bad_input_exits_with_2() {
    let out = kgt(&["count", "--n", "0", "--m", "3"]);
    assert_eq!(out.status.code(), Some(2));
    let out = kgt(&["fock", "--n", "2", "--m", "2", "--perm", "(1 5)", "--degree", "3"]);
    assert_eq!(out.status.code(), Some(2));
    let out = kgt(&["fock", "--n", "2", "--m", "2", "--perm", "()", "--degree", "30"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("cap"));
}

#[test]
fn classify_writes_catalog_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let cyc = dir.path().join("cyc.json");
    let all = dir.path().join("all.json");
    let run = |path: &std::path::Path, cyclic: bool| {
        let mut args = vec!["classify", "--n", "2", "--m", "3", "--out", path.to_str().unwrap()];
        if cyclic {
            args.push("--cyclic-only");
        }
        let out = kgt(&args);
        assert!(out.status.success());
        stdout(&out)
    };
    let table = run(&cyc, true);
    assert!(table.contains("self_paired = 10, swapped_pairs = 2"));
    let first = fs::read_to_string(&cyc).unwrap();
    run(&cyc, true);
    assert_eq!(fs::read_to_string(&cyc).unwrap(), first);
    let doc: Value = serde_json::from_str(&first).unwrap();
    assert_eq!(doc["entries"].as_array().unwrap().len(), 14);

    run(&all, false);
    let doc: Value = serde_json::from_str(&fs::read_to_string(&all).unwrap()).unwrap();
    assert_eq!(doc["entries"].as_array().unwrap().len(), 84);

    let manifest: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("cyc.json.manifest.json")).unwrap()).unwrap();
    let digest = manifest["outputs"][cyc.to_str().unwrap()].as_str().unwrap();
    assert_eq!(digest.len(), 64);
}

#[test]
fn equiv_verdicts_and_exit_codes() {
    let out = kgt(&["equiv", "--n", "2", "--m", "2", "--theta", "(1 2 4 3)", "--tau", "(1 2 3 4)", "--replay"]);
    assert!(out.status.success());
    let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["status"], "not_equivalent");
    assert_eq!(v["replay"]["outcome"], "confirmed");

    let out = kgt(&["equiv", "--n", "2", "--m", "3", "--theta", "(1 2 4 6 5 3)", "--tau", "(1 2 4 6 5 3)"]);
    let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["status"], "equivalent");

    let out = kgt(&["equiv", "--n", "2", "--m", "3", "--theta", "(1 2 4 6 5 3)", "--tau", "(1 3 5 6 4 2)", "--mode", "conjugacy"]);
    let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["status"], "not_equivalent");

    let out = kgt(&["equiv", "--n", "2", "--m", "3", "--theta", "(5 6)", "--tau", "(3 6)"]);
    assert_eq!(out.status.code(), Some(3));
    let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["status"], "unknown");
}

#[test]
fn fock_verify_and_export() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("mats");
    let out = kgt(&[
        "fock", "--n", "2", "--m", "3", "--perm", "(1 2 3 6 5 4)", "--degree", "4", "--verify", "--out-dir",
        target.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("all checks passed"));
    let basis: Vec<String> = serde_json::from_str(&fs::read_to_string(target.join("basis.json")).unwrap()).unwrap();
    assert_eq!(basis[0], "1");
    let mtx = fs::read_to_string(target.join("L_e1.mtx")).unwrap();
    assert!(mtx.starts_with("%%MatrixMarket"));
    assert!(dir.path().join("mats.manifest.json").exists());
}

#[test]
fn omega_partial_norm_matches_product() {
    let out = kgt(&["omega", "--n", "2", "--m", "2", "--perm", "(1 2 3 4)", "--alpha", "0.5,0;0,0", "--degree", "30", "--eigen"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("partial_norm_sq 1.333333333333"), "{text}");
    assert!(text.contains("eigen-relation holds"));
    let out = kgt(&["omega", "--n", "2", "--m", "2", "--perm", "()", "--alpha", "1,0;0,0", "--degree", "5"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn mobius_check_passes() {
    let out = kgt(&["mobius", "--n", "3", "--alpha", "0.2,0.2,-0.3", "--tau", "(1 2)", "--check"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(report["passed"], true);
    let out = kgt(&["mobius", "--n", "2", "--alpha", "0.3,-0.2", "--tau", "(1 2)", "--check"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn kgraph_check_reports_witness() {
    let dir = tempfile::tempdir().unwrap();
    let good = dir.path().join("good.json");
    let bad = dir.path().join("bad.json");
    fs::write(&good, r#"{"rank": 3, "multiplicities": [2,2,2], "relations": {"1,2": "(1 2)", "1,3": "()", "2,3": "()"}}"#).unwrap();
    fs::write(&bad, r#"{"rank": 3, "multiplicities": [2,2,2], "relations": {"1,2": "(1 2)", "1,3": "(1 3)", "2,3": "(2 4)"}}"#).unwrap();
    assert!(kgt(&["kgraph", "check", "--spec", good.to_str().unwrap()]).status.success());
    let out = kgt(&["kgraph", "check", "--spec", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("(replayed)"));
}

#[test]
fn diagram_stats_and_dot() {
    let dir = tempfile::tempdir().unwrap();
    let dot = dir.path().join("d.dot");
    let out = kgt(&["diagram", "--n", "2", "--m", "2", "--perm", "(1 2 4 3)", "--dot", dot.to_str().unwrap()]);
    assert!(out.status.success());
    let doc: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(doc["stats"]["h"], 2);
    assert_eq!(doc["stats"]["v"], 2);
    assert!(fs::read_to_string(&dot).unwrap().starts_with("digraph"));
}

#[test]
fn thread_override_is_validated() {
    let out = Command::new(env!("CARGO_BIN_EXE_kgt"))
        .args(["count", "--n", "2", "--m", "2"])
        .env("KGT_THREADS", "many")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}
