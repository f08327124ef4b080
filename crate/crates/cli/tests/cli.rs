//! End-to-end runs of the `qctl-qbf` binary.

use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

const FIG1: &str = "states: x1 x2 x3 x4 x5\ninit: x1\nlabels:\n\
                    edges: x1->x2 x2->x3 x3->x1 x5->x4 x3->x4 x4->x3\n";

const TWO_CYCLE: &str = "states: a b\ninit: a\nlabels: a: y\nedges: a->b b->a\n";

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qctl-qbf"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn check_exit_codes_follow_the_verdict() {
    let dir = tempfile::tempdir().unwrap();
    let k = write(dir.path(), "cyc.kri", TWO_CYCLE);
    let holds = run(&["check", "-k", &k, "-f", "A G A F y"]);
    assert_eq!(
        holds.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&holds.stderr)
    );
    let fails = run(&["check", "-k", &k, "-f", "A G y", "--strategy", "fp"]);
    assert_eq!(fails.status.code(), Some(1));
    let at_b = run(&["check", "-k", &k, "-f", "y", "--state", "b"]);
    assert_eq!(at_b.status.code(), Some(1));
    let bad_state = run(&["check", "-k", &k, "-f", "y", "--state", "zz"]);
    assert_eq!(bad_state.status.code(), Some(2));
    let bad_formula = run(&["check", "-k", &k, "-f", "A G ("]);
    assert_eq!(bad_formula.status.code(), Some(2));
    let bad_strategy = run(&["check", "-k", &k, "-f", "y", "--strategy", "magic"]);
    assert_eq!(bad_strategy.status.code(), Some(2));
}

#[test]
fn check_json_has_the_record_fields() {
    let dir = tempfile::tempdir().unwrap();
    let k = write(dir.path(), "cyc.kri", TWO_CYCLE);
    let f = write(dir.path(), "f.qctl", "exists p. (p & A X ~p)\n");
    let o = run(&["check", "-k", &k, "-f", &f, "--json", "--instance", "demo"]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_str(stdout(&o).trim()).unwrap();
    for key in [
        "instance",
        "strategy",
        "verdict",
        "translate_s",
        "solve_s",
        "qbf_vars",
        "qbf_gates",
    ] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    assert_eq!(v["instance"], "demo");
    assert_eq!(v["strategy"], "pnf");
    assert_eq!(v["verdict"], "valid");

    let all = run(&["check", "-k", &k, "-f", &f, "--json", "--strategy", "all"]);
    let arr: Value = serde_json::from_str(stdout(&all).trim()).unwrap();
    let strategies: Vec<&str> = arr
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["strategy"].as_str().unwrap())
        .collect();
    assert_eq!(strategies, ["uu", "fp", "fpf", "pnf", "fbv"]);
    assert!(arr
        .as_array()
        .unwrap()
        .iter()
        .all(|r| r["verdict"] == "valid"));
}

#[test]
fn translate_writes_named_files() {
    let dir = tempfile::tempdir().unwrap();
    let k = write(dir.path(), "cyc.kri", TWO_CYCLE);
    let out = dir.path().join("out");
    let o = run(&[
        "translate",
        "-k",
        &k,
        "-f",
        "exists p. E X p",
        "--strategy",
        "all",
        "--format",
        "both",
        "-o",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    for s in ["uu", "fp", "fpf", "pnf", "fbv"] {
        let qcir = std::fs::read_to_string(out.join(format!("cyc__{s}.qcir"))).unwrap();
        assert!(qcir.starts_with("#QCIR-G14"), "{s}");
        assert!(out.join(format!("cyc__{s}.smt2")).is_file(), "{s}");
    }
}

#[test]
fn oracle_lists_satisfying_states() {
    let dir = tempfile::tempdir().unwrap();
    let k = write(dir.path(), "cyc.kri", TWO_CYCLE);
    let o = run(&["oracle", "-k", &k, "-f", "E X y", "--json"]);
    assert_eq!(o.status.code(), Some(1));
    let v: Value = serde_json::from_str(stdout(&o).trim()).unwrap();
    assert_eq!(v["satisfying"], serde_json::json!(["b"]));
    assert_eq!(v["verdict"], "invalid");
}

#[test]
fn gen_then_bench_agrees_with_expectations() {
    let dir = tempfile::tempdir().unwrap();
    let g = dir.path().join("g");
    let gs = g.to_str().unwrap();
    for args in [
        vec!["gen", "-o", gs, "reset", "--n", "2", "--k", "2", "--m", "2"],
        vec!["gen", "-o", gs, "nim", "--heaps", "1,1"],
        vec!["gen", "-o", gs, "kconn", "--n", "2", "--m", "1", "--k", "1"],
        vec![
            "gen",
            "-o",
            gs,
            "resources",
            "--n",
            "2",
            "--m",
            "2",
            "--k",
            "1",
            "--d",
            "1",
        ],
        vec!["gen", "-o", gs, "corpus", "--seed", "3", "--count", "4"],
    ] {
        let o = run(&args);
        assert_eq!(
            o.status.code(),
            Some(0),
            "{args:?}: {}",
            String::from_utf8_lossy(&o.stderr)
        );
    }
    let nim: Value =
        serde_json::from_str(&std::fs::read_to_string(g.join("nim_1_1_j1.expected.json")).unwrap())
            .unwrap();
    assert_eq!(nim["expected"], false);
    let csv = dir.path().join("r.csv");
    let o = run(&[
        "bench",
        "--suite",
        "none",
        "--dir",
        gs,
        "--strategy",
        "uu,pnf",
        "--csv",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let table = stdout(&o);
    assert!(table.lines().next().unwrap().contains("uu/naive"));
    assert_eq!(table.lines().count(), 1 + 8);
    let rows = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(rows.lines().count(), 1 + 8 * 2);
}

#[test]
fn bench_reports_a_wrong_expectation() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "c.kri", TWO_CYCLE);
    write(dir.path(), "c.qctl", "y\n");
    write(dir.path(), "c.expected.json", "{\"expected\": false}\n");
    let o = run(&[
        "bench",
        "--suite",
        "none",
        "--dir",
        dir.path().to_str().unwrap(),
        "--strategy",
        "pnf",
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("mismatch"));
}

#[test]
fn sml_check_decides_the_sabotage_example() {
    let dir = tempfile::tempdir().unwrap();
    let k = write(dir.path(), "fig.kri", FIG1);
    let o = run(&["sml-check", "-k", &k, "-f", "<><>[~]<>true"]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let uu = run(&[
        "sml-check",
        "-k",
        &k,
        "-f",
        "<><>[~]<>true",
        "--strategy",
        "uu",
        "--json",
    ]);
    let v: Value = serde_json::from_str(stdout(&uu).trim()).unwrap();
    assert_eq!(v["verdict"], "valid");
    let pnf = run(&[
        "sml-check",
        "-k",
        &k,
        "-f",
        "<><>[~]<>true",
        "--strategy",
        "pnf",
    ]);
    assert_eq!(pnf.status.code(), Some(2));
    let reserved = run(&["sml-check", "-k", &k, "-f", "<>inter"]);
    assert_eq!(reserved.status.code(), Some(2));
}
