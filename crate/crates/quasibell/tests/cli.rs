use std::path::Path;
use std::process::{Command, Output};

use quasibell::input::InstanceFile;
use quasibell_core::QuasiBellInstance;
use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_quasibell"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(args: &[&str]) -> Value {
    let out = run(args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("json output")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn write_instance(dir: &Path, inst: &QuasiBellInstance) -> String {
    let p = dir.join("vectors.json");
    std::fs::write(
        &p,
        serde_json::to_string(&InstanceFile::from_instance(inst)).unwrap(),
    )
    .unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn joint_symmetrized_has_negative_entry() {
    let v = json(&[
        "joint",
        "--u",
        "0.707,0.707,0",
        "--a0",
        "1,0,0",
        "--a1",
        "0,1,0",
        "--mode",
        "symmetrized",
    ]);
    assert!((v["entries"]["--"].as_f64().unwrap() + 0.1036).abs() < 1e-3);
    assert_eq!(v["frechet_pair"]["positive"], false);
    assert_eq!(v["provenance"]["seed"], 0);
}

#[test]
fn joint_maximally_mixed_is_uniform() {
    let v = json(&[
        "joint",
        "--u",
        "0,0,0",
        "--a0",
        "0,0,1",
        "--a1",
        "1,0,0",
        "--mode",
        "symmetrized",
    ]);
    for p in v["entries"].as_object().unwrap().values() {
        assert!((p.as_f64().unwrap() - 0.25).abs() < 1e-15);
    }
}

#[test]
fn joint_triple_and_explicit_modes() {
    let v = json(&[
        "joint",
        "--u",
        "0,0,0.5",
        "--a2",
        "0,1,0",
        "--mode",
        "independence",
    ]);
    assert_eq!(v["entries"].as_object().unwrap().len(), 8);
    let v = json(&["joint", "--mode", "explicit", "--c01", "-0.3"]);
    assert_eq!(v["arity"], 2);
    let out = run(&["joint", "--mode", "explicit"]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(&["joint", "--u", "1,1,0"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn check_frechet_reports_no_counterexamples() {
    let v = json(&["joint", "--check-frechet", "--random", "500", "--seed", "7"]);
    assert_eq!(v["counterexamples"], 0);
    assert_eq!(v["provenance"]["seed"], 7);
}

#[test]
fn symmetrize_examples() {
    let v = json(&["symmetrize", "--k", "2", "--a", "0,0,1", "--a", "0,0,1"]);
    assert!((v["scalar"].as_f64().unwrap() - 1.0).abs() < 1e-15);
    let v = json(&[
        "symmetrize",
        "--k",
        "5",
        "--random",
        "--compare",
        "bruteforce,pairing,moyal",
    ]);
    for r in v["agreement_residuals"].as_object().unwrap().values() {
        assert!(r.as_f64().unwrap() < 1e-5);
    }
    let axes: Vec<String> = QuasiBellInstance::order2_optimum()
        .a_dirs
        .iter()
        .map(|d| d.to_array().map(|x| x.to_string()).join(","))
        .collect();
    let v = json(&[
        "symmetrize",
        "--a",
        &axes[0],
        "--a",
        &axes[1],
        "--a",
        &axes[2],
    ]);
    for c in v["vector"].as_array().unwrap() {
        assert!(c.as_f64().unwrap().abs() < 1e-12);
    }
    assert_eq!(run(&["symmetrize"]).status.code(), Some(2));
}

#[test]
fn bell_table1_and_enumeration() {
    let v = json(&["bell", "--order", "2", "--table1"]);
    assert_eq!(v["rows"][0], serde_json::json!([4, 0, 0, 0, 0, 0, 0, -4]));
    let out = run(&["bell", "--order", "3", "--enumerate", "--format", "table"]);
    assert!(out.status.success());
    assert_eq!(stdout(&out).trim(), "min -1 max +1 over 256 assignments");
    let out = run(&["bell", "--order", "2", "--table1", "--format", "csv"]);
    assert!(stdout(&out).starts_with("expression,+++,"));
    assert_eq!(
        run(&["bell", "--order", "12", "--enumerate", "--cap", "100"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn bell_evaluates_instance_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_instance(dir.path(), &QuasiBellInstance::order2_optimum());
    let v = json(&["bell", "--order", "2", "--evaluate", &path, "--z", "0.8"]);
    assert!((v["quantum_value"].as_f64().unwrap() - 1.5).abs() < 1e-12);
    assert!((v["werner_value"].as_f64().unwrap() - 1.2).abs() < 1e-12);
    assert_eq!(v["N"], 2);
    assert_eq!(v["per_index_vectors"]["alpha"].as_array().unwrap().len(), 4);
}

#[test]
fn optimize_examples() {
    let v = json(&["optimize", "--order", "2", "--seed", "1"]);
    assert!((v["best_value"].as_f64().unwrap().abs() - 1.5).abs() < 1e-6);
    assert_eq!(v["provenance"]["seed"], 1);
    let v = json(&["optimize", "--order", "0"]);
    assert!((v["best_value"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    let out = run(&["optimize", "--order", "2", "--max-evals", "5"]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn werner_examples() {
    let v = json(&["werner", "--order", "2"]);
    assert!((v["threshold"].as_f64().unwrap() - 2.0 / 3.0).abs() < 1e-9);
    let out = run(&[
        "werner", "--order", "1", "--sweep", "0:1:0.25", "--format", "csv",
    ]);
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "z,value,violated");
    assert_eq!(lines.len(), 6);
    assert!(lines[5].ends_with("true") && lines[3].ends_with("false"));
}

#[test]
fn seeded_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let paths: Vec<String> = (0..2)
        .map(|i| {
            dir.path()
                .join(format!("o{i}.json"))
                .to_str()
                .unwrap()
                .to_string()
        })
        .collect();
    for p in &paths {
        let out = run(&[
            "optimize",
            "--order",
            "3",
            "--seed",
            "5",
            "--restarts",
            "8",
            "--out",
            p,
        ]);
        assert!(out.status.success());
    }
    let a = std::fs::read(&paths[0]).unwrap();
    assert_eq!(a, std::fs::read(&paths[1]).unwrap());
    let v: Value = serde_json::from_slice(&a).unwrap();
    for key in ["version", "seed", "config", "formula_refs"] {
        assert!(v["provenance"].get(key).is_some());
    }
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "seed = 11\nrestarts = 4\n").unwrap();
    let c = cfg.to_str().unwrap();
    let v = json(&["optimize", "--order", "2", "--config", c]);
    assert_eq!(v["provenance"]["seed"], 11);
    assert_eq!(v["restarts_used"], 4);
    let v = json(&[
        "optimize",
        "--order",
        "2",
        "--config",
        c,
        "--seed",
        "3",
        "--restarts",
        "2",
    ]);
    assert_eq!(v["provenance"]["seed"], 3);
    assert_eq!(v["restarts_used"], 2);
    std::fs::write(&cfg, "bogus = 1\n").unwrap();
    assert_eq!(
        run(&["optimize", "--order", "2", "--config", c])
            .status
            .code(),
        Some(2)
    );
}
