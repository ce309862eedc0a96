use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use nsw_core::io::instance_from_json;
use nsw_core::{check_submodular, CheckMode, Instance};
use serde_json::Value;
use tempfile::TempDir;

fn nsw(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nsw"))
        .args(args)
        .env_remove("NSW_SIZE_GUARD")
        .output()
        .expect("binary runs")
}

fn data(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name).to_string_lossy().into_owned()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn path(dir: &TempDir, name: &str) -> PathBuf {
    dir.path().join(name)
}

fn write_config(dir: &TempDir, name: &str, json: &str) -> String {
    let p = path(dir, name);
    std::fs::write(&p, json).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn gen_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let a = path(&dir, "a.json");
    let b = path(&dir, "b.json");
    for p in [&a, &b] {
        let o = nsw(&["gen", "--family", "additive", "-n", "2", "-m", "4", "--seed", "7", "--out", p.to_str().unwrap()]);
        assert_eq!(code(&o), 0, "{}", stderr(&o));
    }
    let first = std::fs::read(&a).unwrap();
    assert_eq!(first, std::fs::read(&b).unwrap());
    let piped = nsw(&["gen", "--family", "additive", "-n", "2", "-m", "4", "--seed", "7"]);
    assert_eq!(piped.stdout, first);
    let other = nsw(&["gen", "--family", "additive", "-n", "2", "-m", "4", "--seed", "8"]);
    assert_ne!(other.stdout, first);
}

#[test]
fn generated_coverage_instance_passes_checkers() {
    let o = nsw(&["gen", "--family", "coverage", "-n", "3", "-m", "5", "--seed", "1"]);
    assert_eq!(code(&o), 0);
    let inst: Instance = instance_from_json(&stdout(&o)).unwrap();
    assert_eq!((inst.num_agents(), inst.num_items()), (3, 5));
    assert!(inst.validate().is_empty());
    for v in inst.valuations() {
        assert!(check_submodular(v, &inst.all_items(), CheckMode::Exhaustive).unwrap().is_empty());
    }
}

#[test]
fn gen_rejects_bad_arguments() {
    assert_eq!(code(&nsw(&["gen", "--family", "additive", "-n", "0", "-m", "4", "--seed", "1"])), 1);
    assert_eq!(code(&nsw(&["gen", "--family", "xos", "-n", "2", "-m", "4"])), 1);
    assert_eq!(code(&nsw(&["gen", "--family", "additive", "-n", "2", "-m", "4", "--weights", "dirichlet"])), 1);
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(code(&nsw(&["bogus"])), 1);
    assert_eq!(code(&nsw(&["solve"])), 1);
    assert_eq!(code(&nsw(&["solve", "/nonexistent/instance.json"])), 1);
    assert_eq!(code(&nsw(&["solve", &data("e1.json"), "--eps", "0"])), 1);
    assert_eq!(code(&nsw(&["--help"])), 0);
}

#[test]
fn e1_solve_matches_the_optimum() {
    let dir = TempDir::new().unwrap();
    let report = path(&dir, "report.json");
    let o = nsw(&["solve", &data("e1.json"), "--eps", "0.1", "--exact", "--out", report.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(stdout(&o).contains("allocation: 1: {a, d}; 2: {b, c}"));
    let doc: Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(doc["exact"]["ratio"], 1.0);
    assert_eq!(doc["exact"]["within_guarantee"], true);
    assert!((doc["guarantee"]["symmetric"].as_f64().unwrap() - 4.1).abs() < 1e-12);
    assert!((doc["nsw"].as_f64().unwrap() - 20f64.sqrt()).abs() < 1e-12);
    assert_eq!(doc["swaps"], 1);
}

#[test]
fn infeasible_instance_reports_zero() {
    let o = nsw(&["solve", &data("infeasible.json"), "--exact", "--verify"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(stdout(&o).contains("NSW = 0"));
}

#[test]
fn e1_fair_pipeline_passes() {
    let o = nsw(&["solve", &data("e1.json"), "--efx"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("½-EFX: PASS"));

    let dir = TempDir::new().unwrap();
    let opt = path(&dir, "opt.json");
    assert_eq!(code(&nsw(&["exact", &data("e1.json"), "--out", opt.to_str().unwrap()])), 0);
    let fair = path(&dir, "fair.json");
    let o = nsw(&["efx", &data("e1.json"), "--alloc", opt.to_str().unwrap(), "--out", fair.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(stdout(&o).contains("½-EFX: PASS"));
    let doc: Value = serde_json::from_str(&std::fs::read_to_string(&fair).unwrap()).unwrap();
    let items: usize = doc["bundles"].as_object().unwrap().values().map(|b| b.as_array().unwrap().len()).sum();
    assert_eq!(items, 4);
}

#[test]
fn verify_passes_on_generated_instances() {
    let dir = TempDir::new().unwrap();
    for (family, weights) in [("additive", "symmetric"), ("coverage", "asymmetric"), ("budget_additive", "symmetric")] {
        let p = path(&dir, &format!("{family}.json"));
        let g = nsw(&["gen", "--family", family, "-n", "3", "-m", "6", "--seed", "3", "--weights", weights, "--out", p.to_str().unwrap()]);
        assert_eq!(code(&g), 0);
        let mut args = vec!["verify", p.to_str().unwrap(), "--exact"];
        if weights == "symmetric" {
            args.push("--efx");
        }
        let o = nsw(&args);
        assert_eq!(code(&o), 0, "{}\n{}", stdout(&o), stderr(&o));
        assert!(!stdout(&o).contains("FAIL"));
    }
}

#[test]
fn trace_has_one_line_per_swap() {
    let dir = TempDir::new().unwrap();
    let trace = path(&dir, "trace.csv");
    let report = path(&dir, "report.json");
    let o = nsw(&["solve", &data("e1.json"), "--trace", trace.to_str().unwrap(), "--out", report.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let text = std::fs::read_to_string(&trace).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "iteration,from,item,to,log_gain");
    assert_eq!(&lines[1][..9], "1,1,c,2,0");
    let gain: f64 = lines[1].rsplit(',').next().unwrap().parse().unwrap();
    assert!((gain - 0.5 * (4f64 / 3.0).ln()).abs() < 1e-12);
    let doc: Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(lines.len() - 1, doc["swaps"].as_u64().unwrap() as usize);
}

#[test]
fn empty_experiment_is_header_only() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "c.json", r#"{"families": ["additive"], "agents": [2, 3], "items": [2, 6], "eps": 0.1, "seeds": [1], "trials": 0}"#);
    let o = nsw(&["experiment", &cfg]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o), "instance_id,n,m,family,eps,alg_log_nsw,opt_log_nsw,ratio,bound,swaps,efx_pass\n");
}

#[test]
fn oversized_exact_rows_are_skipped() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "c.json", r#"{"families": ["additive"], "agents": [4, 4], "items": [20, 20], "eps": 0.1, "seeds": [5], "trials": 2, "exact": true}"#);
    let o = nsw(&["experiment", &cfg]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o).lines().count(), 1);
    let err = stderr(&o);
    assert_eq!(err.matches("warning: skipped").count(), 2);
    assert!(err.contains("size guard"));
}

#[test]
fn size_guard_can_be_raised() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "c.json", r#"{"families": ["additive"], "agents": [2, 2], "items": [8, 8], "eps": 0.1, "seeds": [5], "trials": 1}"#);
    let low = Command::new(env!("CARGO_BIN_EXE_nsw")).args(["experiment", &cfg]).env("NSW_SIZE_GUARD", "255").output().unwrap();
    assert_eq!(String::from_utf8(low.stdout).unwrap().lines().count(), 1);
    let ok = Command::new(env!("CARGO_BIN_EXE_nsw")).args(["experiment", &cfg]).env("NSW_SIZE_GUARD", "256").output().unwrap();
    assert_eq!(String::from_utf8(ok.stdout).unwrap().lines().count(), 3);
    let bad = Command::new(env!("CARGO_BIN_EXE_nsw")).args(["experiment", &cfg]).env("NSW_SIZE_GUARD", "lots").output().unwrap();
    assert_eq!(bad.status.code(), Some(1));
}

#[test]
fn symmetric_additive_experiment_stays_within_bound() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        &dir,
        "c.json",
        r#"{"families": ["additive"], "agents": [1, 3], "items": [0, 6], "weights": "symmetric", "eps": 0.1,
            "seeds": [1, 2, 3, 4, 5], "trials": 10, "exact": true, "efx": true}"#,
    );
    let o = nsw(&["experiment", &cfg, "--verify"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let text = stdout(&o);
    let body: String = text.lines().filter(|l| !l.starts_with('#')).map(|l| format!("{l}\n")).collect();
    let mut reader = csv::Reader::from_reader(body.as_bytes());
    let mut rows = 0;
    let mut max = 0f64;
    for rec in reader.records() {
        let rec = rec.unwrap();
        let alg: f64 = parse_log(&rec[5]);
        let opt: f64 = parse_log(&rec[6]);
        let ratio: f64 = rec[7].parse().unwrap();
        let expected = if opt == f64::NEG_INFINITY { 1.0 } else { (opt - alg).exp() };
        assert!((ratio - expected).abs() < 1e-9 * expected);
        assert!(ratio <= 4.1 + 1e-12);
        assert_eq!(&rec[8], "4.1");
        assert_eq!(&rec[10], "true");
        max = max.max(ratio);
        rows += 1;
    }
    assert_eq!(rows, 50);
    assert_eq!(text.lines().last().unwrap(), format!("# max ratio additive {max}"));
}

fn parse_log(s: &str) -> f64 {
    if s == "-inf" {
        f64::NEG_INFINITY
    } else {
        s.parse().unwrap()
    }
}

#[test]
fn experiment_output_is_byte_identical() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        &dir,
        "c.json",
        r#"{"families": ["coverage", "partition_matroid_rank"], "agents": [2, 3], "items": [3, 6], "weights": "asymmetric",
            "eps": 0.25, "seeds": [9, 10], "trials": 4}"#,
    );
    let a = path(&dir, "a.csv");
    let b = path(&dir, "b.csv");
    for p in [&a, &b] {
        assert_eq!(code(&nsw(&["experiment", &cfg, "--out", p.to_str().unwrap()])), 0);
    }
    let first = std::fs::read(&a).unwrap();
    assert_eq!(first, std::fs::read(&b).unwrap());
    assert_eq!(String::from_utf8(first).unwrap().lines().filter(|l| !l.starts_with('#')).count(), 17);
}

#[test]
fn experiment_rejects_bad_configs() {
    let dir = TempDir::new().unwrap();
    for (i, bad) in [
        r#"{"families": ["xos"], "agents": [2, 3], "items": [2, 6], "eps": 0.1, "seeds": [1], "trials": 1}"#,
        r#"{"families": ["additive"], "agents": [0, 3], "items": [2, 6], "eps": 0.1, "seeds": [1], "trials": 1}"#,
        r#"{"families": ["additive"], "agents": [2, 3], "items": [6, 2], "eps": 0.1, "seeds": [1], "trials": 1}"#,
        r#"{"families": ["additive"], "agents": [2, 3], "items": [2, 6], "eps": -1, "seeds": [1], "trials": 1}"#,
        r#"{"families": ["additive"], "agents": [2, 3], "items": [2, 6], "eps": 0.1, "seeds": [1], "trials": 1, "weights": "asymmetric", "efx": true}"#,
        r#"{"families": ["additive"], "agents": [2, 3], "items": [2, 6], "eps": 0.1, "seeds": [1], "trials": 1, "extra": 1}"#,
        "not json",
    ]
    .iter()
    .enumerate()
    {
        let cfg = write_config(&dir, &format!("bad{i}.json"), bad);
        assert_eq!(code(&nsw(&["experiment", &cfg])), 1, "config {bad}");
    }
}

#[test]
fn efx_needs_equal_weights() {
    let dir = TempDir::new().unwrap();
    let p = path(&dir, "w.json");
    let g = nsw(&["gen", "--family", "additive", "-n", "3", "-m", "5", "--weights", "asymmetric", "--out", p.to_str().unwrap()]);
    assert_eq!(code(&g), 0);
    let o = nsw(&["efx", p.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("equal agent weights"));
}
