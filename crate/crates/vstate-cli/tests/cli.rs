use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn vstate(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_vstate"))
        .args(args)
        .output()
        .expect("run vstate")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn roots_reports_the_bracket_and_passes_the_residual_check() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("roots.json");
    let o = vstate(&["roots", "--p", "2", "--precision-bits", "128", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    assert!(stdout(&o).contains("check    = pass"));
    let v = read_json(&out);
    assert_eq!(v["residual_check"], Value::Bool(true));
    assert!(v["residual_log2_bound"].as_i64().unwrap() >= 126);
    let b = v["b"].as_f64().unwrap();
    assert!((b * b - (2f64.sqrt() - 1.0)).abs() < 1e-15);
}

#[test]
fn multipliers_are_singular_exactly_at_blocks_one_and_p() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("m.json");
    let o = vstate(&["multipliers", "--p", "3", "--n-max", "12", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let v = read_json(&out);
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 12);
    for r in rows {
        let n = r["n"].as_u64().unwrap();
        let zero = r["zero"].as_bool().unwrap();
        assert_eq!(zero, n == 1 || n == 3, "n = {}", n);
        if zero {
            assert_eq!(r["det_reduced"], "0");
        } else {
            let lo = r["enclosure"][0].as_f64().unwrap();
            let hi = r["enclosure"][1].as_f64().unwrap();
            assert!(lo * hi > 0.0, "n = {}: [{}, {}]", n, lo, hi);
        }
    }
}

#[test]
fn verify_p3_order4_reports_the_lambda_lambda_tt_entry() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("v.json");
    let o = vstate(&[
        "verify", "--p", "3", "--order", "4", "--mode", "symbolic", "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    let v = read_json(&out);
    assert_eq!(v["mode"], "symbolic");
    assert!(v["b_interval"][0].as_str().unwrap().contains('/'));
    let row = v["rows"]
        .as_array()
        .unwrap()
        .iter()
        .find(|r| r["lambda_order"] == 2 && r["t_order"] == 2 && r["component"] == 2)
        .unwrap();
    assert_eq!(row["symbolic"], "(-24*b)");
    assert_eq!(row["symbolic_status"], "match");
    let b = vstate::exactnum::b2p_f64(3);
    let val = row["symbolic_value"].as_f64().unwrap();
    assert!((val + 24.0 * 2f64.sqrt() * b).abs() < 1e-12);
}

#[test]
fn usage_errors_exit_64() {
    assert_eq!(code(&vstate(&["roots", "--p", "1"])), 64);
    assert_eq!(code(&vstate(&["no-such-command"])), 64);
    assert_eq!(code(&vstate(&["verify", "--p", "3"])), 64);
    assert_eq!(code(&vstate(&["verify", "--p", "5", "--order", "1", "--mode", "symbolic"])), 64);
    assert_eq!(
        code(&vstate(&[
            "trace", "--p", "2", "--sign", "x", "--a-min", "1e-4", "--a-max", "1e-3", "--steps", "3",
            "--out", "/dev/null",
        ])),
        64
    );
    assert_eq!(code(&vstate(&["--help"])), 0);
}

#[test]
fn experimental_flag_admits_p5() {
    let o = vstate(&["--experimental", "verify", "--p", "5", "--order", "1", "--mode", "symbolic"]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
}

#[test]
fn bad_thread_count_is_a_usage_error() {
    let o = Command::new(env!("CARGO_BIN_EXE_vstate"))
        .args(["roots", "--p", "2"])
        .env("VSTATE_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(code(&o), 64);
}

#[test]
fn trace_is_deterministic_and_renders() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let csv = dir.path().join(format!("{}.csv", name));
        let o = Command::new(env!("CARGO_BIN_EXE_vstate"))
            .args([
                "trace", "--p", "2", "--sign", "+", "--a-min", "1e-4", "--a-max", "1e-3", "--steps", "4",
                "--out", csv.to_str().unwrap(),
            ])
            .env("VSTATE_THREADS", "2")
            .output()
            .unwrap();
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        csv
    };
    let first = run("one");
    let second = run("two");
    let text = std::fs::read_to_string(&first).unwrap();
    assert_eq!(text, std::fs::read_to_string(&second).unwrap());

    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("a,lambda,t,reduced_residual,full_residual"));
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 4);
    assert_eq!(rows[0][0], 1e-4);
    assert_eq!(rows[3][0], 1e-3);
    for r in &rows {
        assert!(r[3] <= 1e-11 && r[4] <= 1e-9, "{:?}", r);
    }
    for field in text.lines().nth(1).unwrap().split(',') {
        let mantissa = field.trim_start_matches('-').split('e').next().unwrap();
        assert_eq!(mantissa.len(), 18, "{}", field);
    }

    let summary = read_json(&first.with_extension("json"));
    assert_eq!(summary["samples"], 4);
    assert!(summary["lost_at"].is_null());
    assert_eq!(summary["config"]["tol_reduced"].as_f64(), Some(1e-11));

    let shape = dir.path().join("shape.csv");
    let o = vstate(&[
        "render", "--branch", first.to_str().unwrap(), "--index", "3", "--p", "2", "--points", "32",
        "--out", shape.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let shape = std::fs::read_to_string(&shape).unwrap();
    assert!(shape.starts_with("component,theta,x,y\n"));
    assert_eq!(shape.lines().count(), 1 + 2 * 32);

    let svg = dir.path().join("shape.svg");
    let o = vstate(&[
        "render", "--branch", first.to_str().unwrap(), "--index", "0", "--p", "2", "--out", svg.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
    assert!(std::fs::read_to_string(&svg).unwrap().starts_with("<svg"));

    let o = vstate(&[
        "render", "--branch", first.to_str().unwrap(), "--index", "9", "--p", "2", "--out", svg.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 64);
}

#[test]
fn unreachable_tolerance_exits_2_with_partial_csv() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("lost.csv");
    let o = vstate(&[
        "trace", "--p", "2", "--sign", "+", "--a-min", "1e-4", "--a-max", "1e-3", "--steps", "3",
        "--tol-reduced", "1e-30", "--out", csv.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 2);
    assert_eq!(
        std::fs::read_to_string(&csv).unwrap(),
        "a,lambda,t,reduced_residual,full_residual\n"
    );
    let summary = read_json(&csv.with_extension("json"));
    assert_eq!(summary["lost_at"].as_f64(), Some(1e-4));
}
