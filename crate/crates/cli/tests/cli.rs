use std::fs;
use std::process::{Command, Output};

use serde_json::Value;

fn teelab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_teelab")).args(args).env_remove("TEELAB_THREADS").output().unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn fusion_report_for_fibonacci() {
    let out = teelab(&["fusion", "--category", "fibonacci"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let r = json(&out);
    let phi = (1.0 + 5f64.sqrt()) / 2.0;
    assert!((r["results"]["quantum_dimensions"][1].as_f64().unwrap() - phi).abs() < 1e-12);
    assert!((r["results"]["p_star"][1].as_f64().unwrap() - 0.7236067977).abs() < 1e-9);
    assert!(r["results"]["k"].as_f64().unwrap() > 1.0);
    assert!(r["results"]["identity_residual"].as_f64().unwrap() < 1e-12);
    assert_eq!(r["passed"], true);
}

#[test]
fn stabilizer_example_saturates() {
    let out = teelab(&["stabilizer", "--p", "2", "--size", "12", "--widths", "2", "--all-sectors"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let r = json(&out);
    let sectors = r["results"]["sectors"].as_array().unwrap();
    assert_eq!(sectors.len(), 4);
    for s in sectors {
        assert_eq!(s["cmi"].as_f64().unwrap(), 2.0 * 2f64.ln());
        assert_eq!(s["gamma"].as_f64().unwrap(), 2f64.ln());
        assert_eq!(s["ranks"]["units"], 2);
    }
    assert!(r["checks"].as_array().unwrap().iter().any(|c| c["name"] == "abelian bound" && c["status"] == "pass"));
    assert!(r.get("timings").is_none());
}

#[test]
fn bits_are_a_display_conversion() {
    let out = teelab(&["stabilizer", "--p", "2", "--units", "bits", "--sector", "1,1"]);
    assert_eq!(out.status.code(), Some(0));
    let r = json(&out);
    assert_eq!(r["units"], "bits");
    let s = &r["results"]["sectors"];
    assert_eq!(s.as_array().unwrap().len(), 1);
    assert_eq!(s[0]["label"], "(1,1)");
    assert!((s[0]["cmi"].as_f64().unwrap() - 2.0).abs() < 1e-12);
}

#[test]
fn small_rings_are_cross_checked_densely() {
    let r = json(&teelab(&["ring", "--q", "2", "--arcs", "2,1,1,1"]));
    let names: Vec<&str> = r["checks"].as_array().unwrap().iter().map(|c| c["name"].as_str().unwrap()).collect();
    for want in ["dense: global distinguishability", "dense: local indistinguishability", "dense: fusion", "counted fusion"] {
        assert!(names.contains(&want), "{names:?}");
    }
    assert_eq!(r["passed"], true);
}

#[test]
fn missing_trace_is_a_config_error() {
    let out = teelab(&["audit", "--trace", "missing.json"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("missing.json"));
}

#[test]
fn failing_check_is_named_on_stderr() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("decreasing.json");
    fs::write(&path, teelab::audit::DECREASING_TRACE).unwrap();
    let out = teelab(&["audit", "--trace", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("monotonicity"), "{}", stderr(&out));
    assert_eq!(json(&out)["passed"], false);
}

#[test]
fn config_errors_exit_two() {
    for args in [
        &["ring"][..],
        &["ring", "--q", "3", "--arcs", "1,1"],
        &["stabilizer", "--p", "4"],
        &["stabilizer", "--p", "2", "--n", "2"],
        &["fusion", "--category", "nope"],
        &["audit", "--category", "toric_code", "--epsilon", "0.5"],
    ] {
        let out = teelab(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}: {}", stderr(&out));
    }
}

#[test]
fn config_file_with_flag_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("ring.json");
    fs::write(&cfg, r#"{"kind": "ring", "q": 3, "arcs": [2, 1, 1, 1]}"#).unwrap();
    let base = json(&teelab(&["ring", "--config", cfg.to_str().unwrap()]));
    let over = json(&teelab(&["ring", "--config", cfg.to_str().unwrap(), "--q", "5"]));
    assert_eq!(base["scenario"]["q"], 3);
    assert_eq!(over["scenario"]["q"], 5);
    assert_eq!(over["scenario"]["arcs"], serde_json::json!([2, 1, 1, 1]));
    assert_ne!(base["input_hash"], over["input_hash"]);

    fs::write(&cfg, r#"{"kind": "ring", "qq": 3}"#).unwrap();
    assert_eq!(teelab(&["ring", "--config", cfg.to_str().unwrap()]).status.code(), Some(2));
    fs::write(&cfg, r#"{"kind": "fusion"}"#).unwrap();
    assert_eq!(teelab(&["ring", "--config", cfg.to_str().unwrap(), "--q", "3"]).status.code(), Some(2));
}

#[test]
fn reports_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for path in [&a, &b] {
        let out = teelab(&["ring", "--q", "3", "--arcs", "3,1,1,1", "--n", "1", "--output", path.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    }
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    let timed = json(&teelab(&["ring", "--q", "3", "--timings"]));
    assert!(timed["timings"]["total"].as_f64().unwrap() >= 0.0);
}

#[test]
fn sweep_writes_points_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let runs: Vec<String> = ["1", "3"]
        .iter()
        .map(|threads| {
            let out_dir = dir.path().join(format!("t{threads}"));
            let out = Command::new(env!("CARGO_BIN_EXE_teelab"))
                .args(["sweep", "--target", "stabilizer", "--p-values", "2,3,5", "--width-values", "2,3", "--output"])
                .arg(&out_dir)
                .env("TEELAB_THREADS", threads)
                .output()
                .unwrap();
            assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
            assert_eq!((0..6).filter(|i| out_dir.join(format!("point-{i:03}.json")).exists()).count(), 6);
            fs::read_to_string(out_dir.join("summary.csv")).unwrap()
        })
        .collect();
    assert_eq!(runs[0], runs[1]);
    let mut rdr = csv::Reader::from_reader(runs[0].as_bytes());
    let headers = rdr.headers().unwrap().clone();
    let col = |name: &str| headers.iter().position(|h| h == name).unwrap();
    let rows: Vec<csv::StringRecord> = rdr.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 6);
    for r in &rows {
        assert!(r[col("margin")].parse::<f64>().unwrap() >= 0.0);
        assert_eq!(&r[col("passed")], "true");
    }
}

#[test]
fn audit_sweep_bound_increases_with_n() {
    let out = teelab(&["sweep", "--target", "audit", "--category", "toric_code", "--n-values", "1..=16"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let mut rdr = csv::Reader::from_reader(&out.stdout[..]);
    let at = rdr.headers().unwrap().iter().position(|h| h == "bound").unwrap();
    let bounds: Vec<f64> = rdr.records().map(|r| r.unwrap()[at].parse().unwrap()).collect();
    assert_eq!(bounds.len(), 16);
    assert!(bounds.windows(2).all(|w| w[1] > w[0]));
}

#[test]
fn ring_sweep_matches_ln_q() {
    let out = teelab(&["sweep", "--target", "ring", "--q-values", "2..=5"]);
    assert_eq!(out.status.code(), Some(0));
    let mut rdr = csv::Reader::from_reader(&out.stdout[..]);
    let h = rdr.headers().unwrap().clone();
    let (qi, ii) = (h.iter().position(|x| x == "q").unwrap(), h.iter().position(|x| x == "I").unwrap());
    for r in rdr.records().map(Result::unwrap) {
        let q: f64 = r[qi].parse().unwrap();
        assert_eq!(r[ii].parse::<f64>().unwrap(), q.ln());
    }
}

#[test]
fn sweep_failures_are_recorded_not_fatal() {
    // n = 2 needs a wider A than width 2 provides; width 4 is fine.
    let out = teelab(&["sweep", "--target", "stabilizer", "--p", "2", "--n", "2", "--width-values", "2,4"]);
    assert_eq!(out.status.code(), Some(1));
    let text = String::from_utf8_lossy(&out.stdout);
    assert_eq!(text.lines().count(), 3);
    assert!(stderr(&out).contains("grid point 0"));
}

#[test]
fn bad_thread_count_is_a_config_error() {
    let out = Command::new(env!("CARGO_BIN_EXE_teelab"))
        .args(["sweep", "--target", "ring", "--q-values", "2"])
        .env("TEELAB_THREADS", "0")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn selftest_passes() {
    let out = teelab(&["selftest"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    assert_eq!(String::from_utf8_lossy(&out.stdout).lines().filter(|l| l.contains(": PASS")).count(), 5);
}
