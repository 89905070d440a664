use std::path::Path;
use std::process::{Command, Output};

use bell_lab::lhv::{behavior_of, enumerate_deterministic};
use bell_lab::nonlocal_box::pr_behavior;
use bell_lab::{LocalModel, Scenario};
use serde_json::Value;

fn bell_lab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bell-lab"))
        .args(args)
        .env_remove("BELL_LAB_SEED")
        .output()
        .unwrap()
}

fn schema(name: &str) -> Value {
    let path = Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("schemas")
        .join(format!("{name}.json"));
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn assert_valid(name: &str, doc: &Value) {
    let v = jsonschema::validator_for(&schema(name)).unwrap();
    let errors: Vec<String> = v
        .iter_errors(doc)
        .map(|e| format!("{} at {}", e, e.instance_path))
        .collect();
    assert!(errors.is_empty(), "{name}: {errors:?}");
}

/// Runs a command expected to succeed and checks its output against a schema.
fn ok_json(args: &[&str], schema_name: &str) -> Value {
    let out = bell_lab(args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let doc: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_valid(schema_name, &doc);
    doc
}

/// Runs a command expected to fail and returns its exit code and error document.
fn err_json(args: &[&str]) -> (i32, Value) {
    let out = bell_lab(args);
    assert!(!out.status.success());
    let doc: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_valid("error", &doc);
    (out.status.code().unwrap(), doc)
}

fn f(v: &Value) -> f64 {
    v.as_f64().unwrap()
}

#[test]
fn chsh_pr_estimates_four() {
    let doc = ok_json(
        &[
            "chsh", "--source", "pr", "--rounds", "1000000", "--seed", "7",
        ],
        "run_report",
    );
    assert_eq!(f(&doc["S_hat"]), 4.0);
    assert_eq!(doc["seed"], 7);
    assert_eq!(doc["N"], 1_000_000);
    assert_eq!(doc["config_echo"]["source"]["kind"], "pr_box");
}

#[test]
fn chsh_local_reports_interval() {
    let doc = ok_json(
        &["chsh", "--source", "local", "--rounds", "10", "--seed", "1"],
        "run_report",
    );
    let ci = doc["ci95"].as_array().unwrap();
    assert!(f(&ci[0]) <= 3.0 && f(&ci[0]) <= f(&doc["S_hat"]) && f(&doc["S_hat"]) <= f(&ci[1]));
    let big = ok_json(
        &[
            "chsh", "--source", "local", "--rounds", "200000", "--seed", "1",
        ],
        "run_report",
    );
    assert!(f(&big["S_hat"]) <= 3.0 + 4.0 * f(&big["stderr"]));
}

#[test]
fn chsh_quantum_uses_angles() {
    let doc = ok_json(
        &[
            "chsh", "--source", "quantum", "--rounds", "200000", "--seed", "3",
        ],
        "run_report",
    );
    let tsirelson = 2.0 + std::f64::consts::SQRT_2;
    assert!((f(&doc["S_hat"]) - tsirelson).abs() <= 4.0 * f(&doc["stderr"]));
    let aligned = ok_json(
        &[
            "chsh",
            "--source",
            "quantum",
            "--rounds",
            "20000",
            "--angles=0,0,0,0",
            "--seed",
            "3",
        ],
        "run_report",
    );
    assert!((f(&aligned["S_hat"]) - 3.0).abs() <= 4.0 * f(&aligned["stderr"]) + 1e-12);
}

#[test]
fn zero_rounds_is_a_validation_error() {
    let (code, doc) = err_json(&["chsh", "--source", "quantum", "--rounds", "0"]);
    assert_eq!(code, 2);
    assert_eq!(doc["error"]["kind"], "validation");
}

#[test]
fn chsh_file_source_and_tallies() {
    let dir = tempfile::tempdir().unwrap();
    let behavior = dir.path().join("pr.json");
    std::fs::write(&behavior, pr_behavior().to_json_value().to_string()).unwrap();
    let tallies = dir.path().join("t.csv");
    let doc = ok_json(
        &[
            "chsh",
            "--source",
            "file",
            "--behavior",
            behavior.to_str().unwrap(),
            "--rounds",
            "5000",
            "--tallies",
            tallies.to_str().unwrap(),
        ],
        "run_report",
    );
    assert_eq!(f(&doc["S_hat"]), 4.0);
    assert_eq!(doc["tallies_ref"], tallies.to_str().unwrap());
    let csv = std::fs::read_to_string(&tallies).unwrap();
    assert!(csv.starts_with("x,y,a,b,count\n"));
    let (code, _) = err_json(&["chsh", "--source", "file", "--rounds", "10"]);
    assert_eq!(code, 2);
}

#[test]
fn chsh_geometry_audit() {
    let dir = tempfile::tempdir().unwrap();
    let geo = dir.path().join("geo.json");
    let ev = |p: usize, kind: &str, x: f64, t: f64| serde_json::json!({"label": {"party": p, "kind": kind}, "position": [x, 0.0, 0.0], "time": t});
    let parties = serde_json::json!([
        {"input": ev(0, "input_chosen", 0.0, 0.0), "outcome": ev(0, "outcome_registered", 0.0, 0.0)},
        {"input": ev(1, "input_chosen", 18e3, 0.0), "outcome": ev(1, "outcome_registered", 18e3, 1.0)},
    ]);
    std::fs::write(&geo, parties.to_string()).unwrap();
    let doc = ok_json(
        &[
            "chsh",
            "--source",
            "pr",
            "--rounds",
            "100",
            "--geometry",
            geo.to_str().unwrap(),
        ],
        "run_report",
    );
    assert_eq!(doc["loopholes"]["locality"], true);
    assert_eq!(doc["loopholes"]["detection"], false);
}

#[test]
fn seed_determinism_and_env_default() {
    let a = bell_lab(&[
        "chsh", "--source", "quantum", "--rounds", "5000", "--seed", "11",
    ]);
    let b = bell_lab(&[
        "chsh", "--source", "quantum", "--rounds", "5000", "--seed", "11",
    ]);
    assert_eq!(a.stdout, b.stdout);
    let env = Command::new(env!("CARGO_BIN_EXE_bell-lab"))
        .args(["chsh", "--source", "quantum", "--rounds", "5000"])
        .env("BELL_LAB_SEED", "11")
        .output()
        .unwrap();
    assert_eq!(a.stdout, env.stdout);
}

#[test]
fn localbound_examples() {
    let doc = ok_json(&["localbound", "--scenario", "2,2,2"], "local_bound");
    assert_eq!(f(&doc["max"]), 3.0);
    assert_eq!(doc["n_optimal"], 8);
    let zero = ok_json(&["localbound", "--functional", "zero"], "local_bound");
    assert_eq!(f(&zero["max"]), 0.0);
    let (code, doc) = err_json(&["localbound", "--scenario", "4,4,3"]);
    assert_eq!(code, 4);
    assert!(doc["error"]["message"]
        .as_str()
        .unwrap()
        .contains("desk-scale exceeded"));
    let (code, _) = err_json(&["localbound", "--scenario", "2,2"]);
    assert_eq!(code, 2);
}

#[test]
fn membership_examples() {
    let dir = tempfile::tempdir().unwrap();
    let pr = dir.path().join("pr.json");
    std::fs::write(&pr, pr_behavior().to_json_value().to_string()).unwrap();
    let doc = ok_json(
        &["membership", "--behavior", pr.to_str().unwrap()],
        "membership",
    );
    assert_eq!(doc["local"], false);
    assert_eq!(f(&doc["certificate"]["witnessed_value"]), 4.0);

    let st = enumerate_deterministic(&Scenario::chsh()).unwrap();
    let w: Vec<f64> = (0..16).map(|i| (i + 1) as f64 / 136.0).collect();
    let mix = dir.path().join("mix.json");
    std::fs::write(
        &mix,
        behavior_of(&LocalModel::new(st, w).unwrap())
            .to_json_value()
            .to_string(),
    )
    .unwrap();
    let doc = ok_json(
        &["membership", "--behavior", mix.to_str().unwrap()],
        "membership",
    );
    assert_eq!(doc["local"], true);
    assert!(f(&doc["residual"]) <= 1e-9);

    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\"scenario\": ").unwrap();
    let (code, doc) = err_json(&["membership", "--behavior", bad.to_str().unwrap()]);
    assert_eq!(code, 2);
    assert_eq!(doc["error"]["kind"], "parse");
    let (code, _) = err_json(&["membership", "--behavior", "/nonexistent/behavior.json"]);
    assert_eq!(code, 2);
}

#[test]
fn ghz_examples() {
    let on = ok_json(
        &[
            "ghz-signal",
            "--alice",
            "on",
            "--v",
            "1e4",
            "--rounds",
            "100000",
        ],
        "ghz_arm",
    );
    assert_eq!(f(&on["report"]["p_equal"]), 1.0);
    let off = ok_json(
        &[
            "ghz-signal",
            "--alice",
            "off",
            "--v",
            "1e4",
            "--rounds",
            "100000",
        ],
        "ghz_arm",
    );
    assert!((f(&off["report"]["p_equal"]) - 0.5).abs() <= 4.0 * (0.25f64 / 1e5).sqrt());
    let both = ok_json(
        &["ghz-signal", "--alice", "both", "--rounds", "100000"],
        "ghz_signaling",
    );
    assert!((f(&both["report"]["mutual_information_bits"]) - 0.3113).abs() < 0.01);
    let (code, _) = err_json(&["ghz-signal", "--v", "0.5"]);
    assert_eq!(code, 2);
}

#[test]
fn speed_scan_examples() {
    let six = ok_json(
        &[
            "speed-scan",
            "--preset",
            "geneva-18km-6ns",
            "--sync-ns",
            "6",
        ],
        "speed_scan",
    );
    let v6 = f(&six["overall_v_min_over_c"]);
    assert!(v6 >= 1e4);
    let three = ok_json(&["speed-scan", "--sync-ns", "3"], "speed_scan");
    assert!((f(&three["overall_v_min_over_c"]) / v6 - 2.0).abs() < 1e-9);
    let (code, _) = err_json(&["speed-scan", "--sync-ns", "0"]);
    assert_eq!(code, 2);
    let (code, _) = err_json(&["speed-scan", "--sync-ns", "-1"]);
    assert_eq!(code, 2);

    let csv = bell_lab(&["speed-scan", "--csv"]);
    let text = String::from_utf8(csv.stdout).unwrap();
    assert!(text.starts_with("frame_azimuth_deg,frame_beta,v_min_over_c\n"));
    assert!(text.lines().last().unwrap().starts_with("overall,,"));

    let dir = tempfile::tempdir().unwrap();
    let geo = dir.path().join("geo.json");
    std::fs::write(&geo, r#"{"sites": [{"x_m": 0, "y_m": 0, "z_m": 0}, {"x_m": 18000, "y_m": 0, "z_m": 0}], "betas": [0.0]}"#)
        .unwrap();
    let doc = ok_json(
        &[
            "speed-scan",
            "--geometry",
            geo.to_str().unwrap(),
            "--sync-ns",
            "6",
        ],
        "speed_scan",
    );
    assert!(f(&doc["overall_v_min_over_c"]) >= 1e4);
    let (code, _) = err_json(&["speed-scan", "--geometry", geo.to_str().unwrap()]);
    assert_eq!(code, 2);
}

#[test]
fn detection_and_delayed_outcome() {
    let doc = ok_json(
        &[
            "detection",
            "--rounds",
            "200000",
            "--seed",
            "4",
            "--efficiency",
        ],
        "detection_report",
    );
    assert_eq!(doc["full_behavior_local"], true);
    assert_eq!(f(&doc["post_selected_s"]["value"]), 4.0);
    assert!(doc["alice_efficiency"].is_object());
    let quiet = ok_json(&["detection", "--rounds", "1000"], "detection_report");
    assert!(quiet["alice_efficiency"].is_null());

    let doc = ok_json(
        &[
            "delayed-outcome",
            "--distance-m",
            "18000",
            "--delay-us",
            "100",
        ],
        "delayed_outcome",
    );
    assert_eq!(doc["result"]["viable"], true);
    assert!((f(&doc["result"]["required_speed"]) - 1.8e8).abs() < 1e-6);
    let now = ok_json(&["delayed-outcome", "--delay-us", "0"], "delayed_outcome");
    assert_eq!(now["result"]["viable"], false);
}

#[test]
fn help_and_schemas() {
    let help = bell_lab(&["chsh", "--help"]);
    let text = String::from_utf8(help.stdout).unwrap();
    assert!(text.contains("[default: 100000]") && text.contains("BELL_LAB_SEED"));
    let list = String::from_utf8(bell_lab(&["schema"]).stdout).unwrap();
    assert_eq!(list.lines().count(), 9);
    for name in list.lines() {
        let printed: Value = serde_json::from_slice(&bell_lab(&["schema", name]).stdout).unwrap();
        assert_eq!(printed, schema(name));
    }
}
