use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn repo(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..").join(rel)
}

fn flowhand(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_flowhand"))
        .args(args)
        .env("RUST_LOG", "off")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn table1_matches_golden() {
    let out = flowhand(&["table1"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let golden = fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden/table1.txt")).unwrap();
    assert_eq!(stdout(&out), golden);
}

#[test]
fn table1_mismatch_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let rows = dir.path().join("rows.json");
    let mut specs = serde_json::to_value(flowhand_rows()).unwrap();
    specs[1]["expected"] = "Success".into();
    fs::write(&rows, specs.to_string()).unwrap();
    let out = flowhand(&["table1", "--prototypes", path_str(&rows)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stdout(&out).contains("NO"));

    specs.as_array_mut().unwrap().pop();
    fs::write(&rows, specs.to_string()).unwrap();
    let out = flowhand(&["table1", "--prototypes", path_str(&rows)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("missing prototype row D"));
}

fn flowhand_rows() -> serde_json::Value {
    serde_json::json!([
        {"label": "A", "exhaust_port_mm2": 7.1, "epsilon": 2.6, "q1_max_lpm": 2.0, "q_src_max_lpm": 118.0,
         "expected": "Success", "q3_lpm": 116.0, "f1_N": 1.01, "f_block_N": 0.99},
        {"label": "B", "exhaust_port_mm2": 0.0, "epsilon": 2.6, "q1_max_lpm": 10.5, "q_src_max_lpm": 144.0,
         "expected": "Failure", "q3_lpm": 134.0, "f1_N": 1.18, "f_block_N": 1.34},
        {"label": "C", "exhaust_port_mm2": 7.1, "epsilon": 1.5, "q1_max_lpm": 2.4, "q_src_max_lpm": 148.0,
         "expected": "Failure", "q3_lpm": 146.0, "f1_N": 0.90, "f_block_N": 1.02},
        {"label": "D", "exhaust_port_mm2": 50.3, "epsilon": 2.6, "q1_max_lpm": 1.7, "q_src_max_lpm": 117.0,
         "expected": "Success", "q3_lpm": 115.0, "f1_N": 0.99, "f_block_N": 0.98}
    ])
}

#[test]
fn table1_file_rows_reproduce_builtin() {
    let dir = tempfile::tempdir().unwrap();
    let rows = dir.path().join("rows.json");
    fs::write(&rows, flowhand_rows().to_string()).unwrap();
    let a = flowhand(&["table1", "--prototypes", path_str(&rows)]);
    let b = flowhand(&["table1"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(stdout(&a), stdout(&b));
}

#[test]
fn simulate_is_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = repo("scenarios/pick_place.json");
    let config = repo("configs/prototype_a.json");
    let mut outputs = Vec::new();
    for name in ["a.csv", "b.csv"] {
        let p = dir.path().join(name);
        let out = flowhand(&["simulate", path_str(&scenario), "--config", path_str(&config), "--out", path_str(&p)]);
        assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
        outputs.push(fs::read(&p).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
    let text = String::from_utf8(outputs.remove(0)).unwrap();
    assert_eq!(
        text.lines().next().unwrap(),
        "t,q_src_lpm,q1_lpm,q2_lpm,q_exhaust_lpm,state,p_f_kpa,r_mm,f_tip_n,injection,friction"
    );
    let stdout_run = flowhand(&["simulate", path_str(&scenario), "--config", path_str(&config)]);
    assert_eq!(stdout(&stdout_run), text);
}

#[test]
fn unknown_config_key_exits_1_with_path() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    fs::write(&cfg, r#"{"venturi": {"h_t": 55}}"#).unwrap();
    let out = flowhand(&["simulate", path_str(&repo("scenarios/ramp.json")), "--config", path_str(&cfg)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("venturi.h_t"), "{}", stderr(&out));
}

#[test]
fn invalid_value_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    fs::write(&cfg, r#"{"fcs": {"alpha": 1.5}}"#).unwrap();
    let out = flowhand(&["validate", "--config", path_str(&cfg)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("fcs.alpha"), "{}", stderr(&out));
}

#[test]
fn missing_file_exits_1() {
    let out = flowhand(&["simulate", "/nonexistent/scenario.json"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn design_search_default_targets() {
    let dir = tempfile::tempdir().unwrap();
    let tuned = dir.path().join("tuned.json");
    let out = flowhand(&["design-search", "--out", path_str(&tuned)]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(stdout(&out).contains("PASS"));
    let check = flowhand(&["validate", "--config", path_str(&tuned)]);
    assert_eq!(check.status.code(), Some(0), "{}", stderr(&check));
}

#[test]
fn design_search_infeasible_exits_2() {
    let out = flowhand(&["design-search", "--q-ab", "50", "--q-bc", "40", "--q2", "10"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("ordering"), "{}", stderr(&out));
}

#[test]
fn design_search_json_report() {
    let out = flowhand(&["design-search", "--tune", "tube-height", "--json"]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["within_tolerance"], true);
    assert_eq!(v["knob"], "tube_height");
}

#[test]
fn sweep_values_and_empty_range() {
    let out = flowhand(&["sweep", "--param", "fcs.epsilon", "--values", "1.5,2.6"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    let lines: Vec<_> = text.lines().collect();
    assert_eq!(lines.len(), 3);
    let q_bc = |line: &str| line.split(',').nth(3).unwrap().to_string();
    assert_eq!(q_bc(lines[1]), "");
    assert!(!q_bc(lines[2]).is_empty());

    let out = flowhand(&["sweep", "--param", "venturi.h_t_mm", "--range", "100:10:5"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out).lines().count(), 1);
}

#[test]
fn sweep_unknown_param_exits_1() {
    let out = flowhand(&["sweep", "--param", "fcs.nope", "--values", "1"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn validate_reports_scenario_warnings() {
    let dir = tempfile::tempdir().unwrap();
    let sc = dir.path().join("s.json");
    fs::write(&sc, r#"{"name": "gap", "segments": [{"duration_s": 1, "q_src_lpm": 100}]}"#).unwrap();
    let out = flowhand(&["validate", "--scenario", path_str(&sc)]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stderr(&out).contains("warning"));
    assert!(stdout(&out).contains("1 warnings"));
}
