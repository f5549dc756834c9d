use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use flowhand_core::config::{self, ConfigFile, KNOWN_KEYS};
use flowhand_core::fcs;
use flowhand_core::scenario::run_scenario;
use flowhand_core::SystemConfig;
use serde_json::Value;

fn repo(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..").join(rel)
}

fn json_files(dir: &str) -> Vec<PathBuf> {
    let mut files: Vec<_> = fs::read_dir(repo(dir))
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    files.sort();
    assert!(!files.is_empty(), "no files in {dir}");
    files
}

fn documented_keys() -> BTreeSet<String> {
    let doc = fs::read_to_string(repo("docs/file-formats.md")).unwrap();
    doc.lines()
        .filter_map(|l| l.strip_prefix("| `"))
        .filter_map(|l| l.split_once('`').map(|(k, _)| k.to_string()))
        .filter(|k| k.contains('.') && !k.starts_with("segments") && !k.starts_with("scene"))
        .collect()
}

#[test]
fn docs_list_exactly_the_accepted_keys() {
    let known: BTreeSet<String> = KNOWN_KEYS.iter().map(|k| k.to_string()).collect();
    assert_eq!(documented_keys(), known);
}

#[test]
fn every_documented_key_is_accepted_alone() {
    let explicit = serde_json::to_value(ConfigFile::from_system(&SystemConfig::prototype_a())).unwrap();
    for key in documented_keys() {
        let (section, name) = key.split_once('.').unwrap();
        let value = match explicit[section].get(name) {
            Some(v) => v.clone(),
            // Only the alternative rotation-onset key is absent from the explicit form.
            None => Value::from(8.1),
        };
        let doc = serde_json::json!({ section: { name: value } });
        config::parse_config_value(doc).unwrap_or_else(|e| panic!("{key}: {e}"));
    }
}

#[test]
fn shipped_configs_load() {
    for path in json_files("configs") {
        config::load_config(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    }
}

#[test]
fn explicit_prototype_a_matches_builtin() {
    let file = config::load_config(&repo("configs/prototype_a.json")).unwrap();
    let t = file.thresholds(200.0, 1e-6);
    let b = SystemConfig::prototype_a().thresholds(200.0, 1e-6);
    for (x, y) in [(t.q_ab_lpm, b.q_ab_lpm), (t.q_bc_lpm, b.q_bc_lpm), (t.q_activation_lpm, b.q_activation_lpm)] {
        assert!((x.unwrap() - y.unwrap()).abs() < 1e-3);
    }
}

#[test]
fn short_lever_config_never_blocks() {
    let cfg = config::load_config(&repo("configs/prototype_c.json")).unwrap();
    let t = fcs::switch_thresholds(&cfg.fcs, &cfg.constants, cfg.controller.injection.lpm(), 1e-6);
    assert!(t.q_ab_lpm.is_some());
    assert!(t.q_bc_lpm.is_none());
}

#[test]
fn shipped_scenarios_run_without_warnings() {
    let cfg = SystemConfig::prototype_a();
    for path in json_files("scenarios") {
        let sc = config::load_scenario(&path).unwrap();
        let trace = run_scenario(&sc, &cfg).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        assert!(trace.warnings.is_empty(), "{}: {:?}", path.display(), trace.warnings);
        assert!(trace.records.len() > 100);
    }
}
