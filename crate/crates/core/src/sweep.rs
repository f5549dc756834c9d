//! One-parameter sweeps: each value yields a tuned-or-overridden hand, its
//! switching thresholds and a summary of one scenario run.

use rayon::prelude::*;
use serde_json::Value;

use crate::config::{parse_config_value, set_param, KNOWN_KEYS};
use crate::error::{Error, Result};
use crate::fcs::{self, FcsState};
use crate::scenario::{fmt_sig, run_scenario, Scenario};
use crate::venturi;

pub const SWEEP_HEADER: [&str; 11] = [
    "param",
    "value",
    "q_ab_lpm",
    "q_bc_lpm",
    "q_activation_lpm",
    "q2_activation_lpm",
    "final_state",
    "max_q1_lpm",
    "max_q2_lpm",
    "injection_steps",
    "max_p_f_kpa",
];

/// Resolution of the threshold columns.
pub const SWEEP_RESOLUTION_LPM: f64 = 0.01;

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub value: f64,
    /// Lever transitions, searched up to the source maximum.
    pub q_ab_lpm: Option<f64>,
    pub q_bc_lpm: Option<f64>,
    pub q_activation_lpm: Option<f64>,
    pub q2_activation_lpm: Option<f64>,
    pub final_state: FcsState,
    pub max_q1_lpm: f64,
    pub max_q2_lpm: f64,
    pub injection_steps: usize,
    pub max_p_f_kpa: f64,
}

fn evaluate(base: &Value, path: &str, value: f64, scenario: &Scenario) -> Result<SweepRow> {
    let mut doc = base.clone();
    set_param(&mut doc, path, value)?;
    let cfg = parse_config_value(doc)?;
    let sw = fcs::switch_thresholds(&cfg.fcs, &cfg.constants, cfg.controller.injection.lpm(), SWEEP_RESOLUTION_LPM);
    let act = venturi::activation_threshold(&cfg.venturi, &cfg.fcs, &cfg.constants).ok();
    let q2_act = act.map(|q| fcs::steady_outputs(q, &cfg.fcs, &cfg.constants).q2.lpm());
    let trace = run_scenario(scenario, &cfg)?;
    let max = |f: &dyn Fn(&crate::scenario::TraceRecord) -> f64| trace.records.iter().map(f).fold(0.0, f64::max);
    Ok(SweepRow {
        value,
        q_ab_lpm: sw.q_ab_lpm,
        q_bc_lpm: sw.q_bc_lpm,
        q_activation_lpm: act.map(|q| q.lpm()),
        q2_activation_lpm: q2_act,
        final_state: trace.records.last().map_or(FcsState::A, |r| r.state),
        max_q1_lpm: max(&|r| r.q1.lpm()),
        max_q2_lpm: max(&|r| r.q2.lpm()),
        injection_steps: trace.records.iter().filter(|r| r.injection).count(),
        max_p_f_kpa: max(&|r| r.p_f.kpa()),
    })
}

/// Runs `scenario` once per value of `path`, in input order.
pub fn sweep(base: &Value, path: &str, values: &[f64], scenario: &Scenario) -> Result<Vec<SweepRow>> {
    if !KNOWN_KEYS.contains(&path) {
        return Err(Error::UnknownParam(path.to_string()));
    }
    values
        .par_iter()
        .map(|&v| evaluate(base, path, v, scenario))
        .collect()
}

pub fn sweep_csv(path: &str, rows: &[SweepRow]) -> Result<String> {
    let opt = |x: Option<f64>| x.map(fmt_sig).unwrap_or_default();
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(SWEEP_HEADER)?;
    for r in rows {
        w.write_record([
            path.to_string(),
            fmt_sig(r.value),
            opt(r.q_ab_lpm),
            opt(r.q_bc_lpm),
            opt(r.q_activation_lpm),
            opt(r.q2_activation_lpm),
            r.final_state.to_string(),
            fmt_sig(r.max_q1_lpm),
            fmt_sig(r.max_q2_lpm),
            r.injection_steps.to_string(),
            fmt_sig(r.max_p_f_kpa),
        ])?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("ascii"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::system::SystemConfig;
    use serde_json::json;

    fn ramp() -> Scenario {
        Scenario::ramp_to_injection(&SystemConfig::prototype_a())
    }

    #[test]
    fn epsilon_sweep_blocks_only_with_long_lever() {
        let rows = sweep(&json!({}), "fcs.epsilon", &[1.5, 2.6], &ramp()).unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0].value, 1.5);
        assert!(rows[0].q_bc_lpm.is_none());
        assert_eq!(rows[0].final_state, FcsState::B);
        let q_bc = rows[1].q_bc_lpm.unwrap();
        assert!((q_bc - 118.0).abs() <= 0.02, "{q_bc}");
        assert_eq!(rows[1].final_state, FcsState::C);
    }

    #[test]
    fn empty_range_gives_header_only() {
        let rows = sweep(&json!({}), "fcs.epsilon", &[], &ramp()).unwrap();
        let csv = sweep_csv("fcs.epsilon", &rows).unwrap();
        assert_eq!(csv, SWEEP_HEADER.join(",") + "\n");
    }

    #[test]
    fn unknown_path_rejected() {
        assert_eq!(
            sweep(&json!({}), "fcs.lever", &[1.0], &ramp()).unwrap_err(),
            Error::UnknownParam("fcs.lever".into())
        );
    }

    #[test]
    fn activation_rises_with_tube_height() {
        let rows = sweep(&json!({}), "venturi.h_t_mm", &[10.0, 55.0, 100.0], &ramp()).unwrap();
        let acts: Vec<f64> = rows.iter().map(|r| r.q_activation_lpm.unwrap()).collect();
        assert!(acts[0] < acts[1] && acts[1] < acts[2], "{acts:?}");
        // Grid-scan oracle from the injector module.
        for (row, h) in rows.iter().zip([10.0, 55.0, 100.0]) {
            let mut doc = json!({});
            set_param(&mut doc, "venturi.h_t_mm", h).unwrap();
            let cfg = parse_config_value(doc).unwrap();
            let scan = venturi::activation_threshold_scan(&cfg.venturi, &cfg.fcs, &cfg.constants).unwrap();
            assert!((scan.lpm() - row.q_activation_lpm.unwrap()).abs() <= 0.01 + 1e-9);
        }
    }

    #[test]
    fn sweep_output_is_deterministic() {
        let a = sweep_csv("fcs.alpha", &sweep(&json!({}), "fcs.alpha", &[0.9, 0.95, 0.98], &ramp()).unwrap()).unwrap();
        let b = sweep_csv("fcs.alpha", &sweep(&json!({}), "fcs.alpha", &[0.9, 0.95, 0.98], &ramp()).unwrap()).unwrap();
        assert_eq!(a, b);
    }
}
