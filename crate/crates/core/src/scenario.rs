//! Time-stepped scenarios over the quasi-static model.
//!
//! Every step is an independent steady-state evaluation of the commanded
//! source flow. The only memory carried between steps is the sealed finger
//! chamber in state C and the lubrication state of the current grasp
//! episode, so the timestep changes trace density but not values.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fcs::{self, FcsState};
use crate::finger;
use crate::hand::{self, FrictionState, GraspEpisode, GraspScene, PlacementOutcome, SlipOutcome};
use crate::system::SystemConfig;
use crate::units::{Force, Length, Mass, Pressure, VolumetricFlow};
use crate::venturi::ACTIVATION_CEILING_LPM;

pub const DEFAULT_TIMESTEP_S: f64 = 0.01;

pub const CSV_HEADER: [&str; 11] = [
    "t",
    "q_src_lpm",
    "q1_lpm",
    "q2_lpm",
    "q_exhaust_lpm",
    "state",
    "p_f_kpa",
    "r_mm",
    "f_tip_n",
    "injection",
    "friction",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TaskEvent {
    Grasp,
    Lift,
    Place,
    Pivot,
    Release,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Segment {
    pub duration_s: f64,
    /// Command at the start of the segment.
    pub q_src_lpm: f64,
    /// Command at the end; the segment ramps linearly when set.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q_src_end_lpm: Option<f64>,
    /// Fired at the first step of the segment.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub event: Option<TaskEvent>,
}

impl Segment {
    pub fn hold(duration_s: f64, q_src_lpm: f64) -> Self {
        Self {
            duration_s,
            q_src_lpm,
            q_src_end_lpm: None,
            event: None,
        }
    }

    pub fn ramp(duration_s: f64, from_lpm: f64, to_lpm: f64) -> Self {
        Self {
            q_src_end_lpm: Some(to_lpm),
            ..Self::hold(duration_s, from_lpm)
        }
    }

    pub fn with_event(mut self, event: TaskEvent) -> Self {
        self.event = Some(event);
        self
    }

    fn end_lpm(&self) -> f64 {
        self.q_src_end_lpm.unwrap_or(self.q_src_lpm)
    }

    fn at(&self, local_t: f64) -> f64 {
        match self.q_src_end_lpm {
            None => self.q_src_lpm,
            Some(end) => {
                let frac = (local_t / self.duration_s).clamp(0.0, 1.0);
                self.q_src_lpm + (end - self.q_src_lpm) * frac
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneSpec {
    pub object_width_mm: f64,
    pub object_mass_kg: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    #[serde(default = "default_timestep")]
    pub timestep_s: f64,
    pub segments: Vec<Segment>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scene: Option<SceneSpec>,
}

fn default_timestep() -> f64 {
    DEFAULT_TIMESTEP_S
}

impl Scenario {
    pub fn new(name: impl Into<String>, segments: Vec<Segment>) -> Self {
        Self {
            name: name.into(),
            timestep_s: DEFAULT_TIMESTEP_S,
            segments,
            scene: None,
        }
    }

    /// Source ramp from zero to the fully opened valve.
    pub fn ramp_to_injection(cfg: &SystemConfig) -> Self {
        let top = cfg.controller.injection.lpm();
        Self::new("ramp", vec![Segment::ramp(top / 10.0, 0.0, top)])
    }

    /// Holds each motion set-point, then opens the valve fully.
    pub fn hold_then_inject(set_point_lpm: f64, injection_lpm: f64) -> Self {
        Self::new(
            format!("hold-{set_point_lpm}-inject"),
            vec![Segment::hold(2.0, set_point_lpm), Segment::hold(2.0, injection_lpm)],
        )
    }

    pub fn duration(&self) -> f64 {
        self.segments.iter().map(|s| s.duration_s).sum()
    }

    /// Checks the scenario and returns controller-range warnings.
    pub fn validate(&self, cfg: &SystemConfig) -> Result<Vec<String>> {
        let bad = |path: String, message: &str| Error::Config {
            path,
            message: message.to_string(),
        };
        if !(self.timestep_s > 0.0 && self.timestep_s.is_finite()) {
            return Err(bad("timestep_s".into(), "must be > 0"));
        }
        if self.segments.is_empty() {
            return Err(bad("segments".into(), "at least one segment is required"));
        }
        let motion = cfg.controller.motion_max.lpm();
        let full = cfg.controller.injection.lpm();
        let mut warnings = Vec::new();
        for (i, seg) in self.segments.iter().enumerate() {
            if !(seg.duration_s > 0.0 && seg.duration_s.is_finite()) {
                return Err(bad(format!("segments[{i}].duration_s"), "must be > 0"));
            }
            for (key, q) in [("q_src_lpm", Some(seg.q_src_lpm)), ("q_src_end_lpm", seg.q_src_end_lpm)] {
                let Some(q) = q else { continue };
                if !(q >= 0.0 && q.is_finite()) {
                    return Err(bad(format!("segments[{i}].{key}"), "must be a finite flow >= 0"));
                }
                // Ramps pass through the gap on their way to the full-open command.
                if seg.q_src_end_lpm.is_none() && q > motion && q != full {
                    warnings.push(format!(
                        "segments[{i}].{key} = {q} L/min lies outside the motion range 0-{motion} and is not the injection command {full}"
                    ));
                }
                if q > full {
                    warnings.push(format!("segments[{i}].{key} = {q} L/min exceeds the source maximum {full}"));
                }
            }
            if matches!(seg.event, Some(TaskEvent::Grasp | TaskEvent::Lift | TaskEvent::Place)) && self.scene.is_none() {
                return Err(bad(format!("segments[{i}].event"), "task events need a `scene`"));
            }
        }
        if let Some(scene) = &self.scene {
            if !(scene.object_width_mm > 0.0) {
                return Err(bad("scene.object_width_mm".into(), "must be > 0"));
            }
            if !(scene.object_mass_kg >= 0.0) {
                return Err(bad("scene.object_mass_kg".into(), "must be >= 0"));
            }
        }
        Ok(warnings)
    }

    fn starts(&self) -> Vec<f64> {
        self.segments
            .iter()
            .scan(0.0, |acc, s| {
                let start = *acc;
                *acc += s.duration_s;
                Some(start)
            })
            .collect()
    }

    /// Command at `t`, right-continuous at segment boundaries.
    fn command(&self, starts: &[f64], t: f64) -> f64 {
        let i = starts.partition_point(|&s| s <= t).saturating_sub(1);
        let seg = &self.segments[i];
        if t >= starts[i] + seg.duration_s {
            return seg.end_lpm();
        }
        seg.at(t - starts[i])
    }

    /// Left limit of the command at `t`; the system is at rest before 0.
    fn command_left(&self, starts: &[f64], t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        let i = starts.partition_point(|&s| s < t).saturating_sub(1);
        self.segments[i].at(t - starts[i])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "task", rename_all = "snake_case")]
pub enum TaskOutcome {
    Grasped,
    GraspFailed,
    Lifted,
    Slipped,
    Placed(PlacementOutcome),
    Pivoted,
    PivotFailed,
    Released,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceRecord {
    pub t: f64,
    pub q_src: VolumetricFlow,
    pub q1: VolumetricFlow,
    pub q2: VolumetricFlow,
    pub q_exhaust: VolumetricFlow,
    pub state: FcsState,
    pub p_f: Pressure,
    /// Infinite while the finger is straight.
    pub r: Length,
    pub f_tip: Force,
    pub injection: bool,
    pub friction: FrictionState,
    pub outcome: Option<TaskOutcome>,
}

impl TraceRecord {
    fn check_finite(&self) -> Result<()> {
        let fields = [
            ("q_src", self.q_src.si()),
            ("q1", self.q1.si()),
            ("q2", self.q2.si()),
            ("q_exhaust", self.q_exhaust.si()),
            ("p_f", self.p_f.si()),
            ("f_tip", self.f_tip.si()),
        ];
        for (field, v) in fields {
            if !v.is_finite() {
                return Err(Error::NonFinite { field, t: self.t });
            }
        }
        if self.r.si().is_nan() {
            return Err(Error::NonFinite { field: "r", t: self.t });
        }
        Ok(())
    }

    fn csv_fields(&self) -> [String; 11] {
        [
            fmt_sig(self.t),
            fmt_sig(self.q_src.lpm()),
            fmt_sig(self.q1.lpm()),
            fmt_sig(self.q2.lpm()),
            fmt_sig(self.q_exhaust.lpm()),
            self.state.to_string(),
            fmt_sig(self.p_f.kpa()),
            fmt_sig(self.r.mm()),
            fmt_sig(self.f_tip.si()),
            if self.injection { "1" } else { "0" }.to_string(),
            self.friction.to_string(),
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimTrace {
    pub scenario: String,
    pub records: Vec<TraceRecord>,
    pub warnings: Vec<String>,
}

impl SimTrace {
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(CSV_HEADER)?;
        for r in &self.records {
            w.write_record(r.csv_fields())?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(String::from_utf8(buf).expect("csv output is ascii"))
    }

    pub fn outcomes(&self) -> impl Iterator<Item = (f64, TaskOutcome)> + '_ {
        self.records.iter().filter_map(|r| r.outcome.map(|o| (r.t, o)))
    }

    /// Last record at or before `t`.
    pub fn at(&self, t: f64) -> Option<&TraceRecord> {
        self.records.iter().take_while(|r| r.t <= t + 1e-9).last()
    }
}

/// `%g`-style formatting with six significant digits.
pub fn fmt_sig(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf" } else { "-inf" }.into();
    }
    if x == 0.0 {
        return "0".into();
    }
    let exp = x.abs().log10().floor() as i32;
    if (-5..6).contains(&exp) {
        let decimals = (5 - exp).max(0) as usize;
        trim_zeros(format!("{x:.decimals$}"))
    } else {
        let s = format!("{x:.5e}");
        let (mantissa, e) = s.split_once('e').expect("exponent present");
        format!("{}e{e}", trim_zeros(mantissa.to_string()))
    }
}

fn trim_zeros(s: String) -> String {
    if !s.contains('.') {
        return s;
    }
    let t = s.trim_end_matches('0').trim_end_matches('.');
    if t == "-0" {
        "0".into()
    } else {
        t.to_string()
    }
}

struct Runner<'a> {
    cfg: &'a SystemConfig,
    scene: Option<SceneSpec>,
    latch_cap: Pressure,
    latched: Option<Pressure>,
    episode: GraspEpisode,
    holding: bool,
}

impl Runner<'_> {
    fn chamber(&mut self, state: FcsState, q_now: f64, q_left: f64) -> Pressure {
        if state != FcsState::C {
            self.latched = None;
            return finger::chamber_pressure(VolumetricFlow::from_lpm(q_now), &self.cfg.finger);
        }
        // Tube 1 pinches shut at the switching flow at the latest, so the
        // sealed pressure never exceeds the value reached there.
        *self.latched.get_or_insert_with(|| {
            finger::chamber_pressure(VolumetricFlow::from_lpm(q_left), &self.cfg.finger).min(self.latch_cap)
        })
    }

    fn grasp_scene(&self) -> GraspScene {
        let s = self.scene.expect("validated: events that need a scene have one");
        GraspScene {
            object_width: Length::from_mm(s.object_width_mm),
            object_mass: Mass::from_si(s.object_mass_kg),
            friction_state: self.episode.state(),
        }
    }

    fn fire(&mut self, event: TaskEvent, tip: Force) -> TaskOutcome {
        let hand = &self.cfg.hand;
        let g = self.cfg.constants.g;
        match event {
            TaskEvent::Grasp => {
                self.holding = hand::can_grasp(&self.grasp_scene(), hand, tip, g);
                if self.holding {
                    TaskOutcome::Grasped
                } else {
                    TaskOutcome::GraspFailed
                }
            }
            TaskEvent::Lift => {
                let held = self.holding && hand::placement_slip(&self.grasp_scene(), hand, tip, g) == SlipOutcome::HeldFixed;
                self.holding = held;
                if held {
                    TaskOutcome::Lifted
                } else {
                    TaskOutcome::Slipped
                }
            }
            TaskEvent::Place => {
                let out = hand::place_object(&self.grasp_scene(), hand, tip, g, self.cfg.release_height);
                self.holding = false;
                TaskOutcome::Placed(out)
            }
            TaskEvent::Pivot => {
                if hand::pivot_feasible(hand.mu(self.episode.state()), hand) {
                    TaskOutcome::Pivoted
                } else {
                    TaskOutcome::PivotFailed
                }
            }
            TaskEvent::Release => {
                self.episode.release();
                self.holding = false;
                TaskOutcome::Released
            }
        }
    }
}

/// `k·dt` snapped to whole nanoseconds, so traces with different
/// timesteps share bit-identical timestamps.
fn sample_time(k: usize, dt: f64) -> f64 {
    (k as f64 * dt * 1e9).round() / 1e9
}

pub fn run_scenario(scenario: &Scenario, cfg: &SystemConfig) -> Result<SimTrace> {
    cfg.validate()?;
    let warnings = scenario.validate(cfg)?;
    for w in &warnings {
        log::warn!("{}: {w}", scenario.name);
    }

    let latch_cap = fcs::switch_thresholds(&cfg.fcs, &cfg.constants, ACTIVATION_CEILING_LPM, 1e-9)
        .q_bc_lpm
        .map_or(cfg.finger.p_max, |q| {
            finger::chamber_pressure(VolumetricFlow::from_lpm(q), &cfg.finger)
        });
    let mut runner = Runner {
        cfg,
        scene: scenario.scene,
        latch_cap,
        latched: None,
        episode: GraspEpisode::new(),
        holding: false,
    };

    let starts = scenario.starts();
    let total = scenario.duration();
    let dt = scenario.timestep_s;
    let steps = (total / dt + 1e-9).floor() as usize;
    let mut next_event = 0;
    let mut records = Vec::with_capacity(steps + 1);

    for k in 0..=steps {
        let t = sample_time(k, dt);
        let q_now = scenario.command(&starts, t);
        let q_left = scenario.command_left(&starts, t);
        let snap = cfg.evaluate(VolumetricFlow::from_lpm(q_now))?;
        let state = snap.flows.state;
        let p_f = runner.chamber(state, q_now, q_left);
        let r = finger::bending_radius(p_f, &cfg.finger)?;
        let f_tip = finger::tip_force(p_f, &cfg.finger)?;
        let injection = snap.injector.active;
        runner.episode.record_injection(injection);

        let mut outcome = None;
        while next_event < starts.len() && starts[next_event] <= t + 1e-9 {
            if let Some(ev) = scenario.segments[next_event].event {
                outcome = Some(runner.fire(ev, f_tip));
            }
            next_event += 1;
        }

        let rec = TraceRecord {
            t,
            q_src: VolumetricFlow::from_lpm(q_now),
            q1: snap.flows.q1,
            q2: snap.flows.q2,
            q_exhaust: snap.flows.q_exhaust,
            state,
            p_f,
            r,
            f_tip,
            injection,
            friction: runner.episode.state(),
            outcome,
        };
        rec.check_finite()?;
        records.push(rec);
    }

    Ok(SimTrace {
        scenario: scenario.name.clone(),
        records,
        warnings,
    })
}
