//! Pneumatic soft finger: flow to chamber pressure, bending, tip force and
//! the posture seen by the side marks.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::curve::PiecewiseLinearCurve;
use crate::error::{Error, Result};
use crate::units::{Force, Length, Pressure, VolumetricFlow};

/// Chamber pressure (kPa) reached at 50 L/min.
pub const ANCHOR_PRESSURE_KPA: f64 = 32.3;
pub const ANCHOR_FLOW_LPM: f64 = 50.0;
/// Tip force (N) at the anchor pressure.
pub const ANCHOR_TIP_FORCE_N: f64 = 0.38;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FingerConfig {
    /// Arc length of the bending section.
    pub finger_length: Length,
    /// q_src (L/min) to chamber pressure (kPa).
    pub pressure_map: PiecewiseLinearCurve,
    /// Curvature per kPa, 1/(m·kPa).
    pub curvature_gain: f64,
    /// N per kPa.
    pub tipforce_gain: f64,
    pub p_max: Pressure,
    pub n_marks: usize,
}

impl Default for FingerConfig {
    fn default() -> Self {
        let finger_length = Length::from_si(0.08);
        Self {
            finger_length,
            pressure_map: PiecewiseLinearCurve::new(vec![(0.0, 0.0), (ANCHOR_FLOW_LPM, ANCHOR_PRESSURE_KPA)])
                .expect("static knots"),
            curvature_gain: Self::half_turn_gain(finger_length),
            tipforce_gain: ANCHOR_TIP_FORCE_N / ANCHOR_PRESSURE_KPA,
            p_max: Pressure::from_kpa(35.0),
            n_marks: 8,
        }
    }
}

impl FingerConfig {
    /// Gain that bends a finger of `length` through half a turn at the
    /// anchor pressure.
    pub fn half_turn_gain(length: Length) -> f64 {
        PI / (length.si() * ANCHOR_PRESSURE_KPA)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.finger_length.si() > 0.0) {
            return Err(Error::invalid("finger_length", "must be > 0"));
        }
        if self.pressure_map.eval(0.0) != 0.0 {
            return Err(Error::invalid("pressure_map", "must map 0 L/min to 0 kPa"));
        }
        if !self.pressure_map.is_non_decreasing() {
            return Err(Error::invalid("pressure_map", "must be non-decreasing"));
        }
        if !(self.curvature_gain >= 0.0 && self.tipforce_gain >= 0.0) {
            return Err(Error::invalid("finger gains", "must be >= 0"));
        }
        if !(self.p_max.si() > 0.0) {
            return Err(Error::invalid("p_max", "must be > 0"));
        }
        if self.n_marks < 2 {
            return Err(Error::invalid("n_marks", "need at least 2 marks"));
        }
        Ok(())
    }
}

/// Steady chamber pressure for an unblocked source flow, clamped to `p_max`.
///
/// The sealed-chamber hold in the blocked state is applied by the scenario
/// runner, which knows the history.
pub fn chamber_pressure(q_src: VolumetricFlow, cfg: &FingerConfig) -> Pressure {
    let kpa = cfg.pressure_map.eval(q_src.lpm()).max(0.0);
    Pressure::from_kpa(kpa).min(cfg.p_max)
}

fn check_pressure(p_f: Pressure, cfg: &FingerConfig) -> Result<()> {
    if p_f.si() < 0.0 {
        return Err(Error::invalid("p_f", "must be >= 0"));
    }
    if p_f > cfg.p_max {
        return Err(Error::invalid("p_f", format!("{p_f} exceeds p_max {}", cfg.p_max)));
    }
    Ok(())
}

/// Curvature (1/m) at chamber pressure `p_f`.
pub fn curvature(p_f: Pressure, cfg: &FingerConfig) -> Result<f64> {
    check_pressure(p_f, cfg)?;
    Ok(cfg.curvature_gain * p_f.kpa())
}

/// Bending radius; infinite for a straight finger.
pub fn bending_radius(p_f: Pressure, cfg: &FingerConfig) -> Result<Length> {
    let k = curvature(p_f, cfg)?;
    Ok(Length::from_si(if k > 0.0 { 1.0 / k } else { f64::INFINITY }))
}

pub fn tip_force(p_f: Pressure, cfg: &FingerConfig) -> Result<Force> {
    check_pressure(p_f, cfg)?;
    Ok(Force::from_si(cfg.tipforce_gain * p_f.kpa()))
}

/// Planar point in the finger base frame, metres. `x` runs along the
/// unbent finger axis, `y` toward the bending side.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mark {
    pub x: f64,
    pub y: f64,
}

impl Mark {
    pub fn distance(self, other: Mark) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FingerPose {
    pub marks: Vec<Mark>,
    pub p_f: Pressure,
    pub r: Length,
}

/// Constant-curvature posture with marks equally spaced along the arc, the
/// first at the base.
pub fn posture(p_f: Pressure, cfg: &FingerConfig) -> Result<FingerPose> {
    let k = curvature(p_f, cfg)?;
    let length = cfg.finger_length.si();
    let n = cfg.n_marks;
    let marks = (0..n)
        .map(|i| {
            let s = length * i as f64 / (n - 1) as f64;
            if k == 0.0 {
                Mark { x: s, y: 0.0 }
            } else {
                let half = 0.5 * k * s;
                Mark {
                    x: (k * s).sin() / k,
                    y: 2.0 * half.sin() * half.sin() / k,
                }
            }
        })
        .collect();
    Ok(FingerPose {
        marks,
        p_f,
        r: bending_radius(p_f, cfg)?,
    })
}

/// Mean Euclidean displacement of corresponding marks.
pub fn mean_displacement(before: &FingerPose, after: &FingerPose) -> Result<Length> {
    let (nb, na) = (before.marks.len(), after.marks.len());
    if nb != na || nb == 0 {
        return Err(Error::MarkCountMismatch { before: nb, after: na });
    }
    let total: f64 = before
        .marks
        .iter()
        .zip(&after.marks)
        .map(|(b, a)| b.distance(*a))
        .sum();
    Ok(Length::from_si(total / nb as f64))
}
