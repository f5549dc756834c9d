//! Design search: choose the free parameters of a hand so that the switching
//! and injection thresholds land on target flows.
//!
//! Geometry that is fixed by construction (split ratio, lever ratio, tube-1
//! blocking curve, inlet area) is taken from the base configuration. The
//! search sets
//!
//! * `s3` so that the tip force equals the blocking force at `q_bc`,
//! * `f_rot` so that the lever starts rotating at `q_ab`,
//! * `gamma` so that output tube 2 carries the target q₂ at `q_bc`,
//! * the orifice area (or the supply-tube height) so that the lubricant
//!   column clears the tube exactly at that q₂.
//!
//! Every tuned configuration is re-simulated by bisection and by a grid scan.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fcs;
use crate::system::{SystemConfig, SystemThresholds};
use crate::units::VolumetricFlow;
use crate::venturi::{self, ACTIVATION_CEILING_LPM};

/// Largest allowed gap between a target and its re-simulated threshold.
pub const DESIGN_TOLERANCE_LPM: f64 = 1.0;
const VERIFY_STEP_LPM: f64 = 0.01;
const VERIFY_TOL_LPM: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DesignTargets {
    pub q_ab_lpm: f64,
    pub q_bc_lpm: f64,
    pub q2_activation_lpm: f64,
}

impl DesignTargets {
    pub const PROTOTYPE_A: Self = Self {
        q_ab_lpm: 8.1,
        q_bc_lpm: 118.0,
        q2_activation_lpm: 44.0,
    };

    fn check(&self) -> Result<()> {
        for (name, v) in [
            ("q_ab", self.q_ab_lpm),
            ("q_bc", self.q_bc_lpm),
            ("q2_activation", self.q2_activation_lpm),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::infeasible(format!("target {name} must be > 0, got {v}")));
            }
        }
        if self.q_bc_lpm <= self.q_ab_lpm {
            return Err(Error::infeasible(format!(
                "ordering: q_bc ({}) must exceed q_ab ({})",
                self.q_bc_lpm, self.q_ab_lpm
            )));
        }
        if self.q_bc_lpm > ACTIVATION_CEILING_LPM {
            return Err(Error::infeasible(format!(
                "q_bc ({}) above the {ACTIVATION_CEILING_LPM} L/min search ceiling",
                self.q_bc_lpm
            )));
        }
        Ok(())
    }
}

/// Which injector dimension the search is allowed to change.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OrificeKnob {
    #[default]
    OrificeArea,
    TubeHeight,
}

/// Tunes `base` to `targets` without the verification scans.
pub fn calibrate(base: &SystemConfig, targets: &DesignTargets, knob: OrificeKnob) -> Result<SystemConfig> {
    targets.check()?;
    base.constants.validate()?;
    let mut cfg = base.clone();
    let consts = cfg.constants;
    let alpha = cfg.fcs.alpha;
    let q_bc = VolumetricFlow::from_lpm(targets.q_bc_lpm);
    let q_ab = VolumetricFlow::from_lpm(targets.q_ab_lpm);

    let (q1_bc, q3_bc) = fcs::split_flow(q_bc, alpha)?;
    let f_block_bc = fcs::blocking_force(q1_bc, &cfg.fcs.f_block_curve);
    if !(f_block_bc.si() > 0.0) {
        return Err(Error::infeasible("blocking force at q_bc must be > 0"));
    }
    cfg.fcs.s3 = fcs::calibrate_s3(cfg.fcs.epsilon, consts.rho_air, q3_bc, f_block_bc)?;
    // Equality sits on a rounding edge; the target flow itself must block.
    for _ in 0..64 {
        let (q1, q3) = fcs::split_flow(q_bc, alpha)?;
        let f1 = fcs::tube_tip_force(fcs::lever_force(q3, cfg.fcs.s3, consts.rho_air)?, cfg.fcs.epsilon);
        if fcs::check_blocking(f1, fcs::blocking_force(q1, &cfg.fcs.f_block_curve)) {
            break;
        }
        cfg.fcs.s3 = cfg.fcs.s3 * (1.0 - f64::EPSILON);
    }

    let (q1_ab, q3_ab) = fcs::split_flow(q_ab, alpha)?;
    let f1_ab = fcs::tube_tip_force(fcs::lever_force(q3_ab, cfg.fcs.s3, consts.rho_air)?, cfg.fcs.epsilon);
    if fcs::check_blocking(f1_ab, fcs::blocking_force(q1_ab, &cfg.fcs.f_block_curve)) {
        return Err(Error::infeasible(format!(
            "blocking: tip force already reaches the blocking force at q_ab = {} L/min",
            targets.q_ab_lpm
        )));
    }
    cfg.fcs.f_rot = fcs::calibrate_f_rot(q_ab, &cfg.fcs, &consts)?;

    let gamma = targets.q2_activation_lpm / q3_bc.lpm();
    if gamma > 1.0 {
        return Err(Error::infeasible(format!(
            "transmission: q2 target {} L/min exceeds the tube-3 flow {:.3} L/min at q_bc",
            targets.q2_activation_lpm,
            q3_bc.lpm()
        )));
    }
    cfg.fcs.gamma = gamma;

    let q2 = VolumetricFlow::from_lpm(targets.q2_activation_lpm);
    match knob {
        OrificeKnob::OrificeArea => {
            cfg.venturi.s_out = venturi::size_orifice(q2, q_bc, &cfg.venturi, &consts)?;
        }
        OrificeKnob::TubeHeight => {
            cfg.venturi.h_t = venturi::size_tube_height(q2, q_bc, &cfg.venturi, &consts)?;
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

#[derive(Debug, Clone, Serialize)]
pub struct DesignReport {
    pub targets: DesignTargets,
    pub knob: OrificeKnob,
    pub s3_mm2: f64,
    pub f_rot_n: f64,
    pub gamma: f64,
    pub s_out_mm2: f64,
    pub h_t_mm: f64,
    /// Thresholds of the tuned hand by bisection.
    pub bisection: SystemThresholds,
    /// The same thresholds by a 0.01 L/min grid scan.
    pub scan: SystemThresholds,
    /// Largest |simulated − target| over both routes and all three targets.
    pub max_error_lpm: f64,
    pub within_tolerance: bool,
    #[serde(skip)]
    pub config: SystemConfig,
}

pub fn design_search(base: &SystemConfig, targets: &DesignTargets, knob: OrificeKnob) -> Result<DesignReport> {
    let cfg = calibrate(base, targets, knob)?;
    let bisection = cfg.thresholds(ACTIVATION_CEILING_LPM, VERIFY_TOL_LPM);
    let scan = cfg.thresholds_scan(ACTIVATION_CEILING_LPM, VERIFY_STEP_LPM);

    let err = |got: Option<f64>, want: f64| got.map_or(f64::INFINITY, |g| (g - want).abs());
    let max_error_lpm = [bisection, scan]
        .iter()
        .flat_map(|t| {
            [
                err(t.q_ab_lpm, targets.q_ab_lpm),
                err(t.q_bc_lpm, targets.q_bc_lpm),
                err(t.q_activation_lpm, targets.q_bc_lpm),
                err(t.q2_activation_lpm, targets.q2_activation_lpm),
            ]
        })
        .fold(0.0, f64::max);

    Ok(DesignReport {
        targets: *targets,
        knob,
        s3_mm2: cfg.fcs.s3.mm2(),
        f_rot_n: cfg.fcs.f_rot.si(),
        gamma: cfg.fcs.gamma,
        s_out_mm2: cfg.venturi.s_out.mm2(),
        h_t_mm: cfg.venturi.h_t.mm(),
        bisection,
        scan,
        max_error_lpm,
        within_tolerance: max_error_lpm <= DESIGN_TOLERANCE_LPM,
        config: cfg,
    })
}
