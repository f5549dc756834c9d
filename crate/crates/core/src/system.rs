//! The assembled hand: lever mechanism, injector, finger and task model
//! sharing one set of constants.

use serde::Serialize;

use crate::design::{self, DesignTargets, OrificeKnob};
use crate::error::Result;
use crate::fcs::{self, FcsConfig, FcsOutputs};
use crate::finger::FingerConfig;
use crate::hand::HandConfig;
use crate::search;
use crate::units::{Area, Force, Length, PhysConstants, VolumetricFlow};
use crate::venturi::{self, InjectorState, VenturiConfig};

/// Source-flow command limits of the airflow controller.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ControllerLimits {
    /// Top of the finger-motion range.
    pub motion_max: VolumetricFlow,
    /// Fully opened valve; also the largest flow the source can deliver.
    pub injection: VolumetricFlow,
}

impl Default for ControllerLimits {
    fn default() -> Self {
        Self {
            motion_max: VolumetricFlow::from_lpm(50.0),
            injection: VolumetricFlow::from_lpm(150.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SystemConfig {
    pub constants: PhysConstants,
    pub fcs: FcsConfig,
    pub venturi: VenturiConfig,
    pub finger: FingerConfig,
    pub hand: HandConfig,
    pub controller: ControllerLimits,
    /// Height above the table at which a held object is let go.
    pub release_height: Length,
}

impl Default for SystemConfig {
    fn default() -> Self {
        Self::prototype_a()
    }
}

impl SystemConfig {
    /// Prototype A hardware before any tuning: tabulated geometry, s₃ from
    /// the tabulated tip force, a placeholder orifice.
    pub fn prototype_a_geometry() -> Self {
        let constants = PhysConstants::default();
        let alpha = 116.0 / 118.0;
        let epsilon = 2.6;
        let s3 = fcs::calibrate_s3(epsilon, constants.rho_air, VolumetricFlow::from_lpm(116.0), Force::from_si(1.01))
            .expect("positive inputs");
        let mut fcs_cfg = FcsConfig {
            alpha,
            epsilon,
            s3,
            exhaust_port_area: Area::from_mm2(7.1),
            f_rot: Force::ZERO,
            f_block_curve: fcs::table_f_block_curve(),
            gamma: 44.0 / 116.0,
        };
        fcs_cfg.f_rot =
            fcs::calibrate_f_rot(VolumetricFlow::from_lpm(8.1), &fcs_cfg, &constants).expect("positive q_ab");
        Self {
            constants,
            fcs: fcs_cfg,
            venturi: VenturiConfig {
                s_in: Area::from_mm2(20.0),
                s_out: Area::from_mm2(16.0),
                s_t: Area::from_mm2(0.785),
                h_t: Length::from_mm(55.0),
                s_src: Area::from_mm2(20.0),
                s_e: Area::from_mm2(7.1),
                p_src: constants.p_atm,
                use_simplified_inlet: true,
                discharge_coefficient: 1.0,
            },
            finger: FingerConfig::default(),
            hand: HandConfig::default(),
            controller: ControllerLimits::default(),
            release_height: Length::from_mm(5.0),
        }
    }

    /// Prototype A tuned to switch at 8.1 and 118 L/min and to inject from
    /// q₂ = 44 L/min.
    pub fn prototype_a() -> Self {
        design::calibrate(&Self::prototype_a_geometry(), &DesignTargets::PROTOTYPE_A, OrificeKnob::OrificeArea)
            .expect("prototype A targets are feasible")
    }

    pub fn validate(&self) -> Result<()> {
        self.constants.validate()?;
        self.fcs.validate()?;
        self.venturi.validate()?;
        self.finger.validate()?;
        self.hand.validate()?;
        if !(self.release_height.si() >= 0.0) {
            return Err(crate::Error::invalid("release_height", "must be >= 0"));
        }
        Ok(())
    }

    pub fn evaluate(&self, q_src: VolumetricFlow) -> Result<Snapshot> {
        let flows = fcs::steady_outputs(q_src, &self.fcs, &self.constants);
        let injector = venturi::injector_state(q_src, flows.q2, &self.venturi, &self.constants)?;
        Ok(Snapshot { flows, injector })
    }

    pub fn injection_active(&self, q_src: VolumetricFlow) -> bool {
        venturi::active_at(q_src, &self.venturi, &self.fcs, &self.constants)
    }

    /// Transition and activation flows by bisection.
    pub fn thresholds(&self, ceiling_lpm: f64, tol_lpm: f64) -> SystemThresholds {
        let sw = fcs::switch_thresholds(&self.fcs, &self.constants, ceiling_lpm, tol_lpm);
        let act = search::first_true_bisect(0.0, ceiling_lpm, tol_lpm, |lpm| {
            self.injection_active(VolumetricFlow::from_lpm(lpm))
        });
        self.assemble(sw, act)
    }

    /// Transition and activation flows by brute-force grid scan.
    pub fn thresholds_scan(&self, ceiling_lpm: f64, step_lpm: f64) -> SystemThresholds {
        let sw = fcs::switch_thresholds_scan(&self.fcs, &self.constants, ceiling_lpm, step_lpm);
        let act = search::first_true_scan(0.0, ceiling_lpm, step_lpm, |lpm| {
            self.injection_active(VolumetricFlow::from_lpm(lpm))
        });
        self.assemble(sw, act)
    }

    fn assemble(&self, sw: fcs::SwitchThresholds, act: Option<f64>) -> SystemThresholds {
        SystemThresholds {
            q_ab_lpm: sw.q_ab_lpm,
            q_bc_lpm: sw.q_bc_lpm,
            q_activation_lpm: act,
            q2_activation_lpm: act.map(|lpm| {
                fcs::steady_outputs(VolumetricFlow::from_lpm(lpm), &self.fcs, &self.constants)
                    .q2
                    .lpm()
            }),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Snapshot {
    pub flows: FcsOutputs,
    pub injector: InjectorState,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SystemThresholds {
    pub q_ab_lpm: Option<f64>,
    pub q_bc_lpm: Option<f64>,
    pub q_activation_lpm: Option<f64>,
    /// Injection-line flow at the activation point.
    pub q2_activation_lpm: Option<f64>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prototype_a_validates() {
        SystemConfig::prototype_a_geometry().validate().unwrap();
        SystemConfig::prototype_a().validate().unwrap();
    }

    #[test]
    fn prototype_a_thresholds() {
        let cfg = SystemConfig::prototype_a();
        let t = cfg.thresholds(200.0, 1e-6);
        assert!((t.q_ab_lpm.unwrap() - 8.1).abs() < 1e-3);
        assert!((t.q_bc_lpm.unwrap() - 118.0).abs() < 1e-3);
        assert!((t.q_activation_lpm.unwrap() - 118.0).abs() < 1e-3);
        assert!((t.q2_activation_lpm.unwrap() - 44.0).abs() < 1e-3);
    }

    #[test]
    fn evaluate_composes_modules() {
        let cfg = SystemConfig::prototype_a();
        let snap = cfg.evaluate(VolumetricFlow::from_lpm(150.0)).unwrap();
        assert_eq!(snap.flows.state, fcs::FcsState::C);
        assert!(snap.injector.active);
        let snap = cfg.evaluate(VolumetricFlow::from_lpm(50.0)).unwrap();
        assert_eq!(snap.flows.state, fcs::FcsState::B);
        assert!(!snap.injector.active);
    }
}
