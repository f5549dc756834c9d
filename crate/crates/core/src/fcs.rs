//! Flow-channel-switching lever mechanism.
//!
//! The source flow splits between output tube 1 (finger line) and tube 3,
//! whose jet pushes a lever. The lever tip pinches tube 1 shut once its force
//! reaches the blocking force of that tube, diverting the flow to output tube
//! 2 (injection line).
//!
//! Three quasi-static regimes result:
//!
//! * `A`: jet force below the rotation onset, finger line only.
//! * `B`: lever rotating, both lines carry flow.
//! * `C`: tube 1 blocked, injection line only, finger chamber sealed.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::curve::PiecewiseLinearCurve;
use crate::error::{Error, Result};
use crate::search;
use crate::units::{Area, Density, Force, PhysConstants, VolumetricFlow};

/// Blocking-force calibration knots (q₁ in L/min, force in N), one per
/// prototype row of the measured table.
pub const TABLE_F_BLOCK_KNOTS: [(f64, f64); 4] = [(1.7, 0.98), (2.0, 0.99), (2.4, 1.02), (10.5, 1.34)];

pub fn table_f_block_curve() -> PiecewiseLinearCurve {
    PiecewiseLinearCurve::new(TABLE_F_BLOCK_KNOTS.to_vec()).expect("static knots are increasing")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum FcsState {
    A,
    B,
    C,
}

impl fmt::Display for FcsState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            FcsState::A => "A",
            FcsState::B => "B",
            FcsState::C => "C",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FcsConfig {
    /// Fraction of the source flow entering tube 3.
    pub alpha: f64,
    /// Lever arm ratio between the tube-1 tip and the jet contact point.
    pub epsilon: f64,
    pub s3: Area,
    /// Metadata only; `alpha` carries its effect.
    pub exhaust_port_area: Area,
    /// Jet force at which the lever starts to rotate.
    pub f_rot: Force,
    /// q₁ (L/min) to blocking force (N).
    pub f_block_curve: PiecewiseLinearCurve,
    /// Fraction of the tube-3 flow reaching output tube 2.
    pub gamma: f64,
}

impl FcsConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::invalid("alpha", format!("must lie in (0, 1), got {}", self.alpha)));
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(Error::invalid("epsilon", format!("must be > 0, got {}", self.epsilon)));
        }
        if !(self.s3.si() > 0.0 && self.s3.is_finite()) {
            return Err(Error::invalid("s3", format!("must be > 0, got {}", self.s3)));
        }
        if !(self.exhaust_port_area.si() >= 0.0) {
            return Err(Error::invalid("exhaust_port_area", "must be >= 0"));
        }
        if !(self.f_rot.si() >= 0.0 && self.f_rot.is_finite()) {
            return Err(Error::invalid("f_rot", format!("must be >= 0, got {}", self.f_rot)));
        }
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return Err(Error::invalid("gamma", format!("must lie in (0, 1], got {}", self.gamma)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FcsOutputs {
    pub q1: VolumetricFlow,
    pub q2: VolumetricFlow,
    pub q_exhaust: VolumetricFlow,
    pub q3: VolumetricFlow,
    pub f3: Force,
    pub f1: Force,
    pub state: FcsState,
}

/// Continuity split: `(q1, q3) = ((1 - alpha)·q_src, alpha·q_src)`.
pub fn split_flow(q_src: VolumetricFlow, alpha: f64) -> Result<(VolumetricFlow, VolumetricFlow)> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::invalid("alpha", format!("must lie in (0, 1), got {alpha}")));
    }
    if q_src.si() < 0.0 {
        return Err(Error::invalid("q_src", "must be >= 0"));
    }
    let q3 = q_src * alpha;
    Ok((q_src - q3, q3))
}

/// Jet force of tube 3 on the lever from momentum conservation, ρ·q₃²/s₃.
pub fn lever_force(q3: VolumetricFlow, s3: Area, rho_air: Density) -> Result<Force> {
    if s3.si() == 0.0 {
        return Err(Error::DivisionByZero("s3"));
    }
    if s3.si() < 0.0 || q3.si() < 0.0 {
        return Err(Error::invalid("lever_force", "q3 and s3 must be non-negative"));
    }
    Ok(jet_force(q3, s3, rho_air))
}

fn jet_force(q3: VolumetricFlow, s3: Area, rho_air: Density) -> Force {
    Force::from_si(rho_air.si() * q3.si() * q3.si() / s3.si())
}

/// Force at the lever tip pressing on tube 1.
pub fn tube_tip_force(f3: Force, epsilon: f64) -> Force {
    f3 * epsilon
}

/// Tube-3 area that makes the tip force equal `f1` at tube-3 flow `q3`.
pub fn calibrate_s3(epsilon: f64, rho_air: Density, q3: VolumetricFlow, f1: Force) -> Result<Area> {
    if f1.si() == 0.0 {
        return Err(Error::DivisionByZero("f1"));
    }
    if !(epsilon > 0.0 && rho_air.si() > 0.0 && q3.si() > 0.0 && f1.si() > 0.0) {
        return Err(Error::invalid("calibrate_s3", "all inputs must be > 0"));
    }
    Ok(Area::from_si(epsilon * rho_air.si() * q3.si() * q3.si() / f1.si()))
}

/// Force needed to pinch tube 1 while it carries `q1`.
pub fn blocking_force(q1: VolumetricFlow, curve: &PiecewiseLinearCurve) -> Force {
    Force::from_si(curve.eval(q1.lpm()))
}

pub fn check_blocking(f1: Force, f_block: Force) -> bool {
    f1 >= f_block
}

struct LeverBalance {
    q1: VolumetricFlow,
    q3: VolumetricFlow,
    f3: Force,
    f1: Force,
    state: FcsState,
}

fn balance(q_src: VolumetricFlow, cfg: &FcsConfig, consts: &PhysConstants) -> LeverBalance {
    debug_assert!(q_src.si() >= 0.0);
    let q3 = q_src * cfg.alpha;
    let q1 = q_src - q3;
    let f3 = jet_force(q3, cfg.s3, consts.rho_air);
    let f1 = tube_tip_force(f3, cfg.epsilon);
    let state = if q3.si() == 0.0 || f3 < cfg.f_rot {
        FcsState::A
    } else if check_blocking(f1, blocking_force(q1, &cfg.f_block_curve)) {
        FcsState::C
    } else {
        FcsState::B
    };
    LeverBalance { q1, q3, f3, f1, state }
}

pub fn classify_state(q_src: VolumetricFlow, cfg: &FcsConfig, consts: &PhysConstants) -> FcsState {
    balance(q_src, cfg, consts).state
}

/// Steady flows at the three outlets.
///
/// The α split holds in every state; whatever a blocked or non-transmitting
/// branch cannot deliver leaves through the exhaust port.
pub fn steady_outputs(q_src: VolumetricFlow, cfg: &FcsConfig, consts: &PhysConstants) -> FcsOutputs {
    let LeverBalance { q1, q3, f3, f1, state } = balance(q_src, cfg, consts);
    let (q1, q2, q_exhaust) = match state {
        FcsState::A => (q1, VolumetricFlow::ZERO, q3),
        FcsState::B => {
            let q2 = q3 * cfg.gamma;
            (q1, q2, q3 - q2)
        }
        FcsState::C => {
            let q2 = q3 * cfg.gamma;
            (VolumetricFlow::ZERO, q2, q_src - q2)
        }
    };
    FcsOutputs {
        q1,
        q2,
        q_exhaust,
        q3,
        f3,
        f1,
        state,
    }
}

/// Rotation-onset force that places the A→B transition at `q_ab`.
pub fn calibrate_f_rot(q_ab: VolumetricFlow, cfg: &FcsConfig, consts: &PhysConstants) -> Result<Force> {
    if !(q_ab.si() > 0.0) {
        return Err(Error::invalid("q_ab", "must be > 0"));
    }
    lever_force(q_ab * cfg.alpha, cfg.s3, consts.rho_air)
}

/// Source flows (L/min) at which the mechanism enters states B and C.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SwitchThresholds {
    pub q_ab_lpm: Option<f64>,
    pub q_bc_lpm: Option<f64>,
}

/// Locates the A→B and B→C transitions below `ceiling_lpm` by bisection.
pub fn switch_thresholds(cfg: &FcsConfig, consts: &PhysConstants, ceiling_lpm: f64, tol_lpm: f64) -> SwitchThresholds {
    let at_least = |s: FcsState| {
        move |lpm: f64| classify_state(VolumetricFlow::from_lpm(lpm), cfg, consts) >= s
    };
    SwitchThresholds {
        q_ab_lpm: search::first_true_bisect(0.0, ceiling_lpm, tol_lpm, at_least(FcsState::B)),
        q_bc_lpm: search::first_true_bisect(0.0, ceiling_lpm, tol_lpm, at_least(FcsState::C)),
    }
}

/// Same as [`switch_thresholds`] but by a brute-force grid scan.
pub fn switch_thresholds_scan(cfg: &FcsConfig, consts: &PhysConstants, ceiling_lpm: f64, step_lpm: f64) -> SwitchThresholds {
    let mut q_ab = None;
    let mut q_bc = None;
    let n = (ceiling_lpm / step_lpm).round() as u64;
    for k in 0..=n {
        let lpm = ceiling_lpm * k as f64 / n as f64;
        let s = classify_state(VolumetricFlow::from_lpm(lpm), cfg, consts);
        if s >= FcsState::B && q_ab.is_none() {
            q_ab = Some(lpm);
        }
        if s == FcsState::C {
            q_bc = Some(lpm);
            break;
        }
    }
    SwitchThresholds {
        q_ab_lpm: q_ab,
        q_bc_lpm: q_bc,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    const RHO: Density = Density::from_si(1.2);

    fn lpm(x: f64) -> VolumetricFlow {
        VolumetricFlow::from_lpm(x)
    }

    fn proto_a() -> FcsConfig {
        crate::SystemConfig::prototype_a().fcs
    }

    #[test]
    fn split_flow_examples() {
        let (q1, q3) = split_flow(lpm(118.0), 0.9831).unwrap();
        assert!((q1.lpm() - 2.0).abs() < 0.01);
        assert!((q3.lpm() - 116.0).abs() < 0.01);
        let (q1, q3) = split_flow(VolumetricFlow::ZERO, 0.3).unwrap();
        assert_eq!((q1.si(), q3.si()), (0.0, 0.0));
        let (q1, q3) = split_flow(lpm(100.0), 0.5).unwrap();
        assert_relative_eq!(q1.lpm(), 50.0, max_relative = 1e-12);
        assert_relative_eq!(q3.lpm(), 50.0, max_relative = 1e-12);
        assert_eq!(q1 + q3, lpm(100.0));
    }

    #[test]
    fn split_flow_rejects_alpha_out_of_range() {
        for a in [0.0, 1.0, -0.1, 1.5] {
            assert!(split_flow(lpm(10.0), a).is_err());
        }
    }

    #[test]
    fn lever_force_examples() {
        assert_eq!(lever_force(VolumetricFlow::ZERO, Area::from_si(1e-5), RHO).unwrap(), Force::ZERO);
        // 1.2 · (116/60000)² / 1.155e-5
        let f3 = lever_force(lpm(116.0), Area::from_si(1.155e-5), RHO).unwrap();
        assert_relative_eq!(f3.si(), 0.388_337, max_relative = 1e-5);
        let s3 = Area::from_si(1.3e-5);
        let a = lever_force(lpm(40.0), s3, RHO).unwrap();
        let b = lever_force(lpm(80.0), s3, RHO).unwrap();
        assert_relative_eq!(b.si(), 4.0 * a.si(), max_relative = 1e-12);
        assert_eq!(lever_force(lpm(1.0), Area::ZERO, RHO), Err(Error::DivisionByZero("s3")));
    }

    #[test]
    fn tube_tip_force_examples() {
        assert!((tube_tip_force(Force::from_si(0.388), 2.6).si() - 1.01).abs() < 0.005);
        assert_relative_eq!(tube_tip_force(Force::from_si(0.60), 1.5).si(), 0.90, max_relative = 1e-12);
        assert_eq!(tube_tip_force(Force::from_si(0.7), 1.0).si(), 0.7);
    }

    #[test]
    fn calibrate_s3_examples() {
        let s3 = calibrate_s3(2.6, RHO, lpm(116.0), Force::from_si(1.01)).unwrap();
        assert_relative_eq!(s3.si(), 1.154_64e-5, max_relative = 1e-4);
        let s3d = calibrate_s3(2.6, RHO, lpm(115.0), Force::from_si(0.99)).unwrap();
        assert_relative_eq!(s3d.si(), 1.157_7e-5, max_relative = 1e-4);
        let half = calibrate_s3(2.6, RHO, lpm(116.0), Force::from_si(2.02)).unwrap();
        assert_relative_eq!(half.si(), s3.si() / 2.0, max_relative = 1e-12);
        assert_eq!(
            calibrate_s3(2.6, RHO, lpm(116.0), Force::ZERO),
            Err(Error::DivisionByZero("f1"))
        );
    }

    #[test]
    fn blocking_force_examples() {
        let c = table_f_block_curve();
        assert_eq!(blocking_force(lpm(2.0), &c).si(), 0.99);
        assert_eq!(blocking_force(lpm(10.5), &c).si(), 1.34);
        assert_eq!(blocking_force(lpm(1.7), &c).si(), 0.98);
        assert_eq!(blocking_force(VolumetricFlow::ZERO, &c).si(), 0.98);
    }

    #[test]
    fn check_blocking_table_rows() {
        let f = Force::from_si;
        assert!(check_blocking(f(1.01), f(0.99)));
        assert!(!check_blocking(f(1.18), f(1.34)));
        assert!(!check_blocking(f(0.90), f(1.02)));
        assert!(check_blocking(f(0.99), f(0.98)));
        assert!(check_blocking(f(1.0), f(1.0)));
    }

    #[test]
    fn classify_state_examples() {
        let cfg = proto_a();
        let c = PhysConstants::default();
        assert_eq!(classify_state(lpm(5.0), &cfg, &c), FcsState::A);
        assert_eq!(classify_state(lpm(50.0), &cfg, &c), FcsState::B);
        assert_eq!(classify_state(lpm(150.0), &cfg, &c), FcsState::C);
        assert_eq!(classify_state(VolumetricFlow::ZERO, &cfg, &c), FcsState::A);
    }

    #[test]
    fn steady_outputs_examples() {
        let cfg = proto_a();
        let c = PhysConstants::default();
        let out = steady_outputs(lpm(118.0), &cfg, &c);
        assert!((out.q2.lpm() - 44.0).abs() < 1e-9);
        assert_eq!(out.state, FcsState::C);

        let zero = steady_outputs(VolumetricFlow::ZERO, &cfg, &c);
        assert_eq!(zero.state, FcsState::A);
        assert_eq!((zero.q1.si(), zero.q2.si(), zero.q_exhaust.si()), (0.0, 0.0, 0.0));

        let high = steady_outputs(lpm(150.0), &cfg, &c);
        assert_eq!(high.state, FcsState::C);
        assert_eq!(high.q1.si(), 0.0);

        let low = steady_outputs(lpm(5.0), &cfg, &c);
        assert_eq!(low.q2.si(), 0.0);
    }

    #[test]
    fn calibrate_f_rot_examples() {
        let cfg = proto_a();
        let c = PhysConstants::default();
        let f = calibrate_f_rot(lpm(8.1), &cfg, &c).unwrap();
        // ρ(α·8.1/60000)²/s3 with s3 from the blocking-boundary calibration.
        let expected = 1.2 * (116.0 / 118.0 * 8.1 / 60_000.0f64).powi(2) / cfg.s3.si();
        assert_relative_eq!(f.si(), expected, max_relative = 1e-12);
        assert!((f.si() - 1.8e-3).abs() < 0.1e-3);

        let small = calibrate_f_rot(lpm(1e-6), &cfg, &c).unwrap();
        assert!(small.si() < 1e-15);
        let f2 = calibrate_f_rot(lpm(16.2), &cfg, &c).unwrap();
        assert_relative_eq!(f2.si(), 4.0 * f.si(), max_relative = 1e-12);
        assert!(calibrate_f_rot(VolumetricFlow::ZERO, &cfg, &c).is_err());
    }

    #[test]
    fn f_rot_grid_scan_flips_at_calibration_point() {
        let cfg = proto_a();
        let c = PhysConstants::default();
        let t = switch_thresholds_scan(&cfg, &c, 200.0, 0.01);
        let q_ab = t.q_ab_lpm.unwrap();
        assert!((q_ab - 8.1).abs() <= 0.01, "{q_ab}");
        let q_bc = t.q_bc_lpm.unwrap();
        assert!((q_bc - 118.0).abs() <= 0.01, "{q_bc}");
    }

    #[test]
    fn table_calibrated_s3_blocks_early() {
        // s3 from the tabulated f1 = 1.01 puts the B→C crossing near 116.8.
        let c = PhysConstants::default();
        let mut cfg = proto_a();
        cfg.s3 = calibrate_s3(2.6, c.rho_air, lpm(116.0), Force::from_si(1.01)).unwrap();
        let t = switch_thresholds(&cfg, &c, 200.0, 1e-6);
        let q_bc = t.q_bc_lpm.unwrap();
        assert!(q_bc > 116.5 && q_bc < 117.0, "{q_bc}");
    }

    #[test]
    fn blocked_state_contiguous() {
        let cfg = proto_a();
        let c = PhysConstants::default();
        let mut seen_c = false;
        for k in 0..=20_000 {
            let q = 200.0 * k as f64 / 20_000.0;
            let is_c = classify_state(lpm(q), &cfg, &c) == FcsState::C;
            assert!(!(seen_c && !is_c), "left C at {q}");
            seen_c |= is_c;
        }
    }

    proptest! {
        #[test]
        fn conservation(q in 0.0f64..300.0, alpha in 0.01f64..0.99, gamma in 0.01f64..1.0, eps in 0.5f64..4.0) {
            let mut cfg = proto_a();
            cfg.alpha = alpha;
            cfg.gamma = gamma;
            cfg.epsilon = eps;
            let out = steady_outputs(lpm(q), &cfg, &PhysConstants::default());
            let total = (out.q1 + out.q2 + out.q_exhaust).si();
            let src = lpm(q).si();
            prop_assert!((total - src).abs() <= 1e-9 * src.max(f64::MIN_POSITIVE));
            prop_assert!(out.q1.si() >= 0.0 && out.q2.si() >= 0.0 && out.q_exhaust.si() >= 0.0);
        }
    }
}
