//! Venturi lubricant injector.
//!
//! Air from output tube 2 passes an orifice. The pressure drop across the
//! constriction lowers the orifice pressure below atmospheric, which lifts
//! lubricant up the supply tube from the palm tank. Once the column clears
//! the tube height, lubricant reaches the finger surface.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fcs::{self, FcsConfig};
use crate::search;
use crate::units::{Area, Density, Length, PhysConstants, Pressure, VolumetricFlow};

/// Upper bound of the activation search.
pub const ACTIVATION_CEILING_LPM: f64 = 200.0;
/// Grid resolution of the activation search.
pub const ACTIVATION_RESOLUTION_LPM: f64 = 0.01;
/// Bracket width at which orifice sizing stops.
pub const SIZING_TOL_M2: f64 = 1e-15;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VenturiConfig {
    /// Wide section upstream of the orifice.
    pub s_in: Area,
    pub s_out: Area,
    /// Lubricant supply tube; the hydrostatic balance does not depend on it.
    pub s_t: Area,
    pub h_t: Length,
    pub s_src: Area,
    pub s_e: Area,
    /// Absolute.
    pub p_src: Pressure,
    /// Treat the inlet as open to atmosphere (p_in = 0 gauge).
    pub use_simplified_inlet: bool,
    /// Effective orifice area is `discharge_coefficient · s_out`.
    pub discharge_coefficient: f64,
}

impl VenturiConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.s_out.si() > 0.0) {
            return Err(Error::invalid("s_out", "must be > 0"));
        }
        if !(self.s_out < self.s_in) {
            return Err(Error::invalid(
                "s_out",
                format!("must be smaller than s_in ({} >= {})", self.s_out, self.s_in),
            ));
        }
        if !(self.h_t.si() > 0.0) {
            return Err(Error::invalid("h_t", "must be > 0"));
        }
        if !(self.s_t.si() > 0.0) {
            return Err(Error::invalid("s_t", "must be > 0"));
        }
        if !(self.discharge_coefficient > 0.0 && self.discharge_coefficient <= 1.0) {
            return Err(Error::invalid("discharge_coefficient", "must lie in (0, 1]"));
        }
        if !self.use_simplified_inlet {
            if !(self.s_src.si() > 0.0 && self.s_e.si() > 0.0) {
                return Err(Error::invalid("s_src/s_e", "must be > 0 when the full inlet model is used"));
            }
            if !(self.p_src.si() > 0.0) {
                return Err(Error::invalid("p_src", "must be > 0 (absolute)"));
            }
        }
        Ok(())
    }

    fn effective_s_out(&self) -> Area {
        self.s_out * self.discharge_coefficient
    }
}

/// Flow state across the orifice.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OrificeFlow {
    pub q2: VolumetricFlow,
    /// m/s
    pub v_in: f64,
    /// m/s
    pub v_out: f64,
    pub p_in: Pressure,
    pub p_out: Pressure,
    pub delta_p: Pressure,
}

impl OrificeFlow {
    pub fn new(q2: VolumetricFlow, s_in: Area, s_out: Area, p_in: Pressure, rho_air: Density) -> Result<Self> {
        let delta_p = orifice_pressure_drop(q2, s_in, s_out, rho_air)?;
        Ok(Self {
            q2,
            v_in: q2.si() / s_in.si(),
            v_out: q2.si() / s_out.si(),
            p_in,
            p_out: p_in - delta_p,
            delta_p,
        })
    }
}

/// Bernoulli pressure drop between the wide section and the orifice.
pub fn orifice_pressure_drop(q2: VolumetricFlow, s_in: Area, s_out: Area, rho_air: Density) -> Result<Pressure> {
    if !(s_out.si() > 0.0) {
        return Err(Error::DivisionByZero("s_out"));
    }
    if s_out > s_in {
        return Err(Error::invalid("s_out", "orifice wider than inlet gives no suction"));
    }
    if q2.si() < 0.0 {
        return Err(Error::invalid("q2", "must be >= 0"));
    }
    let q = q2.si();
    let contraction = 1.0 / (s_out.si() * s_out.si()) - 1.0 / (s_in.si() * s_in.si());
    Ok(Pressure::from_si(0.5 * rho_air.si() * q * q * contraction))
}

/// Gauge pressure upstream of the orifice.
pub fn inlet_pressure(
    q_src: VolumetricFlow,
    q2: VolumetricFlow,
    cfg: &VenturiConfig,
    consts: &PhysConstants,
) -> Result<Pressure> {
    if q2 > q_src {
        return Err(Error::invalid("q2", "cannot exceed q_src"));
    }
    if cfg.use_simplified_inlet {
        return Ok(Pressure::ZERO);
    }
    let sq = |x: f64| x * x;
    let (qs, q2) = (q_src.si(), q2.si());
    let dynamic = sq(qs / cfg.s_src.si()) - sq((qs - q2) / cfg.s_e.si()) - sq(q2 / cfg.s_in.si());
    Ok(cfg.p_src - consts.p_atm + Pressure::from_si(0.5 * consts.rho_air.si() * dynamic))
}

/// Height of the lubricant column in the supply tube.
///
/// Hydrostatic balance `p_atm = ρ_lub·g·h_l + p_out` with absolute orifice
/// pressure; no rise when the orifice sits at or above atmospheric.
pub fn lubricant_rise(p_in: Pressure, delta_p: Pressure, rho_lub: Density, g: f64) -> Length {
    let p_out_gauge = p_in - delta_p;
    Length::from_si((-p_out_gauge.si() / (rho_lub.si() * g)).max(0.0))
}

pub fn injection_active(h_l: Length, h_t: Length) -> bool {
    h_l > h_t
}

/// Injector state for a given source flow, composing the lever mechanism.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InjectorState {
    pub orifice: OrificeFlow,
    pub h_l: Length,
    pub active: bool,
}

pub fn injector_state(
    q_src: VolumetricFlow,
    q2: VolumetricFlow,
    cfg: &VenturiConfig,
    consts: &PhysConstants,
) -> Result<InjectorState> {
    let p_in = inlet_pressure(q_src, q2, cfg, consts)?;
    let orifice = OrificeFlow::new(q2, cfg.s_in, cfg.effective_s_out(), p_in, consts.rho_air)?;
    let h_l = lubricant_rise(p_in, orifice.delta_p, consts.rho_lubricant, consts.g);
    Ok(InjectorState {
        orifice,
        h_l,
        active: injection_active(h_l, cfg.h_t),
    })
}

/// Whether lubricant flows at source flow `q_src`.
pub fn active_at(q_src: VolumetricFlow, cfg: &VenturiConfig, fcs_cfg: &FcsConfig, consts: &PhysConstants) -> bool {
    let out = fcs::steady_outputs(q_src, fcs_cfg, consts);
    injector_state(q_src, out.q2, cfg, consts).is_ok_and(|s| s.active)
}

/// Smallest source flow that activates injection, to 0.01 L/min.
pub fn activation_threshold(cfg: &VenturiConfig, fcs_cfg: &FcsConfig, consts: &PhysConstants) -> Result<VolumetricFlow> {
    search::first_true_bisect(0.0, ACTIVATION_CEILING_LPM, ACTIVATION_RESOLUTION_LPM, |lpm| {
        active_at(VolumetricFlow::from_lpm(lpm), cfg, fcs_cfg, consts)
    })
    .map(VolumetricFlow::from_lpm)
    .ok_or(Error::NeverActivates {
        ceiling_lpm: ACTIVATION_CEILING_LPM,
    })
}

/// Brute-force counterpart of [`activation_threshold`].
pub fn activation_threshold_scan(cfg: &VenturiConfig, fcs_cfg: &FcsConfig, consts: &PhysConstants) -> Option<VolumetricFlow> {
    search::first_true_scan(0.0, ACTIVATION_CEILING_LPM, ACTIVATION_RESOLUTION_LPM, |lpm| {
        active_at(VolumetricFlow::from_lpm(lpm), cfg, fcs_cfg, consts)
    })
    .map(VolumetricFlow::from_lpm)
}

/// Suction the orifice must develop for the column to reach `h_t`.
fn required_drop(p_in: Pressure, cfg: &VenturiConfig, consts: &PhysConstants) -> Pressure {
    Pressure::from_si(consts.rho_lubricant.si() * consts.g * cfg.h_t.si()) + p_in
}

/// Orifice area at which the column reaches `h_t` exactly when the
/// injection line carries `target_q2`.
///
/// `target_q_src` only matters for the full inlet model. The discharge
/// coefficient is honoured, so the returned area is the geometric one.
pub fn size_orifice(
    target_q2: VolumetricFlow,
    target_q_src: VolumetricFlow,
    cfg: &VenturiConfig,
    consts: &PhysConstants,
) -> Result<Area> {
    if !(target_q2.si() > 0.0) {
        return Err(Error::invalid("target_q2", "must be > 0"));
    }
    let p_in = inlet_pressure(target_q_src.max(target_q2), target_q2, cfg, consts)?;
    let needed = required_drop(p_in, cfg, consts);
    if !(needed.si() > 0.0) {
        return Err(Error::infeasible(format!(
            "inlet pressure {p_in} already lifts the column past h_t; needed s_out >= s_in"
        )));
    }
    let cd = cfg.discharge_coefficient;
    let hi = cfg.s_in.si();
    let drop_minus_needed = |s_out: f64| {
        let eff = Area::from_si(s_out * cd);
        orifice_pressure_drop(target_q2, cfg.s_in, eff, consts.rho_air)
            .map(|d| d.si() - needed.si())
            .unwrap_or(f64::INFINITY)
    };
    if drop_minus_needed(hi) >= 0.0 {
        return Err(Error::infeasible("needed s_out >= s_in"));
    }
    let s_out = search::bisect_root(0.0, hi, SIZING_TOL_M2, drop_minus_needed);
    Ok(Area::from_si(s_out))
}

/// Tube height at which the column just reaches the top when the injection
/// line carries `target_q2`, for the configured orifice.
pub fn size_tube_height(
    target_q2: VolumetricFlow,
    target_q_src: VolumetricFlow,
    cfg: &VenturiConfig,
    consts: &PhysConstants,
) -> Result<Length> {
    let state = injector_state(target_q_src.max(target_q2), target_q2, cfg, consts)?;
    if !(state.h_l.si() > 0.0) {
        return Err(Error::infeasible("orifice develops no suction at the target flow"));
    }
    Ok(state.h_l)
}

/// Smallest injection-line flow that lifts the column past `h_t`, searched
/// directly on q₂ with the simplified inlet.
pub fn q2_threshold(cfg: &VenturiConfig, consts: &PhysConstants, ceiling_lpm: f64, tol_lpm: f64) -> Option<f64> {
    search::first_true_bisect(0.0, ceiling_lpm, tol_lpm, |lpm| {
        let q2 = VolumetricFlow::from_lpm(lpm);
        injector_state(q2, q2, cfg, consts).is_ok_and(|s| s.active)
    })
}
