//! JSON configuration files.
//!
//! Every key is optional; omitted keys keep the tuned Prototype A value.
//! Unknown keys are errors. Lengths and areas are given in mm and mm², flows
//! in L/min and pressures in kPa unless the key says otherwise.

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::curve::PiecewiseLinearCurve;
use crate::error::{Error, Result};
use crate::fcs;
use crate::finger::FingerConfig;
use crate::scenario::Scenario;
use crate::system::SystemConfig;
use crate::units::{Area, Density, Force, Length, Pressure, VolumetricFlow};

/// Every accepted `section.key`.
pub const KNOWN_KEYS: &[&str] = &[
    "constants.rho_air",
    "constants.g",
    "constants.p_atm",
    "fcs.alpha",
    "fcs.epsilon",
    "fcs.s3_mm2",
    "fcs.exhaust_port_mm2",
    "fcs.gamma",
    "fcs.f_rot_N",
    "fcs.q_ab_lpm",
    "fcs.f_block_knots",
    "venturi.s_in_mm2",
    "venturi.s_out_mm2",
    "venturi.s_t_mm2",
    "venturi.h_t_mm",
    "venturi.rho_lub",
    "venturi.p_src_kpa_abs",
    "venturi.s_src_mm2",
    "venturi.s_e_mm2",
    "venturi.use_simplified_inlet",
    "venturi.discharge_coefficient",
    "finger.finger_length_mm",
    "finger.pressure_map_knots",
    "finger.curvature_gain",
    "finger.tipforce_gain_n_per_kpa",
    "finger.p_max_kpa",
    "hand.n_fingers",
    "hand.mu_high",
    "hand.mu_low",
    "hand.mu_pivot_crit",
    "hand.max_opening_mm",
    "hand.release_height_mm",
    "controller.motion_max_lpm",
    "controller.injection_lpm",
];

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub constants: Option<ConstantsSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fcs: Option<FcsSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub venturi: Option<VenturiSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub finger: Option<FingerSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hand: Option<HandSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub controller: Option<ControllerSection>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstantsSection {
    /// kg/m³
    pub rho_air: Option<f64>,
    /// m/s²
    pub g: Option<f64>,
    /// Pa, absolute
    pub p_atm: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FcsSection {
    pub alpha: Option<f64>,
    pub epsilon: Option<f64>,
    pub s3_mm2: Option<f64>,
    pub exhaust_port_mm2: Option<f64>,
    pub gamma: Option<f64>,
    #[serde(rename = "f_rot_N")]
    pub f_rot_n: Option<f64>,
    /// Alternative to `f_rot_N`: the A→B flow the lever is calibrated to.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q_ab_lpm: Option<f64>,
    pub f_block_knots: Option<Vec<(f64, f64)>>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VenturiSection {
    pub s_in_mm2: Option<f64>,
    pub s_out_mm2: Option<f64>,
    pub s_t_mm2: Option<f64>,
    pub h_t_mm: Option<f64>,
    pub rho_lub: Option<f64>,
    pub p_src_kpa_abs: Option<f64>,
    pub s_src_mm2: Option<f64>,
    pub s_e_mm2: Option<f64>,
    pub use_simplified_inlet: Option<bool>,
    pub discharge_coefficient: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FingerSection {
    pub finger_length_mm: Option<f64>,
    pub pressure_map_knots: Option<Vec<(f64, f64)>>,
    /// 1/(m·kPa)
    pub curvature_gain: Option<f64>,
    pub tipforce_gain_n_per_kpa: Option<f64>,
    pub p_max_kpa: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HandSection {
    pub n_fingers: Option<u32>,
    pub mu_high: Option<f64>,
    pub mu_low: Option<f64>,
    pub mu_pivot_crit: Option<f64>,
    pub max_opening_mm: Option<f64>,
    pub release_height_mm: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControllerSection {
    pub motion_max_lpm: Option<f64>,
    pub injection_lpm: Option<f64>,
}

fn config_err(path: impl Into<String>, message: impl ToString) -> Error {
    Error::Config {
        path: path.into(),
        message: message.to_string(),
    }
}

fn curve(path: &str, knots: Vec<(f64, f64)>) -> Result<PiecewiseLinearCurve> {
    PiecewiseLinearCurve::new(knots).map_err(|e| config_err(path, e))
}

/// Re-labels a model validation error with the section it came from.
fn in_section(section: &str, r: Result<()>) -> Result<()> {
    r.map_err(|e| match e {
        Error::InvalidParameter { name, reason } => config_err(format!("{section}.{name}"), reason),
        other => config_err(section, other),
    })
}

impl ConfigFile {
    pub fn resolve(&self) -> Result<SystemConfig> {
        let mut cfg = SystemConfig::prototype_a();

        if let Some(c) = &self.constants {
            if let Some(v) = c.rho_air {
                cfg.constants.rho_air = Density::from_si(v);
            }
            if let Some(v) = c.g {
                cfg.constants.g = v;
            }
            if let Some(v) = c.p_atm {
                cfg.constants.p_atm = Pressure::from_si(v);
                cfg.venturi.p_src = cfg.constants.p_atm;
            }
        }

        if let Some(v) = &self.venturi {
            let vc = &mut cfg.venturi;
            if let Some(x) = v.s_in_mm2 {
                vc.s_in = Area::from_mm2(x);
            }
            if let Some(x) = v.s_out_mm2 {
                vc.s_out = Area::from_mm2(x);
            }
            if let Some(x) = v.s_t_mm2 {
                vc.s_t = Area::from_mm2(x);
            }
            if let Some(x) = v.h_t_mm {
                vc.h_t = Length::from_mm(x);
            }
            if let Some(x) = v.rho_lub {
                cfg.constants.rho_lubricant = Density::from_si(x);
            }
            if let Some(x) = v.p_src_kpa_abs {
                vc.p_src = Pressure::from_kpa(x);
            }
            if let Some(x) = v.s_src_mm2 {
                vc.s_src = Area::from_mm2(x);
            }
            if let Some(x) = v.s_e_mm2 {
                vc.s_e = Area::from_mm2(x);
            }
            if let Some(x) = v.use_simplified_inlet {
                vc.use_simplified_inlet = x;
            }
            if let Some(x) = v.discharge_coefficient {
                vc.discharge_coefficient = x;
            }
        }
        in_section("constants", cfg.constants.validate())?;

        if let Some(f) = &self.fcs {
            let fc = &mut cfg.fcs;
            if let Some(x) = f.alpha {
                fc.alpha = x;
            }
            if let Some(x) = f.epsilon {
                fc.epsilon = x;
            }
            if let Some(x) = f.s3_mm2 {
                fc.s3 = Area::from_mm2(x);
            }
            if let Some(x) = f.exhaust_port_mm2 {
                fc.exhaust_port_area = Area::from_mm2(x);
            }
            if let Some(x) = f.gamma {
                fc.gamma = x;
            }
            if let Some(knots) = &f.f_block_knots {
                fc.f_block_curve = curve("fcs.f_block_knots", knots.clone())?;
            }
            match (f.f_rot_n, f.q_ab_lpm) {
                (Some(_), Some(_)) => {
                    return Err(config_err("fcs.f_rot_N", "give either f_rot_N or q_ab_lpm, not both"));
                }
                (Some(x), None) => fc.f_rot = Force::from_si(x),
                (None, Some(q)) => {
                    in_section("fcs", fc.validate())?;
                    fc.f_rot = fcs::calibrate_f_rot(VolumetricFlow::from_lpm(q), fc, &cfg.constants)
                        .map_err(|e| config_err("fcs.q_ab_lpm", e))?;
                }
                (None, None) => {}
            }
        }
        in_section("fcs", cfg.fcs.validate())?;
        in_section("venturi", cfg.venturi.validate())?;

        if let Some(f) = &self.finger {
            let fc = &mut cfg.finger;
            if let Some(x) = f.finger_length_mm {
                fc.finger_length = Length::from_mm(x);
                fc.curvature_gain = FingerConfig::half_turn_gain(fc.finger_length);
            }
            if let Some(knots) = &f.pressure_map_knots {
                fc.pressure_map = curve("finger.pressure_map_knots", knots.clone())?;
            }
            if let Some(x) = f.curvature_gain {
                fc.curvature_gain = x;
            }
            if let Some(x) = f.tipforce_gain_n_per_kpa {
                fc.tipforce_gain = x;
            }
            if let Some(x) = f.p_max_kpa {
                fc.p_max = Pressure::from_kpa(x);
            }
        }
        in_section("finger", cfg.finger.validate())?;

        if let Some(h) = &self.hand {
            let hc = &mut cfg.hand;
            if let Some(x) = h.n_fingers {
                hc.n_fingers = x;
            }
            if let Some(x) = h.mu_high {
                hc.mu_high = x;
            }
            if let Some(x) = h.mu_low {
                hc.mu_low = x;
            }
            hc.mu_pivot_crit = h.mu_pivot_crit.unwrap_or(0.5 * (hc.mu_low + hc.mu_high));
            if let Some(x) = h.max_opening_mm {
                hc.max_opening = Length::from_mm(x);
            }
            if let Some(x) = h.release_height_mm {
                cfg.release_height = Length::from_mm(x);
            }
        }
        in_section("hand", cfg.hand.validate())?;
        if !(cfg.release_height.si() >= 0.0) {
            return Err(config_err("hand.release_height_mm", "must be >= 0"));
        }

        if let Some(c) = &self.controller {
            if let Some(x) = c.motion_max_lpm {
                cfg.controller.motion_max = VolumetricFlow::from_lpm(x);
            }
            if let Some(x) = c.injection_lpm {
                cfg.controller.injection = VolumetricFlow::from_lpm(x);
            }
        }
        let (motion, full) = (cfg.controller.motion_max.lpm(), cfg.controller.injection.lpm());
        if !(motion > 0.0 && full > motion) {
            return Err(config_err("controller", "need 0 < motion_max_lpm < injection_lpm"));
        }

        cfg.validate()?;
        Ok(cfg)
    }

    /// Fully explicit file form of a resolved configuration.
    pub fn from_system(cfg: &SystemConfig) -> Self {
        Self {
            constants: Some(ConstantsSection {
                rho_air: Some(cfg.constants.rho_air.si()),
                g: Some(cfg.constants.g),
                p_atm: Some(cfg.constants.p_atm.si()),
            }),
            fcs: Some(FcsSection {
                alpha: Some(cfg.fcs.alpha),
                epsilon: Some(cfg.fcs.epsilon),
                s3_mm2: Some(cfg.fcs.s3.mm2()),
                exhaust_port_mm2: Some(cfg.fcs.exhaust_port_area.mm2()),
                gamma: Some(cfg.fcs.gamma),
                f_rot_n: Some(cfg.fcs.f_rot.si()),
                q_ab_lpm: None,
                f_block_knots: Some(cfg.fcs.f_block_curve.knots().to_vec()),
            }),
            venturi: Some(VenturiSection {
                s_in_mm2: Some(cfg.venturi.s_in.mm2()),
                s_out_mm2: Some(cfg.venturi.s_out.mm2()),
                s_t_mm2: Some(cfg.venturi.s_t.mm2()),
                h_t_mm: Some(cfg.venturi.h_t.mm()),
                rho_lub: Some(cfg.constants.rho_lubricant.si()),
                p_src_kpa_abs: Some(cfg.venturi.p_src.kpa()),
                s_src_mm2: Some(cfg.venturi.s_src.mm2()),
                s_e_mm2: Some(cfg.venturi.s_e.mm2()),
                use_simplified_inlet: Some(cfg.venturi.use_simplified_inlet),
                discharge_coefficient: Some(cfg.venturi.discharge_coefficient),
            }),
            finger: Some(FingerSection {
                finger_length_mm: Some(cfg.finger.finger_length.mm()),
                pressure_map_knots: Some(cfg.finger.pressure_map.knots().to_vec()),
                curvature_gain: Some(cfg.finger.curvature_gain),
                tipforce_gain_n_per_kpa: Some(cfg.finger.tipforce_gain),
                p_max_kpa: Some(cfg.finger.p_max.kpa()),
            }),
            hand: Some(HandSection {
                n_fingers: Some(cfg.hand.n_fingers),
                mu_high: Some(cfg.hand.mu_high),
                mu_low: Some(cfg.hand.mu_low),
                mu_pivot_crit: Some(cfg.hand.mu_pivot_crit),
                max_opening_mm: Some(cfg.hand.max_opening.mm()),
                release_height_mm: Some(cfg.release_height.mm()),
            }),
            controller: Some(ControllerSection {
                motion_max_lpm: Some(cfg.controller.motion_max.lpm()),
                injection_lpm: Some(cfg.controller.injection.lpm()),
            }),
        }
    }
}

fn parse_with_path<T: DeserializeOwned>(value: Value) -> Result<T> {
    serde_path_to_error::deserialize(value).map_err(|e| {
        let path = e.path().to_string();
        config_err(path, e.into_inner())
    })
}

fn parse_json_value(text: &str) -> Result<Value> {
    serde_json::from_str(text).map_err(|e| config_err("<root>", e))
}

pub fn parse_config_value(value: Value) -> Result<SystemConfig> {
    parse_with_path::<ConfigFile>(value)?.resolve()
}

pub fn parse_config(text: &str) -> Result<SystemConfig> {
    parse_config_value(parse_json_value(text)?)
}

pub fn load_config_value(path: &Path) -> Result<Value> {
    let text = std::fs::read_to_string(path).map_err(|e| config_err(path.display().to_string(), e))?;
    parse_json_value(&text)
}

pub fn load_config(path: &Path) -> Result<SystemConfig> {
    parse_config_value(load_config_value(path)?)
}

pub fn parse_scenario(text: &str) -> Result<Scenario> {
    parse_with_path(parse_json_value(text)?)
}

pub fn load_scenario(path: &Path) -> Result<Scenario> {
    let text = std::fs::read_to_string(path).map_err(|e| config_err(path.display().to_string(), e))?;
    parse_scenario(&text)
}

/// Sets `section.key` to a number in a raw config document.
pub fn set_param(doc: &mut Value, path: &str, value: f64) -> Result<()> {
    if !KNOWN_KEYS.contains(&path) {
        return Err(Error::UnknownParam(path.to_string()));
    }
    let (section, key) = path.split_once('.').expect("known keys are dotted");
    if !doc.is_object() {
        *doc = Value::Object(Default::default());
    }
    let root = doc.as_object_mut().expect("object");
    let sec = root
        .entry(section)
        .or_insert_with(|| Value::Object(Default::default()));
    let Some(sec) = sec.as_object_mut() else {
        return Err(config_err(section, "expected an object"));
    };
    let number = serde_json::Number::from_f64(value).ok_or_else(|| config_err(path, "value must be finite"))?;
    // q_ab_lpm and f_rot_N are alternatives; sweeping one drops the other.
    match key {
        "q_ab_lpm" => {
            sec.remove("f_rot_N");
        }
        "f_rot_N" => {
            sec.remove("q_ab_lpm");
        }
        _ => {}
    }
    if key == "n_fingers" {
        if value.fract() != 0.0 || value < 0.0 {
            return Err(config_err(path, "must be a whole number"));
        }
        sec.insert(key.to_string(), Value::from(value as u64));
    } else {
        sec.insert(key.to_string(), Value::Number(number));
    }
    Ok(())
}
