//! Unit-carrying scalars and physical constants.
//!
//! Every quantity stores its canonical SI value. Conversions to the units the
//! hardware is specified in (L/min, kPa, mm, mm²) happen only at I/O
//! boundaries through the named constructors and accessors.

use std::fmt;
use std::ops::{Add, Div, Mul, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Cubic metres per second in one litre per minute.
pub const M3S_PER_LPM: f64 = 1.0 / 60_000.0;

macro_rules! quantity {
    ($(#[$meta:meta])* $name:ident, $unit:literal) => {
        $(#[$meta])*
        #[derive(Debug, Clone, Copy, Default, PartialEq, PartialOrd, Serialize, Deserialize)]
        #[serde(transparent)]
        pub struct $name(f64);

        impl $name {
            pub const ZERO: Self = Self(0.0);

            /// Wraps a value already expressed in SI units.
            pub const fn from_si(value: f64) -> Self {
                Self(value)
            }

            pub const fn si(self) -> f64 {
                self.0
            }

            pub fn is_finite(self) -> bool {
                self.0.is_finite()
            }

            pub fn max(self, other: Self) -> Self {
                Self(self.0.max(other.0))
            }

            pub fn min(self, other: Self) -> Self {
                Self(self.0.min(other.0))
            }
        }

        impl Add for $name {
            type Output = Self;
            fn add(self, rhs: Self) -> Self {
                Self(self.0 + rhs.0)
            }
        }

        impl Sub for $name {
            type Output = Self;
            fn sub(self, rhs: Self) -> Self {
                Self(self.0 - rhs.0)
            }
        }

        impl Mul<f64> for $name {
            type Output = Self;
            fn mul(self, rhs: f64) -> Self {
                Self(self.0 * rhs)
            }
        }

        impl Div<f64> for $name {
            type Output = Self;
            fn div(self, rhs: f64) -> Self {
                Self(self.0 / rhs)
            }
        }

        impl Div for $name {
            type Output = f64;
            fn div(self, rhs: Self) -> f64 {
                self.0 / rhs.0
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, "{} {}", self.0, $unit)
            }
        }
    };
}

quantity!(
    /// Volumetric flow rate, m³/s.
    VolumetricFlow,
    "m³/s"
);
quantity!(
    /// Pressure in Pa. Gauge unless a function says otherwise.
    Pressure,
    "Pa"
);
quantity!(Force, "N");
quantity!(Area, "m²");
quantity!(Length, "m");
quantity!(Density, "kg/m³");
quantity!(Mass, "kg");

fn non_negative(name: &'static str, value: f64) -> Result<f64> {
    if value.is_nan() || value < 0.0 {
        return Err(Error::invalid(name, format!("must be >= 0, got {value}")));
    }
    Ok(value)
}

impl VolumetricFlow {
    pub fn from_lpm(lpm: f64) -> Self {
        Self(lpm * M3S_PER_LPM)
    }

    pub fn lpm(self) -> f64 {
        self.0 * 60_000.0
    }
}

/// Converts a flow given in L/min to canonical m³/s, rejecting negative input.
pub fn convert_flow(lpm: f64) -> Result<VolumetricFlow> {
    non_negative("flow", lpm).map(VolumetricFlow::from_lpm)
}

impl Pressure {
    pub fn from_kpa(kpa: f64) -> Self {
        Self(kpa * 1e3)
    }

    pub fn kpa(self) -> f64 {
        self.0 * 1e-3
    }
}

impl Area {
    pub fn from_mm2(mm2: f64) -> Self {
        Self(mm2 * 1e-6)
    }

    pub fn mm2(self) -> f64 {
        self.0 * 1e6
    }

    pub fn checked(name: &'static str, m2: f64) -> Result<Self> {
        non_negative(name, m2).map(Self)
    }
}

impl Length {
    pub fn from_mm(mm: f64) -> Self {
        Self(mm * 1e-3)
    }

    pub fn mm(self) -> f64 {
        self.0 * 1e3
    }
}

impl Force {
    /// Weight of a mass under gravity `g`.
    pub fn weight(mass: Mass, g: f64) -> Self {
        Self(mass.0 * g)
    }
}

/// Constants shared by every model. All strictly positive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysConstants {
    pub rho_air: Density,
    /// Anhydrous ethanol by default.
    pub rho_lubricant: Density,
    /// m/s²
    pub g: f64,
    /// Absolute.
    pub p_atm: Pressure,
}

impl Default for PhysConstants {
    fn default() -> Self {
        Self {
            rho_air: Density(1.2),
            rho_lubricant: Density(789.0),
            g: 9.81,
            p_atm: Pressure(101_325.0),
        }
    }
}

impl PhysConstants {
    pub fn validate(&self) -> Result<()> {
        let checks = [
            ("rho_air", self.rho_air.0),
            ("rho_lubricant", self.rho_lubricant.0),
            ("g", self.g),
            ("p_atm", self.p_atm.0),
        ];
        for (name, v) in checks {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::invalid(name, format!("must be > 0, got {v}")));
            }
        }
        Ok(())
    }
}
