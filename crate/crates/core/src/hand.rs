//! Task-level checks for the two-finger hand.
//!
//! Friction is a Coulomb threshold: the grip holds while the object weight
//! stays within `tip · n_fingers · μ`. Lubrication switches μ from the high
//! to the low value until the hand releases and the ethanol evaporates.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::units::{Force, Length, Mass};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HandConfig {
    pub n_fingers: u32,
    pub mu_high: f64,
    pub mu_low: f64,
    /// Largest friction coefficient at which rotational slip still allows a pivot.
    pub mu_pivot_crit: f64,
    /// Objects must be strictly narrower than this.
    pub max_opening: Length,
}

impl Default for HandConfig {
    fn default() -> Self {
        Self {
            n_fingers: 2,
            mu_high: 2.0,
            mu_low: 0.2,
            mu_pivot_crit: 1.1,
            max_opening: Length::from_si(0.073),
        }
    }
}

impl HandConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_fingers < 2 {
            return Err(Error::invalid("n_fingers", "need at least 2"));
        }
        if !(self.mu_low > 0.0 && self.mu_low < self.mu_high) {
            return Err(Error::invalid("mu_low/mu_high", "need 0 < mu_low < mu_high"));
        }
        if !(self.mu_pivot_crit > 0.0) {
            return Err(Error::invalid("mu_pivot_crit", "must be > 0"));
        }
        if !(self.max_opening.si() > 0.0) {
            return Err(Error::invalid("max_opening", "must be > 0"));
        }
        Ok(())
    }

    pub fn mu(&self, state: FrictionState) -> f64 {
        match state {
            FrictionState::High => self.mu_high,
            FrictionState::Low => self.mu_low,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FrictionState {
    #[default]
    High,
    Low,
}

impl fmt::Display for FrictionState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FrictionState::High => "high",
            FrictionState::Low => "low",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GraspScene {
    pub object_width: Length,
    pub object_mass: Mass,
    pub friction_state: FrictionState,
}

impl GraspScene {
    pub fn validate(&self) -> Result<()> {
        if !(self.object_width.si() > 0.0) {
            return Err(Error::invalid("object_width", "must be > 0"));
        }
        if !(self.object_mass.si() >= 0.0) {
            return Err(Error::invalid("object_mass", "must be >= 0"));
        }
        Ok(())
    }
}

/// Liftable weight for a given per-finger normal force.
pub fn payload(tip: Force, hand: &HandConfig, mu: f64) -> Force {
    tip * (hand.n_fingers as f64 * mu)
}

pub fn can_grasp(scene: &GraspScene, hand: &HandConfig, tip: Force, g: f64) -> bool {
    let weight = Force::weight(scene.object_mass, g);
    scene.object_width < hand.max_opening && weight <= payload(tip, hand, hand.mu(scene.friction_state))
}

/// Tracks lubrication within one grasp episode.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct GraspEpisode {
    lubricated: bool,
}

impl GraspEpisode {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn record_injection(&mut self, active: bool) {
        self.lubricated |= active;
    }

    /// Opening the hand ends the episode; the lubricant evaporates.
    pub fn release(&mut self) {
        self.lubricated = false;
    }

    pub fn state(&self) -> FrictionState {
        if self.lubricated {
            FrictionState::Low
        } else {
            FrictionState::High
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EpisodeEvent {
    Injection(bool),
    Release,
}

/// Friction state after replaying `events` from a fresh episode.
pub fn friction_state<I>(events: I) -> FrictionState
where
    I: IntoIterator<Item = EpisodeEvent>,
{
    let mut ep = GraspEpisode::new();
    for e in events {
        match e {
            EpisodeEvent::Injection(active) => ep.record_injection(active),
            EpisodeEvent::Release => ep.release(),
        }
    }
    ep.state()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SlipOutcome {
    SlidesInGrip,
    HeldFixed,
}

pub fn placement_slip(scene: &GraspScene, hand: &HandConfig, tip: Force, g: f64) -> SlipOutcome {
    let weight = Force::weight(scene.object_mass, g);
    if weight > payload(tip, hand, hand.mu(scene.friction_state)) {
        SlipOutcome::SlidesInGrip
    } else {
        SlipOutcome::HeldFixed
    }
}

/// Rotational slip at the fingertips is possible only on a slippery surface.
pub fn pivot_feasible(mu: f64, hand: &HandConfig) -> bool {
    mu <= hand.mu_pivot_crit
}

/// Placement disturbance proxies.
///
/// A gripped object is released at `release_height` above the table, since
/// the arched fingertip path keeps the tips off the surface. A sliding
/// object settles onto the table inside the grip before the fingers open.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PlacementOutcome {
    pub slip: SlipOutcome,
    /// Translational displacement proxy.
    pub delta_d: Length,
    /// Whether the drop is expected to tilt the object.
    pub rotation_disturbed: bool,
}

pub fn place_object(scene: &GraspScene, hand: &HandConfig, tip: Force, g: f64, release_height: Length) -> PlacementOutcome {
    let slip = placement_slip(scene, hand, tip, g);
    match slip {
        SlipOutcome::SlidesInGrip => PlacementOutcome {
            slip,
            delta_d: Length::ZERO,
            rotation_disturbed: false,
        },
        SlipOutcome::HeldFixed => PlacementOutcome {
            slip,
            delta_d: release_height,
            rotation_disturbed: release_height.si() > 0.0,
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    const G: f64 = 9.81;

    fn scene(width_m: f64, mass_kg: f64, friction_state: FrictionState) -> GraspScene {
        GraspScene {
            object_width: Length::from_si(width_m),
            object_mass: Mass::from_si(mass_kg),
            friction_state,
        }
    }

    #[test]
    fn payload_examples() {
        let hand = HandConfig::default();
        let tip = Force::from_si(0.38);
        assert_relative_eq!(payload(tip, &hand, 2.0).si(), 1.52, max_relative = 1e-12);
        assert_eq!(payload(Force::ZERO, &hand, 2.0).si(), 0.0);
        assert_relative_eq!(payload(tip, &hand, 1.0).si(), payload(tip, &hand, 2.0).si() / 2.0, max_relative = 1e-12);
    }

    #[test]
    fn payload_monotone() {
        let mut hand = HandConfig::default();
        let base = payload(Force::from_si(0.3), &hand, 1.0);
        assert!(payload(Force::from_si(0.31), &hand, 1.0) > base);
        assert!(payload(Force::from_si(0.3), &hand, 1.1) > base);
        hand.n_fingers = 3;
        assert!(payload(Force::from_si(0.3), &hand, 1.0) > base);
    }

    #[test]
    fn can_grasp_examples() {
        let hand = HandConfig::default();
        let tip = Force::from_si(0.38);
        assert!(!can_grasp(&scene(0.073, 0.01, FrictionState::High), &hand, tip, G));
        assert!(can_grasp(&scene(0.072, 0.01, FrictionState::High), &hand, tip, G));
        assert!(can_grasp(&scene(0.05, 0.1, FrictionState::High), &hand, tip, G));
        assert!(!can_grasp(&scene(0.05, 0.2, FrictionState::High), &hand, tip, G));
    }

    #[test]
    fn friction_history() {
        use EpisodeEvent::*;
        assert_eq!(friction_state([]), FrictionState::High);
        assert_eq!(friction_state([Injection(false), Injection(true), Injection(false)]), FrictionState::Low);
        assert_eq!(friction_state([Injection(true), Release]), FrictionState::High);
        assert_eq!(friction_state([Injection(true), Release, Injection(false)]), FrictionState::High);
        assert_eq!(
            friction_state([Injection(true), Injection(true), Injection(true)]),
            friction_state([Injection(true)])
        );
    }

    #[test]
    fn placement_slip_examples() {
        let hand = HandConfig::default();
        let tip = Force::from_si(0.38);
        assert_eq!(placement_slip(&scene(0.05, 0.12, FrictionState::Low), &hand, tip, G), SlipOutcome::SlidesInGrip);
        assert_eq!(placement_slip(&scene(0.05, 0.12, FrictionState::High), &hand, tip, G), SlipOutcome::HeldFixed);
        assert_eq!(placement_slip(&scene(0.05, 0.0, FrictionState::Low), &hand, tip, G), SlipOutcome::HeldFixed);
    }

    #[test]
    fn pivot_examples() {
        let hand = HandConfig::default();
        assert!(pivot_feasible(hand.mu_low, &hand));
        assert!(!pivot_feasible(hand.mu_high, &hand));
        assert!(pivot_feasible(hand.mu_pivot_crit, &hand));
    }

    #[test]
    fn lubricated_placement_disturbs_less() {
        let hand = HandConfig::default();
        let tip = Force::from_si(0.38);
        let h = Length::from_mm(5.0);
        let dry = place_object(&scene(0.05, 0.12, FrictionState::High), &hand, tip, G, h);
        let wet = place_object(&scene(0.05, 0.12, FrictionState::Low), &hand, tip, G, h);
        assert!(wet.delta_d <= dry.delta_d);
        assert!(!wet.rotation_disturbed || dry.rotation_disturbed);
        assert!(dry.rotation_disturbed);
    }

    #[test]
    fn validation() {
        assert!(HandConfig::default().validate().is_ok());
        let bad = HandConfig {
            mu_low: 3.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        assert!(scene(0.0, 0.1, FrictionState::High).validate().is_err());
    }
}
