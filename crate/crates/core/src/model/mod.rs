//! Domain types shared by every other module: map geometry, customer
//! requests, airframe constants and the scenario description.

mod config;
mod dataset;

pub use config::{ConfigFile, RunConfig};
pub use dataset::{generate_synthetic, load_requests, write_requests, ClusterLayout};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point2D {
    pub x: f64,
    pub y: f64,
}

impl Point2D {
    pub const fn new(x: f64, y: f64) -> Self {
        Point2D { x, y }
    }

    pub fn distance(&self, other: &Point2D) -> f64 {
        euclidean_distance(*self, *other)
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

/// Straight-line distance in meters.
pub fn euclidean_distance(a: Point2D, b: Point2D) -> f64 {
    (a.x - b.x).hypot(a.y - b.y)
}

/// Rectangular map `[0, width] x [0, height]`, meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    pub width: f64,
    pub height: f64,
}

impl Bounds {
    pub fn contains(&self, p: Point2D) -> bool {
        p.is_finite() && p.x >= 0.0 && p.y >= 0.0 && p.x <= self.width && p.y <= self.height
    }

    pub fn clamp(&self, p: Point2D) -> Point2D {
        Point2D::new(p.x.clamp(0.0, self.width), p.y.clamp(0.0, self.height))
    }

    pub fn diagonal(&self) -> f64 {
        self.width.hypot(self.height)
    }
}

impl Default for Bounds {
    fn default() -> Self {
        Bounds {
            width: 10_000.0,
            height: 10_000.0,
        }
    }
}

pub type RequestId = u64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Status {
    Pending,
    Delivered,
}

/// A customer node: where, how heavy, and in which window it is due.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Request {
    pub id: RequestId,
    pub location: Point2D,
    pub parcel_mass: f64,
    /// Demanded window `t_i`, 1-based.
    pub demand_window: u32,
    pub status: Status,
}

impl Request {
    pub fn new(id: RequestId, location: Point2D, parcel_mass: f64, demand_window: u32) -> Self {
        Request {
            id,
            location,
            parcel_mass,
            demand_window,
            status: Status::Pending,
        }
    }

    pub fn validate(&self, scenario: &ScenarioConfig, max_payload: f64) -> Result<()> {
        let bad = |reason: String| Error::InvalidRequest {
            id: self.id,
            reason,
        };
        if !scenario.bounds.contains(self.location) {
            return Err(bad(format!(
                "location ({}, {}) outside map {}x{}",
                self.location.x, self.location.y, scenario.bounds.width, scenario.bounds.height
            )));
        }
        if !(self.parcel_mass > 0.0 && self.parcel_mass <= max_payload) {
            return Err(bad(format!(
                "parcel mass {} kg not in (0, {max_payload}]",
                self.parcel_mass
            )));
        }
        if self.demand_window < 1 || self.demand_window > scenario.num_windows {
            return Err(bad(format!(
                "demand window {} not in [1, {}]",
                self.demand_window, scenario.num_windows
            )));
        }
        Ok(())
    }
}

/// Airframe constants. Defaults follow the reference drone: 2 kg body,
/// 1 kg battery, four 0.5 m rotors, 10 m/s, 80 % efficiency, 2.5 kg
/// payload and 3 km range.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DroneSpec {
    pub body_mass: f64,
    pub battery_mass: f64,
    pub rotor_diameter: f64,
    pub rotor_count: u32,
    pub ground_speed: f64,
    pub power_efficiency: f64,
    pub max_payload: f64,
    pub max_range: f64,
}

impl Default for DroneSpec {
    fn default() -> Self {
        DroneSpec {
            body_mass: 2.0,
            battery_mass: 1.0,
            rotor_diameter: 0.5,
            rotor_count: 4,
            ground_speed: 10.0,
            power_efficiency: 0.8,
            max_payload: 2.5,
            max_range: 3_000.0,
        }
    }
}

impl DroneSpec {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("body_mass", self.body_mass),
            ("battery_mass", self.battery_mass),
            ("rotor_diameter", self.rotor_diameter),
            ("ground_speed", self.ground_speed),
            ("max_payload", self.max_payload),
            ("max_range", self.max_range),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("drone {name} must be positive, got {v}")));
            }
        }
        if self.rotor_count == 0 {
            return Err(Error::Config("drone rotor_count must be positive".into()));
        }
        if !(self.power_efficiency > 0.0 && self.power_efficiency <= 1.0) {
            return Err(Error::Config(format!(
                "power_efficiency must be in (0, 1], got {}",
                self.power_efficiency
            )));
        }
        Ok(())
    }

    pub fn frame_mass(&self) -> f64 {
        self.body_mass + self.battery_mass
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnvironmentConstants {
    pub gravity: f64,
    pub air_density: f64,
    /// Forward pitch, radians.
    pub pitch_angle: f64,
}

impl Default for EnvironmentConstants {
    fn default() -> Self {
        EnvironmentConstants {
            gravity: 9.81,
            air_density: 1.225,
            pitch_angle: 10f64.to_radians(),
        }
    }
}

impl EnvironmentConstants {
    pub fn validate(&self) -> Result<()> {
        if !(self.gravity > 0.0) {
            return Err(Error::Config("gravity must be positive".into()));
        }
        if !(self.air_density > 0.0) {
            return Err(Error::Config("air_density must be positive".into()));
        }
        if !(self.pitch_angle >= 0.0 && self.pitch_angle < std::f64::consts::FRAC_PI_2) {
            return Err(Error::Config(format!(
                "pitch_angle must be in [0, pi/2), got {}",
                self.pitch_angle
            )));
        }
        Ok(())
    }
}

/// Everything that defines one delivery scenario apart from the airframe.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub bounds: Bounds,
    pub num_depots: usize,
    pub num_drones: usize,
    pub num_windows: u32,
    pub window_duration_s: f64,
    /// Delay/energy trade-off weight in the reward.
    pub alpha: f64,
    /// Most parcels a drone will consider per window.
    pub max_parcels: usize,
    pub rng_seed: u64,
    /// Neighbouring areas reachable by a flight-range action (the action set
    /// is this plus "stay").
    pub k_neighbors: usize,
    pub parcel_mass_min: f64,
    pub parcel_mass_max: f64,
    pub cluster_count: usize,
    pub cluster_sigma_m: f64,
    pub requests_per_window: usize,
    /// Windows before `t_i` at which a request becomes visible. Zero means a
    /// request appears exactly in its demanded window.
    pub release_lead_windows: u32,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            bounds: Bounds::default(),
            num_depots: 16,
            num_drones: 8,
            num_windows: 12,
            window_duration_s: 1_800.0,
            alpha: 0.5,
            max_parcels: 4,
            rng_seed: 1,
            k_neighbors: 3,
            parcel_mass_min: 0.2,
            parcel_mass_max: 1.0,
            cluster_count: 6,
            cluster_sigma_m: 900.0,
            requests_per_window: 40,
            release_lead_windows: 0,
        }
    }
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::Config(m));
        if !(self.bounds.width > 0.0 && self.bounds.height > 0.0) {
            return fail("map bounds must be positive".into());
        }
        if self.num_depots < 1 {
            return fail("num_depots must be >= 1".into());
        }
        if self.num_windows < 1 {
            return fail("num_windows must be >= 1".into());
        }
        if !(self.window_duration_s > 0.0) {
            return fail("window_duration_s must be positive".into());
        }
        if !(0.0..=1.0).contains(&self.alpha) {
            return fail(format!("alpha must be in [0, 1], got {}", self.alpha));
        }
        if self.k_neighbors >= self.num_depots && !(self.num_depots == 1 && self.k_neighbors == 0) {
            return fail(format!(
                "k_neighbors {} must be below num_depots {}",
                self.k_neighbors, self.num_depots
            ));
        }
        if self.max_parcels < 1 {
            return fail("max_parcels must be >= 1".into());
        }
        if self.max_parcels > 16 {
            return fail("max_parcels above 16 makes plan enumeration intractable".into());
        }
        if !(self.parcel_mass_min > 0.0 && self.parcel_mass_min <= self.parcel_mass_max) {
            return fail(format!(
                "parcel mass range [{}, {}] invalid",
                self.parcel_mass_min, self.parcel_mass_max
            ));
        }
        if self.cluster_count < 1 {
            return fail("cluster_count must be >= 1".into());
        }
        if !(self.cluster_sigma_m > 0.0) {
            return fail("cluster_sigma_m must be positive".into());
        }
        Ok(())
    }

    /// Hours per window.
    pub fn window_hours(&self) -> f64 {
        self.window_duration_s / 3_600.0
    }

    /// Size of the flight-range action set: stay plus reachable neighbours.
    pub fn action_count(&self) -> usize {
        self.k_neighbors.min(self.num_depots.saturating_sub(1)) + 1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn distance_examples() {
        let o = Point2D::new(0.0, 0.0);
        assert_eq!(euclidean_distance(o, Point2D::new(3.0, 4.0)), 5.0);
        let p = Point2D::new(12.5, -3.0);
        assert_eq!(euclidean_distance(p, p), 0.0);
        assert!((euclidean_distance(o, Point2D::new(1.0, 1.0)) - 1.414_213_56).abs() < 1e-8);
    }

    #[test]
    fn scenario_rejects_bad_alpha() {
        let cfg = ScenarioConfig {
            alpha: 1.5,
            ..Default::default()
        };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn default_action_count_is_four() {
        assert_eq!(ScenarioConfig::default().action_count(), 4);
    }

    #[test]
    fn drone_spec_efficiency_bounds() {
        let mut spec = DroneSpec::default();
        assert!(spec.validate().is_ok());
        spec.power_efficiency = 1.2;
        assert!(spec.validate().is_err());
    }
}
