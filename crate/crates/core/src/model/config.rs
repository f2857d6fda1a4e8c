use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Bounds, DroneSpec, EnvironmentConstants, ScenarioConfig};
use crate::error::{Error, Result};
use crate::experiments::ExperimentConfig;
use crate::learning::{CriticKind, LearningConfig};

/// Flat `key = value` scenario file. Every key is optional; unknown keys
/// are rejected.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub width: Option<f64>,
    pub height: Option<f64>,
    pub num_depots: Option<usize>,
    pub num_drones: Option<usize>,
    pub num_windows: Option<u32>,
    pub window_duration_s: Option<f64>,
    pub alpha: Option<f64>,
    pub max_parcels: Option<usize>,
    pub rng_seed: Option<u64>,
    pub k_neighbors: Option<usize>,
    pub parcel_mass_min: Option<f64>,
    pub parcel_mass_max: Option<f64>,
    pub cluster_count: Option<usize>,
    pub cluster_sigma_m: Option<f64>,
    pub requests_per_window: Option<usize>,
    pub release_lead_windows: Option<u32>,

    pub body_mass: Option<f64>,
    pub battery_mass: Option<f64>,
    pub rotor_diameter: Option<f64>,
    pub rotor_count: Option<u32>,
    pub ground_speed: Option<f64>,
    pub power_efficiency: Option<f64>,
    pub max_payload: Option<f64>,
    pub max_range: Option<f64>,

    pub gravity: Option<f64>,
    pub air_density: Option<f64>,
    pub pitch_deg: Option<f64>,

    pub gamma: Option<f64>,
    pub clip_epsilon: Option<f64>,
    pub actor_lr: Option<f64>,
    pub critic_lr: Option<f64>,
    pub episodes: Option<usize>,
    pub batch_size: Option<usize>,
    pub buffer_capacity: Option<usize>,
    pub updates_per_episode: Option<usize>,
    pub hidden_size: Option<usize>,
    pub hidden_layers: Option<usize>,
    pub recurrent: Option<bool>,
    pub unroll: Option<usize>,
    pub critic: Option<String>,
    pub grad_clip: Option<f64>,
    pub normalize_advantages: Option<bool>,

    pub reps: Option<usize>,
    pub delay_scale_hours: Option<f64>,
    pub energy_scale_j: Option<f64>,
    pub co2_g_per_kwh: Option<f64>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    /// Applies the set keys on top of defaults and validates the result.
    pub fn resolve(&self) -> Result<RunConfig> {
        let mut rc = RunConfig::default();
        macro_rules! set {
            ($target:expr, $field:ident) => {
                if let Some(v) = self.$field.clone() {
                    $target = v;
                }
            };
        }
        let s = &mut rc.scenario;
        let mut bounds = Bounds::default();
        set!(bounds.width, width);
        set!(bounds.height, height);
        s.bounds = bounds;
        set!(s.num_depots, num_depots);
        set!(s.num_drones, num_drones);
        set!(s.num_windows, num_windows);
        set!(s.window_duration_s, window_duration_s);
        set!(s.alpha, alpha);
        set!(s.max_parcels, max_parcels);
        set!(s.rng_seed, rng_seed);
        set!(s.k_neighbors, k_neighbors);
        set!(s.parcel_mass_min, parcel_mass_min);
        set!(s.parcel_mass_max, parcel_mass_max);
        set!(s.cluster_count, cluster_count);
        set!(s.cluster_sigma_m, cluster_sigma_m);
        set!(s.requests_per_window, requests_per_window);
        set!(s.release_lead_windows, release_lead_windows);

        let d = &mut rc.drone;
        set!(d.body_mass, body_mass);
        set!(d.battery_mass, battery_mass);
        set!(d.rotor_diameter, rotor_diameter);
        set!(d.rotor_count, rotor_count);
        set!(d.ground_speed, ground_speed);
        set!(d.power_efficiency, power_efficiency);
        set!(d.max_payload, max_payload);
        set!(d.max_range, max_range);

        let c = &mut rc.consts;
        set!(c.gravity, gravity);
        set!(c.air_density, air_density);
        if let Some(deg) = self.pitch_deg {
            c.pitch_angle = deg.to_radians();
        }

        let l = &mut rc.learning;
        set!(l.gamma, gamma);
        set!(l.clip_epsilon, clip_epsilon);
        set!(l.actor_lr, actor_lr);
        set!(l.critic_lr, critic_lr);
        set!(l.episodes, episodes);
        set!(l.batch_size, batch_size);
        set!(l.buffer_capacity, buffer_capacity);
        set!(l.updates_per_episode, updates_per_episode);
        set!(l.hidden_size, hidden_size);
        set!(l.hidden_layers, hidden_layers);
        set!(l.recurrent, recurrent);
        set!(l.unroll, unroll);
        set!(l.grad_clip, grad_clip);
        set!(l.normalize_advantages, normalize_advantages);
        if let Some(kind) = &self.critic {
            l.critic = match kind.to_ascii_lowercase().as_str() {
                "q" => CriticKind::Q,
                "v" => CriticKind::V,
                other => return Err(Error::Config(format!("critic must be `q` or `v`, got `{other}`"))),
            };
        }

        let e = &mut rc.experiment;
        set!(e.reps, reps);
        e.delay_scale_hours = self.delay_scale_hours.or(e.delay_scale_hours);
        e.energy_scale_j = self.energy_scale_j.or(e.energy_scale_j);
        e.co2_g_per_kwh = self.co2_g_per_kwh.or(e.co2_g_per_kwh);

        rc.validate()?;
        Ok(rc)
    }
}

/// Fully resolved run configuration.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub scenario: ScenarioConfig,
    pub drone: DroneSpec,
    pub consts: EnvironmentConstants,
    pub learning: LearningConfig,
    pub experiment: ExperimentConfig,
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        self.scenario.validate()?;
        self.drone.validate()?;
        self.consts.validate()?;
        self.learning.validate()?;
        self.experiment.validate()?;
        if self.scenario.parcel_mass_min > self.drone.max_payload {
            return Err(Error::Config("parcel_mass_min exceeds max_payload".into()));
        }
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        ConfigFile::load(path)?.resolve()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        assert_eq!(ConfigFile::parse("").unwrap().resolve().unwrap(), RunConfig::default());
    }

    #[test]
    fn keys_override() {
        let rc = ConfigFile::parse("num_drones = 3\nalpha = 0.2\npitch_deg = 0\ncritic = \"v\"\n")
            .unwrap()
            .resolve()
            .unwrap();
        assert_eq!(rc.scenario.num_drones, 3);
        assert_eq!(rc.scenario.alpha, 0.2);
        assert_eq!(rc.consts.pitch_angle, 0.0);
        assert_eq!(rc.learning.critic, CriticKind::V);
    }

    #[test]
    fn rejects_unknown_and_invalid() {
        assert!(ConfigFile::parse("bogus = 1").is_err());
        assert!(ConfigFile::parse("alpha = 2.0").unwrap().resolve().is_err());
        assert!(ConfigFile::parse("num_depots = 16\nk_neighbors = 16").unwrap().resolve().is_err());
        assert!(ConfigFile::parse("critic = \"w\"").unwrap().resolve().is_err());
    }
}
