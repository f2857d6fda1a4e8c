use std::path::Path;

use serde::{Deserialize, Serialize};

use super::metrics::{Normalizers, Stat};
use super::methods::MethodId;
use super::runner::Setup;
use crate::env::{Environment, RewardScales};
use crate::error::{Error, Result};
use crate::model::{DroneSpec, EnvironmentConstants, ScenarioConfig};

pub const REPORT_SCHEMA: &str = "skyfleet.report/1";
pub const COMBINED_COST_SCALE: &str =
    "per-batch min-max normalised mean energy plus normalised average delay; 0 = best on both, 2 = worst on both";
pub const ALPHA_NOTE: &str =
    "alpha weights energy against delay in the reward; 0.5 is the default, 0.2 is a common alternative for the basic scenario";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub method: MethodId,
    pub repetitions: usize,
    /// kJ per drone per episode.
    pub mean_energy_kj: Stat,
    /// Hours per request.
    pub avg_delay_h: Stat,
    pub combined_cost: Stat,
    /// Gini of per-area delay totals.
    pub delay_unfairness: Stat,
    pub avg_early_arrival_h: Stat,
    pub delivered_fraction: Stat,
    /// kg loaded per depot, averaged over repetitions.
    pub depot_load_kg: Vec<f64>,
    /// Grams of CO2 per drone, when a carbon intensity is configured.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub mean_co2_g: Option<Stat>,
    pub violations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportHeader {
    pub schema: String,
    pub scenario: ScenarioConfig,
    pub drone: DroneSpec,
    pub consts: EnvironmentConstants,
    pub alpha: f64,
    pub alpha_note: String,
    pub battery_capacity_j: Option<f64>,
    pub reward_scales: Option<RewardScales>,
    pub combined_cost_scale: String,
    pub normalizers: Normalizers,
    pub training_episodes: usize,
    pub running_time: String,
}

impl ReportHeader {
    pub fn new(setup: &Setup, norm: &Normalizers, env: Option<&Environment<'_>>, training_episodes: usize) -> Self {
        ReportHeader {
            schema: REPORT_SCHEMA.into(),
            scenario: setup.run.scenario.clone(),
            drone: setup.run.drone,
            consts: setup.run.consts,
            alpha: setup.run.scenario.alpha,
            alpha_note: ALPHA_NOTE.into(),
            battery_capacity_j: env.map(|e| e.battery_capacity),
            reward_scales: env.map(|e| e.scales),
            combined_cost_scale: COMBINED_COST_SCALE.into(),
            normalizers: *norm,
            training_episodes,
            running_time: "wall-clock planning time is written to timing.json".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub header: ReportHeader,
    pub methods: Vec<MetricsReport>,
}

impl ComparisonReport {
    pub fn get(&self, m: MethodId) -> Option<&MetricsReport> {
        self.methods.iter().find(|r| r.method == m)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Checks the structural constraints a consumer relies on.
    pub fn validate(&self) -> Result<()> {
        if self.header.schema != REPORT_SCHEMA {
            return Err(Error::Parse(format!("unexpected schema {}", self.header.schema)));
        }
        for m in &self.methods {
            let g = m.delay_unfairness.mean;
            if !(0.0..=1.0).contains(&g) {
                return Err(Error::Parse(format!("{}: Gini {g} outside [0, 1]", m.method)));
            }
            let c = m.combined_cost.mean;
            if !(-1e-12..=2.0 + 1e-12).contains(&c) {
                return Err(Error::Parse(format!("{}: combined cost {c} outside [0, 2]", m.method)));
            }
            if m.depot_load_kg.len() != self.header.scenario.num_depots {
                return Err(Error::Parse(format!("{}: depot load length mismatch", m.method)));
            }
        }
        Ok(())
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        write_json(path, &self.to_json()?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodTiming {
    pub method: MethodId,
    /// Seconds of planner and policy time per window.
    pub avg_running_time_s: Stat,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TimingReport {
    pub methods: Vec<MethodTiming>,
}

impl TimingReport {
    pub fn get(&self, m: MethodId) -> Option<&MethodTiming> {
        self.methods.iter().find(|r| r.method == m)
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        write_json(path, &serde_json::to_string_pretty(self)?)
    }
}

pub(crate) fn write_json(path: impl AsRef<Path>, text: &str) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}
