//! Method matrix, evaluation metrics and run orchestration.

pub mod cli;
mod methods;
mod metrics;
mod report;
mod runner;

pub use methods::{GlobalController, MethodId};
pub use metrics::{combined_cost, depot_load, early_arrival, gini, Normalizers, Stat};
pub use report::{ComparisonReport, MethodTiming, MetricsReport, ReportHeader, TimingReport, REPORT_SCHEMA};
pub use runner::{
    compare, derive_seed, evaluate_method, summarize, train_method, Comparison, MethodRuns, Setup, TrainedPolicy,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub reps: usize,
    /// Overrides the reward's delay scale (hours).
    pub delay_scale_hours: Option<f64>,
    /// Overrides the reward's energy scale (joules).
    pub energy_scale_j: Option<f64>,
    /// Carbon intensity for the optional CO2 column.
    pub co2_g_per_kwh: Option<f64>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            reps: 10,
            delay_scale_hours: None,
            energy_scale_j: None,
            co2_g_per_kwh: None,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.reps == 0 {
            return Err(Error::Config("reps must be >= 1".into()));
        }
        for (name, v) in [("delay_scale_hours", self.delay_scale_hours), ("energy_scale_j", self.energy_scale_j)] {
            if let Some(v) = v {
                if !(v > 0.0) {
                    return Err(Error::Config(format!("{name} must be positive")));
                }
            }
        }
        if let Some(g) = self.co2_g_per_kwh {
            if !(g >= 0.0) {
                return Err(Error::Config("co2_g_per_kwh must be non-negative".into()));
            }
        }
        Ok(())
    }
}
