use serde::{Deserialize, Serialize};

use crate::env::TraceRow;

/// Gini coefficient by the mean absolute difference:
/// `sum_ij |x_i - x_j| / (2 n^2 mean)`. All-zero (or empty) input gives 0.
pub fn gini(values: &[f64]) -> f64 {
    let n = values.len();
    let total: f64 = values.iter().sum();
    if n == 0 || total <= 0.0 {
        return 0.0;
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    // sum_ij |x_i - x_j| = 2 * sum_i (2i - n + 1) x_(i)
    let weighted: f64 = sorted
        .iter()
        .enumerate()
        .map(|(i, x)| (2.0 * i as f64 - n as f64 + 1.0) * x)
        .sum();
    let g = 2.0 * weighted / (2.0 * n as f64 * total);
    g.clamp(0.0, 1.0)
}

/// Per-batch min-max scaling of each component, summed. A component with
/// no spread contributes 0.
pub fn combined_cost(points: &[(f64, f64)]) -> (Vec<f64>, Normalizers) {
    let norm = Normalizers::from_points(points);
    (points.iter().map(|&(e, d)| norm.apply(e, d)).collect(), norm)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Normalizers {
    pub energy_min: f64,
    pub energy_max: f64,
    pub delay_min: f64,
    pub delay_max: f64,
}

impl Normalizers {
    pub fn from_points(points: &[(f64, f64)]) -> Self {
        let fold = |f: fn(&(f64, f64)) -> f64| {
            points
                .iter()
                .map(f)
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
        };
        let (energy_min, energy_max) = fold(|p| p.0);
        let (delay_min, delay_max) = fold(|p| p.1);
        Normalizers {
            energy_min,
            energy_max,
            delay_min,
            delay_max,
        }
    }

    pub fn apply(&self, energy: f64, delay: f64) -> f64 {
        scale(energy, self.energy_min, self.energy_max) + scale(delay, self.delay_min, self.delay_max)
    }
}

fn scale(v: f64, lo: f64, hi: f64) -> f64 {
    if hi > lo {
        (v - lo) / (hi - lo)
    } else {
        0.0
    }
}

/// Parcel mass loaded at each start depot.
pub fn depot_load(trace: &[TraceRow], num_depots: usize) -> Vec<f64> {
    let mut load = vec![0.0; num_depots];
    for r in trace {
        load[r.start_depot] += r.parcel_mass_kg;
    }
    load
}

/// Mean hours by which delivered requests beat their demanded window, over
/// `(demand_window, delivered_window)` pairs.
pub fn early_arrival(deliveries: &[(u32, u32)], window_hours: f64) -> f64 {
    if deliveries.is_empty() {
        return 0.0;
    }
    let sum: f64 = deliveries
        .iter()
        .map(|&(due, done)| due.saturating_sub(done) as f64 * window_hours)
        .sum();
    sum / deliveries.len() as f64
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Stat {
    pub mean: f64,
    pub std: f64,
}

impl Stat {
    /// Mean and sample standard deviation.
    pub fn of(values: &[f64]) -> Self {
        let n = values.len();
        if n == 0 {
            return Stat::default();
        }
        let mean = values.iter().sum::<f64>() / n as f64;
        let std = if n > 1 {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
        } else {
            0.0
        };
        Stat { mean, std }
    }
}
