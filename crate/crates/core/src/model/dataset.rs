use std::collections::BTreeSet;
use std::path::Path;

use rand::distr::weighted::WeightedIndex;
use rand::distr::{Distribution, Uniform};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Normal;
use serde::{Deserialize, Serialize};

use super::{Point2D, Request, ScenarioConfig};
use crate::error::{Error, Result};

#[derive(Debug, Serialize, Deserialize)]
struct Row {
    id: u64,
    x_m: f64,
    y_m: f64,
    parcel_mass_kg: f64,
    demand_window: u32,
}

/// Reads a request CSV (`id,x_m,y_m,parcel_mass_kg,demand_window`).
///
/// Rows are validated against the scenario bounds, window count and the
/// airframe payload; the result is sorted by demand window, then id.
pub fn load_requests(
    path: impl AsRef<Path>,
    scenario: &ScenarioConfig,
    max_payload: f64,
) -> Result<Vec<Request>> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(file);

    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for (i, row) in reader.deserialize::<Row>().enumerate() {
        // header is line 1
        let line = i + 2;
        let row = row.map_err(|e| Error::MalformedRow {
            row: line,
            reason: e.to_string(),
        })?;
        if !seen.insert(row.id) {
            return Err(Error::DuplicateId(row.id));
        }
        let req = Request::new(
            row.id,
            Point2D::new(row.x_m, row.y_m),
            row.parcel_mass_kg,
            row.demand_window,
        );
        req.validate(scenario, max_payload)
            .map_err(|e| Error::MalformedRow {
                row: line,
                reason: e.to_string(),
            })?;
        out.push(req);
    }
    out.sort_by_key(|r| (r.demand_window, r.id));
    Ok(out)
}

pub fn write_requests(path: impl AsRef<Path>, requests: &[Request]) -> Result<()> {
    let path = path.as_ref();
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = csv::Writer::from_writer(file);
    for r in requests {
        w.serialize(Row {
            id: r.id,
            x_m: r.location.x,
            y_m: r.location.y,
            parcel_mass_kg: r.parcel_mass,
            demand_window: r.demand_window,
        })?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

/// Spatial demand model: a weighted mixture of isotropic Gaussian clusters.
///
/// The layout stands for the city's geography and stays fixed for a
/// scenario; individual days are sampled from it with their own seeds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterLayout {
    pub centers: Vec<Point2D>,
    pub weights: Vec<f64>,
    pub sigma: f64,
}

impl ClusterLayout {
    pub fn random<R: Rng>(config: &ScenarioConfig, cluster_count: usize, rng: &mut R) -> Self {
        let b = config.bounds;
        let margin_x = config.cluster_sigma_m.min(b.width / 4.0);
        let margin_y = config.cluster_sigma_m.min(b.height / 4.0);
        let centers = (0..cluster_count)
            .map(|_| {
                Point2D::new(
                    rng.random_range(margin_x..=b.width - margin_x),
                    rng.random_range(margin_y..=b.height - margin_y),
                )
            })
            .collect();
        let weights = (0..cluster_count).map(|_| rng.random_range(0.5..1.5)).collect();
        ClusterLayout {
            centers,
            weights,
            sigma: config.cluster_sigma_m,
        }
    }

    pub fn from_seed(config: &ScenarioConfig, cluster_count: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Self::random(config, cluster_count, &mut rng)
    }

    pub fn sample_point<R: Rng>(&self, config: &ScenarioConfig, rng: &mut R) -> Point2D {
        let pick = WeightedIndex::new(&self.weights).expect("cluster weights are positive");
        let c = self.centers[pick.sample(rng)];
        let noise = Normal::new(0.0, self.sigma).expect("sigma is positive");
        for _ in 0..64 {
            let p = Point2D::new(c.x + noise.sample(rng), c.y + noise.sample(rng));
            if config.bounds.contains(p) {
                return p;
            }
        }
        config.bounds.clamp(c)
    }

    /// Exactly `per_window` requests in every window `1..=T`, ids assigned
    /// consecutively from 1.
    pub fn sample_requests<R: Rng>(
        &self,
        config: &ScenarioConfig,
        max_payload: f64,
        per_window: usize,
        rng: &mut R,
    ) -> Vec<Request> {
        let hi = config.parcel_mass_max.min(max_payload);
        let lo = config.parcel_mass_min.min(hi);
        let mass = Uniform::new_inclusive(lo, hi).expect("mass range is ordered");
        let mut out = Vec::with_capacity(per_window * config.num_windows as usize);
        let mut next_id = 1u64;
        for window in 1..=config.num_windows {
            for _ in 0..per_window {
                let location = self.sample_point(config, rng);
                out.push(Request::new(next_id, location, mass.sample(rng), window));
                next_id += 1;
            }
        }
        out
    }

    pub fn sample_day(
        &self,
        config: &ScenarioConfig,
        max_payload: f64,
        per_window: usize,
        seed: u64,
    ) -> Vec<Request> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        self.sample_requests(config, max_payload, per_window, &mut rng)
    }
}

/// Synthetic request set: cluster layout and requests both drawn from one
/// generator seeded with `config.rng_seed`.
pub fn generate_synthetic(
    config: &ScenarioConfig,
    max_payload: f64,
    cluster_count: usize,
    requests_per_window: usize,
) -> Result<Vec<Request>> {
    config.validate()?;
    if cluster_count < 1 {
        return Err(Error::Config("cluster_count must be >= 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.rng_seed);
    let layout = ClusterLayout::random(config, cluster_count, &mut rng);
    Ok(layout.sample_requests(config, max_payload, requests_per_window, &mut rng))
}
