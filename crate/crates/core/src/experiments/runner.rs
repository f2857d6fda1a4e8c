use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::metrics::{combined_cost, gini, Normalizers, Stat};
use super::methods::{GlobalController, MethodId};
use super::report::{ComparisonReport, MethodTiming, MetricsReport, ReportHeader, TimingReport};
use crate::env::{run_episode, Controller, EpisodeOutcome, Environment};
use crate::error::{Error, Result};
use crate::learning::{
    train, ActionMode, Agent, CurvePoint, FlightRangeController, LearningConfig, PlanChoiceController,
};
use crate::model::{ClusterLayout, Point2D, Request, RunConfig};
use crate::segmentation::{grid_segment, kmeans, MapKind, ServiceMap};

const TAG_HISTORY: u64 = 1;
const TAG_TRAIN_DAY: u64 = 2;
const TAG_EVAL_DAY: u64 = 3;
const TAG_EVAL_ACTIONS: u64 = 4;
const TAG_TRAIN: u64 = 5;
const TAG_INIT: u64 = 6;
const HISTORY_DAYS: usize = 3;

/// Deterministic sub-seed for `(tag, index)` under `base`.
pub fn derive_seed(base: u64, tag: u64, index: u64) -> u64 {
    let mut z = base
        .wrapping_add(tag.wrapping_mul(0x9E37_79B9_7F4A_7C15))
        .wrapping_add(index.wrapping_mul(0xD1B5_4A32_D192_ED03));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// A scenario ready to run: demand geography and both service maps.
#[derive(Debug, Clone)]
pub struct Setup {
    pub run: RunConfig,
    pub layout: ClusterLayout,
    pub kmeans_map: ServiceMap,
    pub grid_map: Option<ServiceMap>,
}

impl Setup {
    pub fn new(run: &RunConfig) -> Result<Self> {
        run.validate()?;
        let s = &run.scenario;
        let layout = ClusterLayout::from_seed(s, s.cluster_count, s.rng_seed);
        let mut history: Vec<Point2D> = Vec::new();
        for d in 0..HISTORY_DAYS {
            let seed = derive_seed(s.rng_seed, TAG_HISTORY, d as u64);
            let per_window = s.requests_per_window.max(1);
            history.extend(
                layout
                    .sample_day(s, run.drone.max_payload, per_window, seed)
                    .iter()
                    .map(|r| r.location),
            );
        }
        let fit = kmeans(&history, s.num_depots, s.rng_seed)?;
        let kmeans_map = ServiceMap::from_depots(MapKind::Kmeans, s.bounds, fit.centers)?.with_neighbors(s.k_neighbors)?;
        let grid_map = match grid_segment(s.bounds, s.num_depots) {
            Ok(m) => Some(m.with_neighbors(s.k_neighbors)?),
            Err(_) => None,
        };
        Ok(Setup {
            run: run.clone(),
            layout,
            kmeans_map,
            grid_map,
        })
    }

    pub fn map(&self, kind: MapKind) -> Result<&ServiceMap> {
        match kind {
            MapKind::Kmeans => Ok(&self.kmeans_map),
            MapKind::Grid => self.grid_map.as_ref().ok_or_else(|| {
                Error::Config(format!(
                    "square grid needs a perfect-square depot count, got {}",
                    self.run.scenario.num_depots
                ))
            }),
        }
    }

    fn day(&self, tag: u64, index: usize) -> Vec<Request> {
        let s = &self.run.scenario;
        self.layout.sample_day(
            s,
            self.run.drone.max_payload,
            s.requests_per_window,
            derive_seed(s.rng_seed, tag, index as u64),
        )
    }

    pub fn training_day(&self, episode: usize) -> Vec<Request> {
        self.day(TAG_TRAIN_DAY, episode)
    }

    /// Held-out day for evaluation repetition `rep`.
    pub fn eval_day(&self, rep: usize) -> Vec<Request> {
        self.day(TAG_EVAL_DAY, rep)
    }

    pub fn environment<'a>(&'a self, method: MethodId, requests: &[Request]) -> Result<Environment<'a>> {
        let map = self.map(method.map_kind())?;
        let mut env = Environment::new(&self.run.scenario, &self.run.drone, &self.run.consts, map, requests)?;
        if let Some(s) = self.run.experiment.delay_scale_hours {
            env.scales.delay_scale = s;
        }
        if let Some(s) = self.run.experiment.energy_scale_j {
            env.scales.energy_scale = s;
        }
        if !method.range_capped() {
            env.range_cap = f64::INFINITY;
        }
        Ok(env)
    }
}

/// A trained policy for one of the learned methods.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedPolicy {
    pub method: MethodId,
    pub agent: Agent,
    pub curves: Vec<CurvePoint>,
}

/// Trains the learned method on freshly sampled days.
pub fn train_method(setup: &Setup, method: MethodId, config: &LearningConfig) -> Result<TrainedPolicy> {
    if !method.is_learned() {
        return Err(Error::Config(format!("{method} has no policy to train")));
    }
    let seed = derive_seed(setup.run.scenario.rng_seed, TAG_TRAIN, method as u64);
    let init = derive_seed(setup.run.scenario.rng_seed, TAG_INIT, method as u64);
    let mut env = setup.environment(method, &setup.training_day(0))?;
    let mut day = |e: usize| Some(setup.training_day(e));
    let (agent, report) = match method {
        MethodId::Mappo => {
            let mut c = PlanChoiceController::for_env(&env, config, init);
            let r = train(&mut env, &mut c, &mut day, seed)?;
            (c.agent, r)
        }
        _ => {
            let mut c = FlightRangeController::for_env(&env, config, init);
            let r = train(&mut env, &mut c, &mut day, seed)?;
            (c.agent, r)
        }
    };
    Ok(TrainedPolicy {
        method,
        agent,
        curves: report.curves,
    })
}

fn controller_for(method: MethodId, env: &Environment<'_>, policy: Option<&Agent>) -> Result<Box<dyn Controller>> {
    let need = || {
        policy
            .cloned()
            .ok_or_else(|| Error::Policy(format!("{method} needs a trained policy")))
    };
    Ok(match method {
        MethodId::OpsGlobal => Box::new(GlobalController),
        MethodId::OpsRandom => {
            let c = FlightRangeController::for_env(env, &LearningConfig::default(), 0);
            Box::new(c.with_mode(ActionMode::Uniform))
        }
        MethodId::MarOps | MethodId::Squares => {
            Box::new(FlightRangeController::from_agent(need()?).with_mode(ActionMode::Greedy))
        }
        MethodId::Mappo => Box::new(PlanChoiceController::from_agent(need()?).with_mode(ActionMode::Greedy)),
    })
}

/// Runs `reps` evaluation episodes in parallel. Each repetition uses its own
/// held-out day unless `requests` pins one request set for all of them.
pub fn evaluate_method(
    setup: &Setup,
    method: MethodId,
    policy: Option<&Agent>,
    reps: usize,
    requests: Option<&[Request]>,
) -> Result<Vec<EpisodeOutcome>> {
    (0..reps)
        .into_par_iter()
        .map(|rep| {
            let day = match requests {
                Some(r) => r.to_vec(),
                None => setup.eval_day(rep),
            };
            let mut env = setup.environment(method, &day)?;
            let mut controller = controller_for(method, &env, policy)?;
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(
                setup.run.scenario.rng_seed,
                TAG_EVAL_ACTIONS,
                rep as u64,
            ));
            run_episode(&mut env, controller.as_mut(), &mut rng)
        })
        .collect()
}

/// Per-method aggregate before batch normalisation.
#[derive(Debug, Clone)]
pub struct MethodRuns {
    pub method: MethodId,
    pub outcomes: Vec<EpisodeOutcome>,
}

impl MethodRuns {
    fn per_rep(&self, f: impl Fn(&EpisodeOutcome) -> f64) -> Vec<f64> {
        self.outcomes.iter().map(f).collect()
    }

    pub fn energy(&self) -> Stat {
        Stat::of(&self.per_rep(|o| o.metrics.mean_energy_kj()))
    }

    pub fn delay(&self) -> Stat {
        Stat::of(&self.per_rep(|o| o.metrics.avg_delay_hours()))
    }

    pub fn planning_time(&self) -> Stat {
        Stat::of(&self.per_rep(|o| o.metrics.mean_planning_seconds()))
    }
}

/// Builds the batch report from runs of several methods.
pub fn summarize(setup: &Setup, runs: &[MethodRuns], training_episodes: usize) -> (ComparisonReport, TimingReport) {
    let means: Vec<(f64, f64)> = runs.iter().map(|r| (r.energy().mean, r.delay().mean)).collect();
    let (_, norm) = combined_cost(&means);
    let co2 = setup.run.experiment.co2_g_per_kwh;
    let methods = runs
        .iter()
        .map(|r| metrics_report(r, &norm, co2, setup.run.scenario.num_depots))
        .collect();
    let timing = TimingReport {
        methods: runs
            .iter()
            .map(|r| MethodTiming {
                method: r.method,
                avg_running_time_s: r.planning_time(),
            })
            .collect(),
    };
    let env = setup.environment(MethodId::MarOps, &[]).ok();
    let header = ReportHeader::new(setup, &norm, env.as_ref(), training_episodes);
    (ComparisonReport { header, methods }, timing)
}

fn metrics_report(r: &MethodRuns, norm: &Normalizers, co2: Option<f64>, num_depots: usize) -> MetricsReport {
    let combined: Vec<f64> = r
        .outcomes
        .iter()
        .map(|o| norm.apply(o.metrics.mean_energy_kj(), o.metrics.avg_delay_hours()))
        .collect();
    let mut load = vec![0.0; num_depots];
    for o in &r.outcomes {
        for (l, v) in load.iter_mut().zip(&o.metrics.depot_load_kg) {
            *l += v / r.outcomes.len().max(1) as f64;
        }
    }
    MetricsReport {
        method: r.method,
        repetitions: r.outcomes.len(),
        mean_energy_kj: r.energy(),
        avg_delay_h: r.delay(),
        combined_cost: Stat::of(&combined),
        delay_unfairness: Stat::of(&r.per_rep(|o| gini(&o.metrics.area_delay_hours))),
        avg_early_arrival_h: Stat::of(&r.per_rep(|o| o.metrics.avg_early_arrival_hours())),
        delivered_fraction: Stat::of(&r.per_rep(|o| {
            o.metrics.delivered_count as f64 / o.metrics.request_count.max(1) as f64
        })),
        depot_load_kg: load,
        mean_co2_g: co2.map(|g| Stat::of(&r.per_rep(|o| o.metrics.mean_energy_kj() / 3_600.0 * g))),
        violations: r.outcomes.iter().map(|o| o.metrics.violations.total()).sum(),
    }
}

/// Everything `compare` produces.
#[derive(Debug, Clone)]
pub struct Comparison {
    pub report: ComparisonReport,
    pub timing: TimingReport,
    pub runs: Vec<MethodRuns>,
    pub policies: BTreeMap<MethodId, TrainedPolicy>,
}

/// Trains the learned methods, then evaluates all five on the same held-out
/// days.
pub fn compare(setup: &Setup, reps: usize) -> Result<Comparison> {
    let learning = &setup.run.learning;
    let trained: Vec<TrainedPolicy> = [MethodId::MarOps, MethodId::Mappo, MethodId::Squares]
        .into_par_iter()
        .map(|m| train_method(setup, m, learning))
        .collect::<Result<_>>()?;
    let policies: BTreeMap<MethodId, TrainedPolicy> = trained.into_iter().map(|p| (p.method, p)).collect();
    let mut runs = Vec::new();
    for m in MethodId::ALL {
        let agent = policies.get(&m).map(|p| &p.agent);
        runs.push(MethodRuns {
            method: m,
            outcomes: evaluate_method(setup, m, agent, reps, None)?,
        });
    }
    let (report, timing) = summarize(setup, &runs, learning.episodes);
    Ok(Comparison {
        report,
        timing,
        runs,
        policies,
    })
}
