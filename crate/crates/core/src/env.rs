//! Window-by-window delivery simulation.

use std::collections::BTreeMap;
use std::path::Path;

use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::energy;
use crate::error::{Error, Result};
use crate::model::{DroneSpec, EnvironmentConstants, Request, RequestId, ScenarioConfig, Status};
use crate::planner::{Candidate, Plan};
use crate::segmentation::ServiceMap;

/// Hours a request is overdue at window `t`; zero once delivered or before
/// its demanded window.
pub fn delay_hours(t: u32, t_i: u32, pending: bool, window_hours: f64) -> f64 {
    if pending && t >= t_i {
        (t - t_i) as f64 * window_hours
    } else {
        0.0
    }
}

pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Logistic normalisation for the two reward terms: `sigma((x - center) / scale)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RewardScales {
    pub delay_center: f64,
    pub delay_scale: f64,
    pub energy_center: f64,
    pub energy_scale: f64,
}

impl RewardScales {
    /// Delay scaled by the backlog one drone's visible areas gather in a
    /// window, energy by a full battery.
    pub fn for_scenario(scenario: &ScenarioConfig, battery_capacity: f64) -> Self {
        let visible = scenario.action_count() as f64 / scenario.num_depots as f64;
        let delay_scale = (scenario.requests_per_window as f64 * scenario.window_hours() * visible).max(1e-6);
        RewardScales {
            delay_center: 0.0,
            delay_scale,
            energy_center: 0.0,
            energy_scale: battery_capacity,
        }
    }
}

/// `-(1 - alpha) * sigma(delay) - alpha * sigma(energy)`, in `(-1, 0)`.
pub fn reward(alpha: f64, delay_sum: f64, route_energy: f64, scales: &RewardScales) -> f64 {
    let d = sigmoid((delay_sum - scales.delay_center) / scales.delay_scale);
    let e = sigmoid((route_energy - scales.energy_center) / scales.energy_scale);
    -(1.0 - alpha) * d - alpha * e
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DroneState {
    pub current_depot: usize,
    pub battery_fraction: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WorldState {
    pub window: u32,
    /// Pending requests ordered by id.
    pub pending: Vec<Request>,
    pub drones: Vec<DroneState>,
}

/// Per-area view of the pending requests: sum of delays, count, maximum
/// delay, already divided by the observation scales.
#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    pub own_area: usize,
    pub battery: f64,
    /// Slot 0 is the own area, slot `j` the area of action `j`.
    pub area_summaries: Vec<[f64; 3]>,
    pub num_areas: usize,
}

impl Observation {
    pub fn dim(num_areas: usize, action_count: usize) -> usize {
        num_areas + 1 + 3 * action_count
    }

    pub fn to_vec(&self) -> Vec<f64> {
        let mut v = vec![0.0; self.num_areas];
        v[self.own_area] = 1.0;
        v.push(self.battery);
        for s in &self.area_summaries {
            v.extend_from_slice(s);
        }
        v
    }
}

/// What a learning agent decided for one drone in one window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentChoice {
    pub input: Vec<f64>,
    pub action: usize,
    pub mask: Vec<bool>,
    pub old_prob: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transition {
    pub input: Vec<f64>,
    pub action: usize,
    pub mask: Vec<bool>,
    pub old_prob: f64,
    pub reward: f64,
    pub next_input: Vec<f64>,
    pub next_action: usize,
    pub next_mask: Vec<bool>,
    pub terminal: bool,
}

#[derive(Debug, Clone, Default)]
pub struct Decisions {
    pub plans: Vec<Plan>,
    /// Learning record per drone, `None` for fixed policies.
    pub choices: Vec<Option<AgentChoice>>,
    /// Flight-range or plan-slot action per drone, for the trace.
    pub actions: Vec<Option<usize>>,
    pub planning_seconds: f64,
}

pub trait Controller {
    fn decide(&mut self, env: &Environment<'_>, rng: &mut ChaCha8Rng) -> Result<Decisions>;

    /// Called before the first window of every episode.
    fn reset(&mut self, _num_drones: usize) {}
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Violations {
    pub conservation: usize,
    pub double_service: usize,
    pub depot: usize,
    pub payload: usize,
    pub range: usize,
    pub battery: usize,
}

impl Violations {
    pub fn total(&self) -> usize {
        self.conservation + self.double_service + self.depot + self.payload + self.range + self.battery
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub window: u32,
    pub drone: usize,
    pub action: Option<usize>,
    pub route: String,
    pub start_depot: usize,
    pub end_depot: usize,
    pub energy_j: f64,
    pub parcel_mass_kg: f64,
    pub battery_after: f64,
    /// `id:hours` pairs for the requests served, `;`-separated.
    pub served_delays: String,
}

pub fn write_trace(path: impl AsRef<Path>, rows: &[TraceRow]) -> Result<()> {
    let path = path.as_ref();
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = csv::Writer::from_writer(file);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EpisodeMetrics {
    pub request_count: usize,
    pub delivered_count: usize,
    /// Overdue hours summed over every pending request in every window.
    pub delay_sum_hours: f64,
    /// Same sum split by service area.
    pub area_delay_hours: Vec<f64>,
    pub energy_per_drone_j: Vec<f64>,
    pub early_arrival_sum_hours: f64,
    pub depot_load_kg: Vec<f64>,
    pub delivered_mass_kg: f64,
    pub planning_seconds: Vec<f64>,
    pub mean_reward: f64,
    pub violations: Violations,
}

impl EpisodeMetrics {
    pub fn total_energy_j(&self) -> f64 {
        self.energy_per_drone_j.iter().sum()
    }

    pub fn mean_energy_kj(&self) -> f64 {
        if self.energy_per_drone_j.is_empty() {
            0.0
        } else {
            self.total_energy_j() / 1_000.0 / self.energy_per_drone_j.len() as f64
        }
    }

    pub fn avg_delay_hours(&self) -> f64 {
        if self.request_count == 0 {
            0.0
        } else {
            self.delay_sum_hours / self.request_count as f64
        }
    }

    pub fn avg_early_arrival_hours(&self) -> f64 {
        if self.delivered_count == 0 {
            0.0
        } else {
            self.early_arrival_sum_hours / self.delivered_count as f64
        }
    }

    pub fn mean_planning_seconds(&self) -> f64 {
        if self.planning_seconds.is_empty() {
            0.0
        } else {
            self.planning_seconds.iter().sum::<f64>() / self.planning_seconds.len() as f64
        }
    }
}

/// Result of one executed window.
#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    pub rewards: Vec<f64>,
    pub done: bool,
}

pub struct Environment<'a> {
    pub scenario: ScenarioConfig,
    pub spec: DroneSpec,
    pub consts: EnvironmentConstants,
    pub map: &'a ServiceMap,
    pub battery_capacity: f64,
    pub scales: RewardScales,
    /// Path cap the executed plans are checked against.
    pub range_cap: f64,
    requests: Vec<Request>,
    release: Vec<u32>,
    next_arrival: usize,
    state: WorldState,
    delivered: BTreeMap<RequestId, u32>,
    metrics: EpisodeMetrics,
    trace: Vec<TraceRow>,
    reward_sum: f64,
    reward_count: usize,
}

impl<'a> Environment<'a> {
    pub fn new(
        scenario: &ScenarioConfig,
        spec: &DroneSpec,
        consts: &EnvironmentConstants,
        map: &'a ServiceMap,
        requests: &[Request],
    ) -> Result<Self> {
        scenario.validate()?;
        spec.validate()?;
        consts.validate()?;
        if map.len() != scenario.num_depots {
            return Err(Error::Config(format!(
                "service map has {} areas, scenario expects {}",
                map.len(),
                scenario.num_depots
            )));
        }
        let capacity = energy::battery_capacity(spec, consts)?;
        let mut env = Environment {
            scenario: scenario.clone(),
            spec: *spec,
            consts: *consts,
            map,
            battery_capacity: capacity,
            scales: RewardScales::for_scenario(scenario, capacity),
            range_cap: spec.max_range,
            requests: Vec::new(),
            release: Vec::new(),
            next_arrival: 0,
            state: WorldState {
                window: 1,
                pending: Vec::new(),
                drones: Vec::new(),
            },
            delivered: BTreeMap::new(),
            metrics: EpisodeMetrics::default(),
            trace: Vec::new(),
            reward_sum: 0.0,
            reward_count: 0,
        };
        env.set_requests(requests)?;
        Ok(env)
    }

    /// Replaces the request set (a new day) and resets.
    pub fn set_requests(&mut self, requests: &[Request]) -> Result<()> {
        let mut seen = std::collections::BTreeSet::new();
        for r in requests {
            r.validate(&self.scenario, self.spec.max_payload)?;
            if !seen.insert(r.id) {
                return Err(Error::DuplicateId(r.id));
            }
        }
        let lead = self.scenario.release_lead_windows;
        let release_of = |r: &Request| r.demand_window.saturating_sub(lead).max(1);
        let mut reqs: Vec<Request> = requests.to_vec();
        reqs.sort_by_key(|r| (release_of(r), r.id));
        self.release = reqs.iter().map(release_of).collect();
        self.requests = reqs;
        self.reset();
        Ok(())
    }

    /// Back to window 1 with drone `u` at area `u * N / U`.
    pub fn reset(&mut self) {
        let n = self.scenario.num_depots;
        let u_count = self.scenario.num_drones;
        self.state = WorldState {
            window: 1,
            pending: Vec::new(),
            drones: (0..u_count)
                .map(|u| DroneState {
                    current_depot: u * n / u_count.max(1),
                    battery_fraction: 1.0,
                })
                .collect(),
        };
        for r in &mut self.requests {
            r.status = Status::Pending;
        }
        self.next_arrival = 0;
        self.delivered.clear();
        self.metrics = EpisodeMetrics {
            request_count: self.requests.len(),
            area_delay_hours: vec![0.0; n],
            energy_per_drone_j: vec![0.0; u_count],
            depot_load_kg: vec![0.0; n],
            ..Default::default()
        };
        self.trace.clear();
        self.reward_sum = 0.0;
        self.reward_count = 0;
        self.admit_arrivals();
    }

    fn admit_arrivals(&mut self) {
        while self.next_arrival < self.requests.len() && self.release[self.next_arrival] <= self.state.window {
            self.state.pending.push(self.requests[self.next_arrival].clone());
            self.next_arrival += 1;
        }
        self.state.pending.sort_by_key(|r| r.id);
    }

    pub fn state(&self) -> &WorldState {
        &self.state
    }

    pub fn window(&self) -> u32 {
        self.state.window
    }

    pub fn is_done(&self) -> bool {
        self.state.window > self.scenario.num_windows
    }

    pub fn num_drones(&self) -> usize {
        self.state.drones.len()
    }

    pub fn drone(&self, u: usize) -> &DroneState {
        &self.state.drones[u]
    }

    pub fn metrics(&self) -> &EpisodeMetrics {
        &self.metrics
    }

    pub fn trace(&self) -> &[TraceRow] {
        &self.trace
    }

    pub fn not_yet_arrived(&self) -> usize {
        self.requests.len() - self.next_arrival
    }

    fn delay_of(&self, r: &Request, t: u32) -> f64 {
        delay_hours(t, r.demand_window, r.status == Status::Pending, self.scenario.window_hours())
    }

    /// Pending requests as planner candidates, delays at the current window.
    pub fn candidates(&self) -> Vec<Candidate> {
        let t = self.state.window;
        self.state
            .pending
            .iter()
            .map(|r| Candidate {
                id: r.id,
                location: r.location,
                parcel_mass: r.parcel_mass,
                delay_hours: self.delay_of(r, t),
                area: self.map.area_of(r.location),
            })
            .collect()
    }

    /// Own area followed by the areas of flight-range actions `1..`.
    pub fn visible_areas(&self, area: usize) -> Vec<usize> {
        let mut v = vec![area];
        v.extend(self.map.neighbors[area].iter().copied());
        v
    }

    pub fn observe(&self, drone: usize) -> Observation {
        let ds = &self.state.drones[drone];
        let own = ds.current_depot;
        let h = self.scenario.window_hours();
        let count_norm = (self.scenario.requests_per_window as f64 * self.scenario.action_count() as f64
            / self.scenario.num_depots as f64)
            .max(1.0);
        let max_norm = h * self.scenario.num_windows as f64;
        let cands = self.candidates();
        let actions = self.scenario.action_count();
        let mut summaries = vec![[0.0; 3]; actions];
        for (slot, s) in summaries.iter_mut().enumerate() {
            let Some(area) = self.map.action_target(own, slot) else {
                continue;
            };
            let (mut sum, mut count, mut max) = (0.0, 0usize, 0.0f64);
            for c in cands.iter().filter(|c| c.area == area) {
                sum += c.delay_hours;
                count += 1;
                max = max.max(c.delay_hours);
            }
            *s = [sum / (h * count_norm), count as f64 / count_norm, max / max_norm];
        }
        Observation {
            own_area: own,
            battery: ds.battery_fraction,
            area_summaries: summaries,
            num_areas: self.map.len(),
        }
    }

    pub fn observation_dim(&self) -> usize {
        Observation::dim(self.map.len(), self.scenario.action_count())
    }

    /// Executes one plan per drone and advances to the next window.
    pub fn step(&mut self, plans: &[Plan], actions: &[Option<usize>]) -> Result<StepOutcome> {
        if self.is_done() {
            return Err(Error::Policy("episode already finished".into()));
        }
        if plans.len() != self.state.drones.len() {
            return Err(Error::Dimension {
                expected: self.state.drones.len(),
                got: plans.len(),
            });
        }
        let t = self.state.window;
        let h = self.scenario.window_hours();

        // overdue hours of everything still waiting at the start of the window
        for r in &self.state.pending {
            let d = self.delay_of(r, t);
            self.metrics.delay_sum_hours += d;
            self.metrics.area_delay_hours[self.map.area_of(r.location)] += d;
        }

        let index: BTreeMap<RequestId, usize> =
            self.state.pending.iter().enumerate().map(|(i, r)| (r.id, i)).collect();
        let mut served_now: BTreeMap<RequestId, usize> = BTreeMap::new();
        for (u, plan) in plans.iter().enumerate() {
            for &c in &plan.customers {
                if self.delivered.contains_key(&c) {
                    self.metrics.violations.double_service += 1;
                    return Err(Error::AlreadyDelivered(c));
                }
                if !index.contains_key(&c) {
                    return Err(Error::UnknownRequest(c));
                }
                if served_now.insert(c, u).is_some() {
                    self.metrics.violations.double_service += 1;
                    return Err(Error::DoubleService(c));
                }
            }
        }

        let visible: Vec<Vec<usize>> = self
            .state
            .drones
            .iter()
            .map(|d| self.visible_areas(d.current_depot))
            .collect();

        let mut energies = vec![0.0; plans.len()];
        for (u, plan) in plans.iter().enumerate() {
            let here = self.state.drones[u].current_depot;
            if plan.start_depot != here || plan.end_depot >= self.map.len() {
                self.metrics.violations.depot += 1;
            }
            let mass: f64 = plan.customers.iter().map(|c| self.state.pending[index[c]].parcel_mass).sum();
            if mass > self.spec.max_payload + 1e-9 {
                self.metrics.violations.payload += 1;
            }
            if plan.path_length > self.range_cap + 1e-9 {
                self.metrics.violations.range += 1;
            }
            let battery = 1.0 - plan.energy / self.battery_capacity;
            if battery < -1e-12 && self.range_cap.is_finite() {
                self.metrics.violations.battery += 1;
            }
            energies[u] = plan.energy;
            self.metrics.energy_per_drone_j[u] += plan.energy;
            self.metrics.depot_load_kg[plan.start_depot] += mass;
            self.metrics.delivered_mass_kg += mass;

            let mut served = Vec::with_capacity(plan.customers.len());
            for &c in &plan.customers {
                let r = &self.state.pending[index[&c]];
                served.push(format!("{c}:{}", self.delay_of(r, t)));
                self.metrics.early_arrival_sum_hours += r.demand_window.saturating_sub(t) as f64 * h;
            }
            self.trace.push(TraceRow {
                window: t,
                drone: u,
                action: actions.get(u).copied().flatten(),
                route: plan.node_string(),
                start_depot: plan.start_depot,
                end_depot: plan.end_depot,
                energy_j: plan.energy,
                parcel_mass_kg: mass,
                battery_after: battery.max(0.0),
                served_delays: served.join(";"),
            });
            self.state.drones[u].current_depot = plan.end_depot.min(self.map.len() - 1);
            self.state.drones[u].battery_fraction = battery.clamp(0.0, 1.0);
        }

        for (&c, _) in &served_now {
            self.delivered.insert(c, t);
            self.metrics.delivered_count += 1;
        }
        for r in &mut self.requests {
            if served_now.contains_key(&r.id) {
                r.status = Status::Delivered;
            }
        }
        self.state.pending.retain(|r| !served_now.contains_key(&r.id));

        // delay still visible to each drone once this window's deliveries are done
        let rewards: Vec<f64> = (0..plans.len())
            .map(|u| {
                let d: f64 = self
                    .state
                    .pending
                    .iter()
                    .filter(|r| visible[u].contains(&self.map.area_of(r.location)))
                    .map(|r| self.delay_of(r, t + 1))
                    .sum();
                reward(self.scenario.alpha, d, energies[u], &self.scales)
            })
            .collect();
        self.reward_sum += rewards.iter().sum::<f64>();
        self.reward_count += rewards.len();
        self.metrics.mean_reward = if self.reward_count == 0 {
            0.0
        } else {
            self.reward_sum / self.reward_count as f64
        };

        // battery swap at the depot
        for d in &mut self.state.drones {
            d.battery_fraction = 1.0;
        }
        self.state.window += 1;
        self.admit_arrivals();

        if self.delivered.len() + self.state.pending.len() + self.not_yet_arrived() != self.requests.len() {
            self.metrics.violations.conservation += 1;
        }
        Ok(StepOutcome {
            rewards,
            done: self.is_done(),
        })
    }

    pub fn record_planning_time(&mut self, seconds: f64) {
        self.metrics.planning_seconds.push(seconds);
    }

    pub fn delivered_window(&self, id: RequestId) -> Option<u32> {
        self.delivered.get(&id).copied()
    }
}

#[derive(Debug, Clone)]
pub struct EpisodeOutcome {
    pub metrics: EpisodeMetrics,
    pub transitions: Vec<Transition>,
    pub trace: Vec<TraceRow>,
}

/// Runs all windows from a fresh reset, then pairs each agent decision with
/// the same drone's next one.
pub fn run_episode(env: &mut Environment<'_>, controller: &mut dyn Controller, rng: &mut ChaCha8Rng) -> Result<EpisodeOutcome> {
    env.reset();
    controller.reset(env.num_drones());
    let u_count = env.num_drones();
    let mut records: Vec<Vec<(AgentChoice, f64)>> = vec![Vec::new(); u_count];
    while !env.is_done() {
        let dec = controller.decide(env, rng)?;
        env.record_planning_time(dec.planning_seconds);
        let out = env.step(&dec.plans, &dec.actions)?;
        for (u, choice) in dec.choices.into_iter().enumerate() {
            if let Some(c) = choice {
                records[u].push((c, out.rewards[u]));
            }
        }
    }
    let mut transitions = Vec::new();
    for list in records {
        for i in 0..list.len() {
            let (c, r) = &list[i];
            let (next_input, next_action, next_mask, terminal) = match list.get(i + 1) {
                Some((n, _)) => (n.input.clone(), n.action, n.mask.clone(), false),
                None => (c.input.clone(), c.action, c.mask.clone(), true),
            };
            transitions.push(Transition {
                input: c.input.clone(),
                action: c.action,
                mask: c.mask.clone(),
                old_prob: c.old_prob,
                reward: *r,
                next_input,
                next_action,
                next_mask,
                terminal,
            });
        }
    }
    Ok(EpisodeOutcome {
        metrics: env.metrics().clone(),
        transitions,
        trace: env.trace().to_vec(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Bounds, Point2D};
    use crate::segmentation::grid_segment;

    #[test]
    fn delay_examples() {
        assert_eq!(delay_hours(3, 1, true, 0.5), 1.0);
        assert_eq!(delay_hours(2, 5, true, 0.5), 0.0);
        assert_eq!(delay_hours(9, 1, false, 0.5), 0.0);
    }

    #[test]
    fn reward_examples() {
        let s = RewardScales {
            delay_center: 0.0,
            delay_scale: 1.0,
            energy_center: 0.0,
            energy_scale: 1.0,
        };
        assert_eq!(reward(0.3, 0.0, 0.0, &s), -0.5);
        assert_eq!(reward(0.0, 2.0, 0.0, &s), reward(0.0, 2.0, 50.0, &s));
        assert_eq!(reward(1.0, 0.0, 3.0, &s), reward(1.0, 9.0, 3.0, &s));
        let r = reward(0.5, 3.0, 4.0, &s);
        assert!(r > -1.0 && r < 0.0);
    }

    fn small() -> (ScenarioConfig, ServiceMap) {
        let scenario = ScenarioConfig {
            num_depots: 4,
            num_drones: 1,
            num_windows: 3,
            ..Default::default()
        };
        let map = grid_segment(Bounds::default(), 4).unwrap().with_neighbors(3).unwrap();
        (scenario, map)
    }

    #[test]
    fn identity_dynamics_and_arrivals() {
        let (scenario, map) = small();
        let reqs = vec![
            Request::new(1, Point2D::new(2400.0, 2400.0), 0.5, 1),
            Request::new(2, Point2D::new(2600.0, 2400.0), 0.5, 1),
            Request::new(3, Point2D::new(2500.0, 2600.0), 0.5, 2),
        ];
        let spec = DroneSpec::default();
        let consts = EnvironmentConstants::default();
        let mut env = Environment::new(&scenario, &spec, &consts, &map, &reqs).unwrap();
        assert_eq!(env.state().pending.len(), 2);
        let idle = vec![Plan::idle(0, 0)];
        env.step(&idle, &[None]).unwrap();
        assert_eq!(env.window(), 2);
        assert_eq!(env.state().pending.len(), 3);

        let cands = env.candidates();
        let a = cands.iter().find(|c| c.id == 1).unwrap();
        let b = cands.iter().find(|c| c.id == 2).unwrap();
        let route = crate::planner::cost_plan(0, &map, 0, 0, &[a, b], &spec, &consts, 3000.0)
            .unwrap()
            .unwrap();
        env.step(&[route.clone()], &[Some(0)]).unwrap();
        let ids: Vec<_> = env.state().pending.iter().map(|r| r.id).collect();
        assert_eq!(ids, vec![3]);
        assert!(matches!(env.step(&[route], &[None]), Err(Error::AlreadyDelivered(_))));
    }

    #[test]
    fn double_service_rejected() {
        let (mut scenario, map) = small();
        scenario.num_drones = 2;
        let spec = DroneSpec::default();
        let consts = EnvironmentConstants::default();
        let reqs = vec![Request::new(1, Point2D::new(2400.0, 2400.0), 0.5, 1)];
        let mut env = Environment::new(&scenario, &spec, &consts, &map, &reqs).unwrap();
        let cands = env.candidates();
        let p0 = crate::planner::cost_plan(0, &map, 0, 0, &[&cands[0]], &spec, &consts, 3000.0)
            .unwrap()
            .unwrap();
        let mut p1 = p0.clone();
        p1.drone = 1;
        p1.start_depot = 2;
        assert!(matches!(env.step(&[p0, p1], &[None, None]), Err(Error::DoubleService(1))));
    }

    #[test]
    fn observation_basics() {
        let (scenario, map) = small();
        let spec = DroneSpec::default();
        let consts = EnvironmentConstants::default();
        let env = Environment::new(&scenario, &spec, &consts, &map, &[]).unwrap();
        let o = env.observe(0);
        assert_eq!(o.battery, 1.0);
        assert!(o.area_summaries.iter().all(|s| s == &[0.0; 3]));
        assert_eq!(o.to_vec().len(), env.observation_dim());
        assert_eq!(env.observe(0), o);
    }
}
