//! Policy-driven controllers: flight-range selection feeding the planner,
//! and direct plan choice.

use std::collections::{BTreeSet, VecDeque};
use std::time::Instant;

use rand_chacha::ChaCha8Rng;

use super::{ActionMode, Agent, LearningConfig, Trainable};
use crate::env::{AgentChoice, Controller, Decisions, Environment, Observation};
use crate::error::Result;
use crate::planner::{plan_slots, plan_window, FlightRange, Plan};

/// Last `frames` observations per drone, oldest first, zero-padded.
#[derive(Debug, Clone, Default)]
struct History {
    frames: usize,
    dim: usize,
    per_drone: Vec<VecDeque<Vec<f64>>>,
}

impl History {
    fn new(frames: usize, dim: usize) -> Self {
        History {
            frames: frames.max(1),
            dim,
            per_drone: Vec::new(),
        }
    }

    fn reset(&mut self, drones: usize) {
        self.per_drone = vec![VecDeque::with_capacity(self.frames); drones];
    }

    fn push(&mut self, drone: usize, obs: Vec<f64>) -> Vec<f64> {
        if self.per_drone.len() <= drone {
            self.per_drone.resize(drone + 1, VecDeque::new());
        }
        let h = &mut self.per_drone[drone];
        if h.len() == self.frames {
            h.pop_front();
        }
        h.push_back(obs);
        let mut input = vec![0.0; (self.frames - h.len()) * self.dim];
        for f in h.iter() {
            input.extend_from_slice(f);
        }
        input
    }
}

/// Each drone picks a flight range (stay or a neighbouring area); the
/// planner then selects plans inside those ranges.
#[derive(Debug, Clone)]
pub struct FlightRangeController {
    pub agent: Agent,
    history: History,
}

impl FlightRangeController {
    pub fn new(obs_dim: usize, actions: usize, config: &LearningConfig, seed: u64) -> Self {
        Self::from_agent(Agent::new(obs_dim, actions, config, seed))
    }

    pub fn from_agent(agent: Agent) -> Self {
        let history = History::new(agent.config.frames(), agent.obs_dim);
        FlightRangeController { agent, history }
    }

    pub fn for_env(env: &Environment<'_>, config: &LearningConfig, seed: u64) -> Self {
        Self::new(env.observation_dim(), env.scenario.action_count(), config, seed)
    }

    pub fn with_mode(mut self, mode: ActionMode) -> Self {
        self.agent.mode = mode;
        self
    }

    pub fn action_mask(env: &Environment<'_>, area: usize, actions: usize) -> Vec<bool> {
        (0..actions).map(|a| env.map.action_target(area, a).is_some()).collect()
    }
}

impl Controller for FlightRangeController {
    fn reset(&mut self, num_drones: usize) {
        self.history.reset(num_drones);
    }

    fn decide(&mut self, env: &Environment<'_>, rng: &mut ChaCha8Rng) -> Result<Decisions> {
        let clock = Instant::now();
        let n = env.num_drones();
        let mut ranges = Vec::with_capacity(n);
        let mut choices = Vec::with_capacity(n);
        let mut actions = Vec::with_capacity(n);
        for u in 0..n {
            let own = env.drone(u).current_depot;
            let input = self.history.push(u, env.observe(u).to_vec());
            let mask = Self::action_mask(env, own, self.agent.actions);
            let (a, p) = self.agent.act(&input, &mask, rng)?;
            ranges.push(FlightRange::for_action(env.map, own, a, env.spec.max_range).expect("masked action is legal"));
            actions.push(Some(a));
            choices.push(Some(AgentChoice {
                input,
                action: a,
                mask,
                old_prob: p,
            }));
        }
        let wp = plan_window(
            env.map,
            &ranges,
            &env.candidates(),
            &env.spec,
            &env.consts,
            env.scenario.max_parcels,
        )?;
        Ok(Decisions {
            plans: wp.plans,
            choices,
            actions,
            planning_seconds: clock.elapsed().as_secs_f64(),
        })
    }
}

impl Trainable for FlightRangeController {
    fn agent(&self) -> &Agent {
        &self.agent
    }

    fn agent_mut(&mut self) -> &mut Agent {
        &mut self.agent
    }
}

/// Features appended per plan slot: feasible flag, energy as a battery
/// fraction, parcel count and summed delay of its customers.
pub const SLOT_FEATURES: usize = 4;

/// Each drone chooses one of its candidate plans directly. Slots are taken
/// in drone order; a plan that would serve a request already claimed by a
/// lower-numbered drone is replaced by staying idle.
#[derive(Debug, Clone)]
pub struct PlanChoiceController {
    pub agent: Agent,
    history: History,
}

impl PlanChoiceController {
    pub fn slot_count(max_parcels: usize) -> usize {
        1 << max_parcels
    }

    pub fn input_dim(env: &Environment<'_>) -> usize {
        Observation::dim(env.map.len(), env.scenario.action_count())
            + SLOT_FEATURES * Self::slot_count(env.scenario.max_parcels)
    }

    pub fn for_env(env: &Environment<'_>, config: &LearningConfig, seed: u64) -> Self {
        let slots = Self::slot_count(env.scenario.max_parcels);
        Self::from_agent(Agent::new(Self::input_dim(env), slots, config, seed))
    }

    pub fn from_agent(agent: Agent) -> Self {
        let history = History::new(agent.config.frames(), agent.obs_dim);
        PlanChoiceController { agent, history }
    }

    pub fn with_mode(mut self, mode: ActionMode) -> Self {
        self.agent.mode = mode;
        self
    }
}

impl Controller for PlanChoiceController {
    fn reset(&mut self, num_drones: usize) {
        self.history.reset(num_drones);
    }

    fn decide(&mut self, env: &Environment<'_>, rng: &mut ChaCha8Rng) -> Result<Decisions> {
        let clock = Instant::now();
        let n = env.num_drones();
        let pending = env.candidates();
        let delay_norm = (env.scenario.window_hours() * env.scenario.num_windows as f64).max(1e-9);
        let m_hat = env.scenario.max_parcels as f64;
        let mut taken = BTreeSet::new();
        let mut plans = Vec::with_capacity(n);
        let mut choices = Vec::with_capacity(n);
        let mut actions = Vec::with_capacity(n);
        for u in 0..n {
            let own = env.drone(u).current_depot;
            let (cands, slots) = plan_slots(
                u,
                env.map,
                own,
                &pending,
                &env.spec,
                &env.consts,
                env.scenario.max_parcels,
                env.spec.max_range,
            )?;
            let mut obs = env.observe(u).to_vec();
            for slot in &slots {
                match slot {
                    Some(p) => {
                        let delay: f64 = p
                            .customers
                            .iter()
                            .map(|id| cands.iter().find(|c| c.id == *id).map_or(0.0, |c| c.delay_hours))
                            .sum();
                        obs.extend_from_slice(&[
                            1.0,
                            p.energy / env.battery_capacity,
                            p.customers.len() as f64 / m_hat,
                            delay / delay_norm,
                        ]);
                    }
                    None => obs.extend_from_slice(&[0.0; SLOT_FEATURES]),
                }
            }
            let input = self.history.push(u, obs);
            let mask: Vec<bool> = slots.iter().map(|s| s.is_some()).collect();
            let (a, p) = self.agent.act(&input, &mask, rng)?;
            let chosen = slots[a].clone().expect("masked slot is feasible");
            let plan = if chosen.customers.iter().any(|c| taken.contains(c)) {
                Plan::idle(u, own)
            } else {
                taken.extend(chosen.customers.iter().copied());
                chosen
            };
            plans.push(plan);
            actions.push(Some(a));
            choices.push(Some(AgentChoice {
                input,
                action: a,
                mask,
                old_prob: p,
            }));
        }
        Ok(Decisions {
            plans,
            choices,
            actions,
            planning_seconds: clock.elapsed().as_secs_f64(),
        })
    }
}

impl Trainable for PlanChoiceController {
    fn agent(&self) -> &Agent {
        &self.agent
    }

    fn agent_mut(&mut self) -> &mut Agent {
        &mut self.agent
    }
}
