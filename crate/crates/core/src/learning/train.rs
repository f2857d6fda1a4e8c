use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{ActionMode, Agent, CurvePoint, ReplayBuffer, UpdateReport};
use crate::env::{run_episode, Controller, Environment};
use crate::error::Result;
use crate::model::Request;

/// A controller driven by a shared [`Agent`].
pub trait Trainable: Controller {
    fn agent(&self) -> &Agent;
    fn agent_mut(&mut self) -> &mut Agent;
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct TrainReport {
    pub curves: Vec<CurvePoint>,
    pub updates: Vec<UpdateReport>,
}

/// Runs `agent.config.episodes` sampled-action episodes, buffering every
/// transition and updating once per episode. `day(e)` may supply a fresh
/// request set for episode `e`; `None` keeps the current one.
pub fn train<C: Trainable>(
    env: &mut Environment<'_>,
    controller: &mut C,
    day: &mut dyn FnMut(usize) -> Option<Vec<Request>>,
    seed: u64,
) -> Result<TrainReport> {
    let cfg = controller.agent().config.clone();
    let mut buffer = ReplayBuffer::new(cfg.buffer_capacity);
    let mut update_rng = ChaCha8Rng::seed_from_u64(seed ^ 0xA5A5_A5A5);
    let mut report = TrainReport::default();
    let previous = controller.agent().mode;
    controller.agent_mut().mode = ActionMode::Sample;
    for episode in 0..cfg.episodes {
        if let Some(reqs) = day(episode) {
            env.set_requests(&reqs)?;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(episode as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
        let out = run_episode(env, controller, &mut rng)?;
        buffer.extend(out.transitions);
        let upd = controller.agent_mut().update(&buffer, &mut update_rng)?;
        report.updates.push(upd);
        report.curves.push(CurvePoint {
            episode,
            mean_reward: out.metrics.mean_reward,
            mean_delay: out.metrics.avg_delay_hours(),
            mean_energy: out.metrics.mean_energy_kj(),
        });
    }
    controller.agent_mut().mode = previous;
    Ok(report)
}
