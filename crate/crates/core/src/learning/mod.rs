//! Actor-critic PPO for flight-range selection, and the plan-choice head.

mod buffer;
mod checkpoint;
mod controllers;
pub mod nn;
mod ppo;
mod train;

pub use buffer::ReplayBuffer;
pub use controllers::{FlightRangeController, PlanChoiceController, SLOT_FEATURES};
pub use checkpoint::{write_curves, Checkpoint, CurvePoint, CHECKPOINT_VERSION};
pub use nn::{Architecture, Network};
pub use ppo::{
    actor_forward, actor_loss_and_grad, advantage, clipped_surrogate, critic_input, critic_loss_and_grad,
    critic_loss_with_targets, critic_value, masked_softmax, policy_ratio, standardize, ActionMode, Agent,
    UpdateReport,
};
pub use train::{train, TrainReport, Trainable};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CriticKind {
    /// `Q(o, a)` on the observation plus a one-hot action.
    Q,
    /// State value `V(o)`.
    V,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LearningConfig {
    pub gamma: f64,
    pub clip_epsilon: f64,
    pub actor_lr: f64,
    pub critic_lr: f64,
    pub episodes: usize,
    /// Mini-batch size.
    pub batch_size: usize,
    pub buffer_capacity: usize,
    pub updates_per_episode: usize,
    pub hidden_size: usize,
    pub hidden_layers: usize,
    pub recurrent: bool,
    /// Observation frames fed to the recurrent layer.
    pub unroll: usize,
    pub critic: CriticKind,
    pub grad_clip: f64,
    /// Standardise advantages within each mini-batch before the actor step.
    #[serde(default)]
    pub normalize_advantages: bool,
}

impl Default for LearningConfig {
    fn default() -> Self {
        LearningConfig {
            gamma: 0.95,
            clip_epsilon: 0.2,
            actor_lr: 0.01,
            critic_lr: 0.01,
            episodes: 300,
            batch_size: 64,
            buffer_capacity: 2_048,
            updates_per_episode: 4,
            hidden_size: 64,
            hidden_layers: 2,
            recurrent: false,
            unroll: 4,
            critic: CriticKind::Q,
            grad_clip: 5.0,
            normalize_advantages: false,
        }
    }
}

impl LearningConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::Config(m));
        if !(0.0..1.0).contains(&self.gamma) {
            return fail(format!("gamma must be in [0, 1), got {}", self.gamma));
        }
        if !(self.clip_epsilon > 0.0 && self.clip_epsilon < 1.0) {
            return fail(format!("clip_epsilon must be in (0, 1), got {}", self.clip_epsilon));
        }
        if !(self.actor_lr >= 0.0 && self.critic_lr >= 0.0) {
            return fail("learning rates must be non-negative".into());
        }
        if self.batch_size == 0 || self.buffer_capacity < self.batch_size {
            return fail("need 0 < batch_size <= buffer_capacity".into());
        }
        if self.hidden_size == 0 || self.hidden_layers == 0 {
            return fail("hidden_size and hidden_layers must be positive".into());
        }
        if self.recurrent && self.unroll == 0 {
            return fail("unroll must be positive for the recurrent network".into());
        }
        if !(self.grad_clip > 0.0) {
            return fail("grad_clip must be positive".into());
        }
        Ok(())
    }

    /// Frames per network input.
    pub fn frames(&self) -> usize {
        if self.recurrent {
            self.unroll
        } else {
            1
        }
    }

    pub fn architecture(&self, input: usize, output: usize) -> Architecture {
        if self.recurrent {
            Architecture::recurrent(input, self.unroll, self.hidden_size, self.hidden_layers, output)
        } else {
            Architecture::feed_forward(input, self.hidden_size, self.hidden_layers, output)
        }
    }
}
