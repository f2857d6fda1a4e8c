use rand::distr::{weighted::WeightedIndex, Distribution};
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::nn::{clip_grad_norm, sgd_step, Network};
use super::{CriticKind, LearningConfig, ReplayBuffer};
use crate::env::Transition;
use crate::error::{Error, Result};

/// How an agent turns its policy into an action.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ActionMode {
    Sample,
    Greedy,
    Uniform,
}

/// Softmax over the legal entries; illegal entries get probability 0.
pub fn masked_softmax(logits: &[f64], mask: &[bool]) -> Result<Vec<f64>> {
    if logits.len() != mask.len() {
        return Err(Error::Dimension {
            expected: logits.len(),
            got: mask.len(),
        });
    }
    let max = logits
        .iter()
        .zip(mask)
        .filter(|(_, &m)| m)
        .map(|(l, _)| *l)
        .fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return Err(Error::Policy("no legal action".into()));
    }
    let exps: Vec<f64> = logits
        .iter()
        .zip(mask)
        .map(|(l, &m)| if m { (l - max).exp() } else { 0.0 })
        .collect();
    let z: f64 = exps.iter().sum();
    Ok(exps.into_iter().map(|e| e / z).collect())
}

pub fn actor_forward(actor: &Network, input: &[f64], mask: &[bool]) -> Result<Vec<f64>> {
    masked_softmax(&actor.forward(input)?, mask)
}

/// `r + gamma * q_next - q_now`
pub fn advantage(r: f64, q_next: f64, q_now: f64, gamma: f64) -> f64 {
    r + gamma * q_next - q_now
}

/// Shifts and scales to zero mean and unit standard deviation; leaves a
/// constant slice at zero.
pub fn standardize(values: &mut [f64]) {
    let n = values.len();
    if n == 0 {
        return;
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n as f64;
    let sd = var.sqrt();
    for v in values.iter_mut() {
        *v = if sd > 1e-12 { (*v - mean) / sd } else { 0.0 };
    }
}

/// `pi_new / pi_old`, or `None` when the old probability is not positive.
pub fn policy_ratio(p_new: f64, p_old: f64) -> Option<f64> {
    if p_old > 0.0 {
        Some(p_new / p_old)
    } else {
        None
    }
}

/// `min(ratio * A, clip(ratio, 1 - eps, 1 + eps) * A)`
pub fn clipped_surrogate(ratio: f64, adv: f64, eps: f64) -> f64 {
    (ratio * adv).min(ratio.clamp(1.0 - eps, 1.0 + eps) * adv)
}

fn one_hot(n: usize, i: usize) -> impl Iterator<Item = f64> {
    (0..n).map(move |j| if j == i { 1.0 } else { 0.0 })
}

/// Critic input for a sample under either critic kind.
pub fn critic_input(kind: CriticKind, input: &[f64], action: usize, actions: usize) -> Vec<f64> {
    let mut v = input.to_vec();
    if kind == CriticKind::Q {
        v.extend(one_hot(actions, action));
    }
    v
}

pub fn critic_value(critic: &Network, kind: CriticKind, input: &[f64], action: usize, actions: usize) -> Result<f64> {
    Ok(critic.forward(&critic_input(kind, input, action, actions))?[0])
}

/// Mean squared error against fixed targets and its parameter gradient.
pub fn critic_loss_with_targets(critic: &Network, inputs: &[Vec<f64>], targets: &[f64]) -> Result<(f64, Vec<f64>)> {
    let n = inputs.len().max(1) as f64;
    let mut grad = vec![0.0; critic.param_count()];
    let mut loss = 0.0;
    for (x, &y) in inputs.iter().zip(targets) {
        let cache = critic.forward_cached(x)?;
        let a = y - cache.output[0];
        loss += a * a / n;
        critic.backward(&cache, &[-2.0 * a / n], &mut grad);
    }
    Ok((loss, grad))
}

/// Critic loss `mean(A^2)` with the bootstrapped target held fixed.
/// Returns the loss, its gradient and the per-sample advantages.
pub fn critic_loss_and_grad(
    critic: &Network,
    kind: CriticKind,
    batch: &[&Transition],
    actions: usize,
    gamma: f64,
) -> Result<(f64, Vec<f64>, Vec<f64>)> {
    let mut inputs = Vec::with_capacity(batch.len());
    let mut targets = Vec::with_capacity(batch.len());
    let mut advs = Vec::with_capacity(batch.len());
    for t in batch {
        let x = critic_input(kind, &t.input, t.action, actions);
        let q_now = critic.forward(&x)?[0];
        let q_next = if t.terminal {
            0.0
        } else {
            critic_value(critic, kind, &t.next_input, t.next_action, actions)?
        };
        targets.push(t.reward + gamma * q_next);
        advs.push(advantage(t.reward, q_next, q_now, gamma));
        inputs.push(x);
    }
    let (loss, grad) = critic_loss_with_targets(critic, &inputs, &targets)?;
    Ok((loss, grad, advs))
}

/// Negated mean clipped surrogate and its gradient. Samples whose old
/// probability is zero are skipped and counted.
pub fn actor_loss_and_grad(
    actor: &Network,
    old_actor: &Network,
    batch: &[&Transition],
    advantages: &[f64],
    eps: f64,
) -> Result<(f64, Vec<f64>, usize)> {
    let mut grad = vec![0.0; actor.param_count()];
    let mut loss = 0.0;
    let mut excluded = 0;
    let mut kept = Vec::with_capacity(batch.len());
    for (t, &a) in batch.iter().zip(advantages) {
        let p_old = actor_forward(old_actor, &t.input, &t.mask)?[t.action];
        if p_old > 0.0 {
            kept.push((*t, a, p_old));
        } else {
            excluded += 1;
        }
    }
    let n = kept.len().max(1) as f64;
    for (t, a, p_old) in kept {
        let cache = actor.forward_cached(&t.input)?;
        let probs = masked_softmax(&cache.output, &t.mask)?;
        let ratio = probs[t.action] / p_old;
        let surr = clipped_surrogate(ratio, a, eps);
        loss -= surr / n;
        if ratio * a <= ratio.clamp(1.0 - eps, 1.0 + eps) * a {
            let scale = -a * ratio / n;
            let d: Vec<f64> = probs
                .iter()
                .enumerate()
                .map(|(j, &p)| {
                    if t.mask[j] {
                        scale * (if j == t.action { 1.0 } else { 0.0 } - p)
                    } else {
                        0.0
                    }
                })
                .collect();
            actor.backward(&cache, &d, &mut grad);
        }
    }
    Ok((loss, grad, excluded))
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct UpdateReport {
    pub batches: usize,
    pub critic_loss: f64,
    pub actor_loss: f64,
    pub excluded: usize,
}

/// Shared actor and critic used by every drone.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Agent {
    pub actor: Network,
    pub critic: Network,
    pub old_actor: Network,
    pub config: LearningConfig,
    /// Features per observation frame.
    pub obs_dim: usize,
    pub actions: usize,
    pub mode: ActionMode,
}

impl Agent {
    pub fn new(obs_dim: usize, actions: usize, config: &LearningConfig, seed: u64) -> Self {
        let actor = Network::new(config.architecture(obs_dim, actions), seed, 0.01);
        let critic_in = obs_dim * config.frames() + if config.critic == CriticKind::Q { actions } else { 0 };
        let critic = Network::new(
            super::Architecture::feed_forward(critic_in, config.hidden_size, config.hidden_layers, 1),
            seed ^ 0x5EED_C817_1C00_0000,
            1.0,
        );
        Agent {
            old_actor: actor.clone(),
            actor,
            critic,
            config: config.clone(),
            obs_dim,
            actions,
            mode: ActionMode::Sample,
        }
    }

    pub fn input_len(&self) -> usize {
        self.obs_dim * self.config.frames()
    }

    pub fn probabilities(&self, input: &[f64], mask: &[bool]) -> Result<Vec<f64>> {
        actor_forward(&self.actor, input, mask)
    }

    /// Picks an action under the current mode; returns it with the
    /// probability the behaviour policy gave it.
    pub fn act<R: Rng>(&self, input: &[f64], mask: &[bool], rng: &mut R) -> Result<(usize, f64)> {
        match self.mode {
            ActionMode::Uniform => {
                let legal: Vec<usize> = (0..mask.len()).filter(|&j| mask[j]).collect();
                if legal.is_empty() {
                    return Err(Error::Policy("no legal action".into()));
                }
                let a = legal[rng.random_range(0..legal.len())];
                Ok((a, 1.0 / legal.len() as f64))
            }
            ActionMode::Greedy => {
                let p = self.probabilities(input, mask)?;
                let (a, &pa) = p
                    .iter()
                    .enumerate()
                    .max_by(|x, y| x.1.total_cmp(y.1).then(y.0.cmp(&x.0)))
                    .expect("non-empty");
                Ok((a, pa))
            }
            ActionMode::Sample => {
                let p = self.probabilities(input, mask)?;
                let dist = WeightedIndex::new(&p).map_err(|e| Error::Policy(e.to_string()))?;
                let a = dist.sample(rng);
                Ok((a, p[a]))
            }
        }
    }

    /// One PPO update: sync the old policy, then `updates_per_episode`
    /// mini-batch steps on critic and actor.
    pub fn update<R: Rng>(&mut self, buffer: &ReplayBuffer, rng: &mut R) -> Result<UpdateReport> {
        let cfg = self.config.clone();
        let mut report = UpdateReport::default();
        if buffer.len() < cfg.batch_size {
            return Ok(report);
        }
        self.old_actor = self.actor.clone();
        for k in 0..cfg.updates_per_episode {
            let batch = buffer.sample(cfg.batch_size, rng);
            let (closs, mut cgrad, mut advs) =
                critic_loss_and_grad(&self.critic, cfg.critic, &batch, self.actions, cfg.gamma)?;
            if cfg.normalize_advantages {
                standardize(&mut advs);
            }
            let (aloss, mut agrad, excluded) =
                actor_loss_and_grad(&self.actor, &self.old_actor, &batch, &advs, cfg.clip_epsilon)?;
            if !closs.is_finite() || !aloss.is_finite() {
                return Err(Error::NonFiniteLoss { batch: k });
            }
            clip_grad_norm(&mut cgrad, cfg.grad_clip);
            clip_grad_norm(&mut agrad, cfg.grad_clip);
            sgd_step(&mut self.critic.params, &cgrad, cfg.critic_lr);
            sgd_step(&mut self.actor.params, &agrad, cfg.actor_lr);
            report.batches += 1;
            report.critic_loss += closs;
            report.actor_loss += aloss;
            report.excluded += excluded;
        }
        if report.batches > 0 {
            report.critic_loss /= report.batches as f64;
            report.actor_loss /= report.batches as f64;
        }
        Ok(report)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::learning::Architecture;

    #[test]
    fn zero_network_is_uniform() {
        let net = Network::zeros(Architecture::feed_forward(3, 4, 2, 4));
        let p = actor_forward(&net, &[1.0, 2.0, 3.0], &[true; 4]).unwrap();
        assert!(p.iter().all(|&x| (x - 0.25).abs() < 1e-15));
        let masked = actor_forward(&net, &[1.0, 2.0, 3.0], &[true, false, true, false]).unwrap();
        assert_eq!(masked, vec![0.5, 0.0, 0.5, 0.0]);
    }

    #[test]
    fn standardize_moments() {
        let mut v = vec![1.0, 2.0, 3.0, 6.0];
        standardize(&mut v);
        let mean = v.iter().sum::<f64>() / 4.0;
        let var = v.iter().map(|x| x * x).sum::<f64>() / 4.0;
        assert!(mean.abs() < 1e-12 && (var - 1.0).abs() < 1e-12);
        let mut flat = vec![0.7; 5];
        standardize(&mut flat);
        assert_eq!(flat, vec![0.0; 5]);
        standardize(&mut []);
    }

    #[test]
    fn softmax_shift_invariant() {
        let a = masked_softmax(&[1.0, 2.0, 3.0], &[true; 3]).unwrap();
        let b = masked_softmax(&[101.0, 102.0, 103.0], &[true; 3]).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-15);
        }
        assert!(masked_softmax(&[1.0], &[false]).is_err());
    }

    #[test]
    fn scalar_examples() {
        assert_eq!(advantage(1.0, 0.0, 0.0, 0.95), 1.0);
        assert_eq!(advantage(0.3, 9.0, 0.1, 0.0), 0.3 - 0.1);
        assert!(advantage(0.0, 2.0, 1.9, 0.95).abs() < 1e-12);
        assert_eq!(policy_ratio(0.3, 0.3), Some(1.0));
        assert_eq!(policy_ratio(0.4, 0.2), Some(2.0));
        assert_eq!(policy_ratio(0.4, 0.0), None);
        assert_eq!(clipped_surrogate(1.0, 0.7, 0.2), 0.7);
        assert_eq!(clipped_surrogate(2.0, 1.0, 0.2), 1.2);
        assert_eq!(clipped_surrogate(0.5, -1.0, 0.2), -0.8);
    }

    fn transitions(n: usize, dim: usize, actions: usize) -> Vec<Transition> {
        (0..n)
            .map(|i| {
                let input: Vec<f64> = (0..dim).map(|j| ((i * 7 + j) as f64 * 0.31).sin()).collect();
                Transition {
                    next_input: input.iter().map(|v| v * 0.5).collect(),
                    input,
                    action: i % actions,
                    mask: vec![true; actions],
                    old_prob: 1.0 / actions as f64,
                    reward: -0.6 + 0.01 * i as f64,
                    next_action: (i + 1) % actions,
                    next_mask: vec![true; actions],
                    terminal: i % 5 == 4,
                }
            })
            .collect()
    }

    #[test]
    fn zero_advantage_leaves_actor_unchanged() {
        let cfg = LearningConfig {
            hidden_size: 8,
            ..Default::default()
        };
        let agent = Agent::new(5, 3, &cfg, 1);
        let ts = transitions(10, 5, 3);
        let refs: Vec<&Transition> = ts.iter().collect();
        let (loss, grad, _) = actor_loss_and_grad(&agent.actor, &agent.actor, &refs, &[0.0; 10], 0.2).unwrap();
        assert_eq!(loss, 0.0);
        assert!(grad.iter().all(|g| *g == 0.0));
    }

    #[test]
    fn update_is_deterministic() {
        use rand::SeedableRng;
        let cfg = LearningConfig {
            hidden_size: 8,
            batch_size: 8,
            buffer_capacity: 32,
            ..Default::default()
        };
        let mut buf = ReplayBuffer::new(32);
        for t in transitions(20, 5, 3) {
            buf.push(t);
        }
        let run = || {
            let mut agent = Agent::new(5, 3, &cfg, 4);
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
            agent.update(&buf, &mut rng).unwrap();
            agent
        };
        let a = run();
        assert_eq!(a, run());
        assert_ne!(a.actor, Agent::new(5, 3, &cfg, 4).actor);
    }
}
