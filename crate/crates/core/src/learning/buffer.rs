use std::collections::VecDeque;

use rand::Rng;

use crate::env::Transition;

/// FIFO transition store; the oldest samples are evicted at capacity.
#[derive(Debug, Clone, Default)]
pub struct ReplayBuffer {
    items: VecDeque<Transition>,
    capacity: usize,
}

impl ReplayBuffer {
    pub fn new(capacity: usize) -> Self {
        ReplayBuffer {
            items: VecDeque::with_capacity(capacity),
            capacity: capacity.max(1),
        }
    }

    pub fn push(&mut self, t: Transition) {
        if self.items.len() == self.capacity {
            self.items.pop_front();
        }
        self.items.push_back(t);
    }

    pub fn extend(&mut self, ts: impl IntoIterator<Item = Transition>) {
        for t in ts {
            self.push(t);
        }
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    /// `n` distinct transitions (all of them if fewer are stored).
    pub fn sample<R: Rng>(&self, n: usize, rng: &mut R) -> Vec<&Transition> {
        let n = n.min(self.items.len());
        rand::seq::index::sample(rng, self.items.len(), n)
            .iter()
            .map(|i| &self.items[i])
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn t(r: f64) -> Transition {
        Transition {
            input: vec![r],
            action: 0,
            mask: vec![true],
            old_prob: 1.0,
            reward: r,
            next_input: vec![r],
            next_action: 0,
            next_mask: vec![true],
            terminal: false,
        }
    }

    #[test]
    fn fifo_eviction() {
        let mut b = ReplayBuffer::new(3);
        for i in 0..5 {
            b.push(t(i as f64));
        }
        assert_eq!(b.len(), 3);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0);
        let mut rs: Vec<f64> = b.sample(3, &mut rng).iter().map(|x| x.reward).collect();
        rs.sort_by(f64::total_cmp);
        assert_eq!(rs, vec![2.0, 3.0, 4.0]);
    }

    #[test]
    fn sample_without_replacement() {
        let mut b = ReplayBuffer::new(100);
        b.extend((0..100).map(|i| t(i as f64)));
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let mut rs: Vec<f64> = b.sample(64, &mut rng).iter().map(|x| x.reward).collect();
        rs.sort_by(f64::total_cmp);
        rs.dedup();
        assert_eq!(rs.len(), 64);
    }
}
