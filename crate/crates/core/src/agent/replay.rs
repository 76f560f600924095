use rand::Rng;

use super::sac::ACTION_DIM;
use crate::env::{Observation, N_SCALARS};

/// Observation snapshot owned by the buffer.
#[derive(Debug, Clone, PartialEq)]
pub struct StoredObs {
    pub image: Vec<f64>,
    pub scalars: [f64; N_SCALARS],
}

impl StoredObs {
    pub fn from_observation(obs: &Observation<f64>) -> Self {
        StoredObs { image: obs.image.clone(), scalars: obs.scalars }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StoredTransition {
    pub obs: StoredObs,
    pub action: [f64; ACTION_DIM],
    pub reward: f64,
    pub next_obs: StoredObs,
    /// True only for environment terminals (collision, negative g); timeout
    /// truncation stores false so the target keeps bootstrapping.
    pub done: bool,
}

/// Fixed-capacity ring buffer over transitions.
#[derive(Debug, Clone)]
pub struct ReplayBuffer {
    data: Vec<StoredTransition>,
    capacity: usize,
    head: usize,
}

impl ReplayBuffer {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity > 0);
        ReplayBuffer { data: Vec::with_capacity(capacity.min(4096)), capacity, head: 0 }
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn push(&mut self, transition: StoredTransition) {
        if self.data.len() < self.capacity {
            self.data.push(transition);
        } else {
            self.data[self.head] = transition;
        }
        self.head = (self.head + 1) % self.capacity;
    }

    pub fn get(&self, index: usize) -> &StoredTransition {
        &self.data[index]
    }

    /// Uniform indices with replacement; caller checks len >= batch first.
    pub fn sample_indices<R: Rng>(&self, batch: usize, rng: &mut R) -> Vec<usize> {
        (0..batch).map(|_| rng.gen_range(0..self.data.len())).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn transition(tag: f64) -> StoredTransition {
        let obs = StoredObs { image: vec![tag], scalars: [tag; N_SCALARS] };
        StoredTransition {
            obs: obs.clone(),
            action: [0.0, 0.0],
            reward: tag,
            next_obs: obs,
            done: false,
        }
    }

    #[test]
    fn ring_keeps_last_capacity_transitions() {
        let capacity = 8;
        let mut buf = ReplayBuffer::new(capacity);
        for i in 0..capacity + 5 {
            buf.push(transition(i as f64));
        }
        assert_eq!(buf.len(), capacity);
        let mut rewards: Vec<f64> = (0..capacity).map(|i| buf.get(i).reward).collect();
        rewards.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let expected: Vec<f64> = (5..capacity + 5).map(|i| i as f64).collect();
        assert_eq!(rewards, expected);
    }

    #[test]
    fn sampling_covers_buffer() {
        let mut buf = ReplayBuffer::new(16);
        for i in 0..16 {
            buf.push(transition(i as f64));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let idx = buf.sample_indices(1000, &mut rng);
        assert!(idx.iter().all(|&i| i < 16));
        let mut seen = [false; 16];
        for &i in &idx {
            seen[i] = true;
        }
        assert!(seen.iter().all(|&s| s));
    }
}
