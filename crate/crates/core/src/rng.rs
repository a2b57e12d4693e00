use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Counter-based randomness: the draw for `(trial, time, neuron)` is the
/// `time * width + neuron`-th 64-bit word of ChaCha8 stream `trial` under the
/// root seed, where `width` is the network size. Draws never depend on the
/// order in which trials or steps are evaluated.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RandomnessContract {
    pub root_seed: u64,
}

/// Separate generators for everything that is not a firing draw.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Purpose {
    InitialState,
    Sampling,
    Perturbation,
}

impl Purpose {
    fn tag(self) -> u64 {
        match self {
            Purpose::InitialState => 1,
            Purpose::Sampling => 2,
            Purpose::Perturbation => 3,
        }
    }
}

#[inline]
pub fn unit_f64(word: u64) -> f64 {
    (word >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

impl RandomnessContract {
    pub fn new(root_seed: u64) -> Self {
        Self { root_seed }
    }

    fn base(&self, trial: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.root_seed);
        rng.set_stream(trial);
        rng
    }

    /// Uniform draw in [0, 1) for one neuron of a `width`-neuron network.
    pub fn draw(&self, trial: u64, time: u64, neuron: usize, width: usize) -> f64 {
        assert!(neuron < width);
        let mut rng = self.base(trial);
        rng.set_word_pos(2 * (time as u128 * width as u128 + neuron as u128));
        unit_f64(rng.next_u64())
    }

    pub fn stream(&self, trial: u64, width: usize) -> TrialStream {
        TrialStream { rng: self.base(trial), width, next_time: 0 }
    }

    /// Generator for initial states, sampled cases and perturbations.
    pub fn aux_rng(&self, purpose: Purpose, trial: u64) -> ChaCha8Rng {
        let seed = self.root_seed ^ purpose.tag().wrapping_mul(0x9E37_79B9_7F4A_7C15);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(trial);
        rng
    }
}

/// Sequential reader of one trial's draws, one block of `width` per step.
pub struct TrialStream {
    rng: ChaCha8Rng,
    width: usize,
    next_time: u64,
}

impl TrialStream {
    pub fn width(&self) -> usize {
        self.width
    }

    /// Fill `out` with the draws for every neuron at `time`.
    pub fn fill(&mut self, time: u64, out: &mut [f64]) {
        assert_eq!(out.len(), self.width);
        if time != self.next_time {
            self.rng.set_word_pos(2 * time as u128 * self.width as u128);
        }
        for slot in out.iter_mut() {
            *slot = unit_f64(self.rng.next_u64());
        }
        self.next_time = time + 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stream_matches_pointwise_draws() {
        let c = RandomnessContract::new(99);
        let width = 7;
        let mut s = c.stream(3, width);
        let mut buf = vec![0.0; width];
        for time in [0u64, 1, 2, 10, 11, 5] {
            s.fill(time, &mut buf);
            for (j, &v) in buf.iter().enumerate() {
                assert_eq!(v.to_bits(), c.draw(3, time, j, width).to_bits());
            }
        }
    }

    #[test]
    fn draws_differ_across_trials_and_seeds() {
        let a = RandomnessContract::new(1);
        let b = RandomnessContract::new(2);
        assert_ne!(a.draw(0, 0, 0, 4), a.draw(1, 0, 0, 4));
        assert_ne!(a.draw(0, 0, 0, 4), b.draw(0, 0, 0, 4));
        assert_ne!(a.draw(0, 0, 0, 4), a.draw(0, 1, 0, 4));
        let v = a.draw(5, 6, 3, 4);
        assert!((0.0..1.0).contains(&v));
    }

    #[test]
    fn aux_streams_are_distinct_from_draws() {
        let c = RandomnessContract::new(1);
        let mut r = c.aux_rng(Purpose::InitialState, 0);
        let mut q = c.aux_rng(Purpose::Sampling, 0);
        let first = unit_f64(r.next_u64());
        assert_ne!(first, unit_f64(q.next_u64()));
        assert_ne!(first, c.draw(0, 0, 0, 1));
    }
}
