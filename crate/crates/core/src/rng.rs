//! Seeded pseudorandom streams.
//!
//! Every stream is a ChaCha8 generator (`rand_chacha::ChaCha8Rng`) whose key
//! is expanded from a 64-bit seed with `SeedableRng::seed_from_u64`. Independent
//! sub-streams of one seed use the ChaCha stream id, computed by folding a
//! list of integer tags through SplitMix64. Integers below `n` are drawn by
//! rejection sampling on 32-bit outputs, so streams are reproducible on any
//! platform.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Owned, single-consumer random stream.
#[derive(Clone, Debug)]
pub struct RandomSource {
    rng: ChaCha8Rng,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Folds tags into one stream id.
pub fn stream_id(tags: &[u64]) -> u64 {
    tags.iter().fold(0x6d63_725f_7374_7265, |acc, &t| splitmix64(acc ^ splitmix64(t)))
}

/// FNV-1a hash of a label, for use as a stream tag.
pub fn label_tag(label: &str) -> u64 {
    label.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| (h ^ b as u64).wrapping_mul(0x0100_0000_01b3))
}

impl RandomSource {
    pub fn new(seed: u64) -> Self {
        RandomSource { rng: ChaCha8Rng::seed_from_u64(seed) }
    }

    /// Sub-stream of `seed` identified by `tags`; distinct tag lists give
    /// independent streams.
    pub fn derive(seed: u64, tags: &[u64]) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream_id(tags));
        RandomSource { rng }
    }

    pub fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    pub fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    /// Uniform integer in `[0, n)`.
    pub fn below(&mut self, n: u32) -> u32 {
        assert!(n > 0);
        let zone = u32::MAX - (u32::MAX - n + 1) % n;
        loop {
            let x = self.next_u32();
            if x <= zone {
                return x % n;
            }
        }
    }

    /// Uniform in `[0, 1)` with 53 random bits.
    pub fn unit(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn bit(&mut self) -> bool {
        self.next_u32() & 1 == 1
    }

    /// Standard normal deviate.
    pub fn normal(&mut self) -> f64 {
        // Box-Muller; 1 - unit() lies in (0, 1].
        let u = 1.0 - self.unit();
        let v = self.unit();
        (-2.0 * u.ln()).sqrt() * (2.0 * std::f64::consts::PI * v).cos()
    }

    /// In-place Fisher-Yates shuffle.
    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.below(i as u32 + 1) as usize;
            items.swap(i, j);
        }
    }
}
