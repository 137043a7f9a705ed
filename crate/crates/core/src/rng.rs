//! Seeded, splittable scenario streams.
//!
//! Every draw is a pure function of `(master_seed, stream_id, counter)`: the
//! stream is a ChaCha8 keystream keyed by the master seed with the stream id
//! selecting the 64-bit nonce, so streams never overlap and reproduce
//! bit-for-bit on every platform.
//!
//! Stream ids are partitioned by purpose in the top byte (see [`StreamId`]),
//! so per-iteration scenario draws, constraint-subset draws and validation
//! draws never share a keystream.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Identifies one independent stream under a master seed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StreamId(u64);

impl StreamId {
    const TAG_SHIFT: u32 = 56;
    const INDEX_MASK: u64 = (1 << Self::TAG_SHIFT) - 1;

    const SCENARIO: u64 = 1;
    const SUBSET: u64 = 2;
    const VALIDATION: u64 = 3;
    const DATA: u64 = 4;

    /// Raw id. Ids below `2^56` never collide with the tagged constructors.
    pub const fn raw(id: u64) -> Self {
        StreamId(id)
    }

    const fn tagged(tag: u64, index: u64) -> Self {
        StreamId((tag << Self::TAG_SHIFT) | (index & Self::INDEX_MASK))
    }

    /// Scenario draw of solver iteration `k`.
    pub const fn scenario(k: u64) -> Self {
        Self::tagged(Self::SCENARIO, k)
    }

    /// Constraint-subset draw of solver iteration `k`.
    pub const fn subset(k: u64) -> Self {
        Self::tagged(Self::SUBSET, k)
    }

    /// Monte-Carlo validation task.
    pub const fn validation(task: u64) -> Self {
        Self::tagged(Self::VALIDATION, task)
    }

    /// Synthetic data / instance generation.
    pub const fn data(task: u64) -> Self {
        Self::tagged(Self::DATA, task)
    }

    pub const fn get(self) -> u64 {
        self.0
    }
}

/// A deterministic pseudo-random stream owned by one consumer.
#[derive(Clone, Debug)]
pub struct SeededStream {
    rng: ChaCha8Rng,
}

impl SeededStream {
    pub fn new(master_seed: u64, stream: StreamId) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
        rng.set_stream(stream.get());
        SeededStream { rng }
    }

    /// Uniform draw on `[0, 1)` with 53 random bits.
    #[inline]
    pub fn unit(&mut self) -> f64 {
        (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform draw on `[lo, hi)`.
    #[inline]
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.unit()
    }

    /// Uniform index in `0..n`.
    #[inline]
    pub fn index(&mut self, n: usize) -> usize {
        self.rng.random_range(0..n)
    }

    /// Standard normal draw.
    pub fn normal(&mut self) -> f64 {
        self.rng.sample(rand_distr::StandardNormal)
    }

    /// `m` distinct indices from `0..n`, uniformly without replacement, in
    /// draw order.
    pub fn sample_without_replacement(&mut self, n: usize, m: usize) -> Vec<usize> {
        rand::seq::index::sample(&mut self.rng, n, m).into_vec()
    }
}

impl RngCore for SeededStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.rng.fill_bytes(dst)
    }
}
