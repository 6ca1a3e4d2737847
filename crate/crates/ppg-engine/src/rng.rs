//! Deterministic, splittable random streams.
//!
//! Every run derives all of its randomness from one `u64` seed through a
//! ChaCha8 generator addressed by 64-bit stream ids. A [`RngStream`] is a
//! (key, stream id) pair plus the generator positioned at the start of that
//! stream; `split` derives a child stream by mixing the id, and the engine
//! addresses its per-(step, lane, particle) substreams through the
//! collision-free packing in [`pack_substream`]. Because each particle at
//! each step draws from its own stream, draw-count differences between
//! particles (rejection loops, branch-dependent sampling) can never
//! desynchronize the others — which is what makes the row-parallel and
//! scalar execution paths bit-identical.
//!
//! Lane 0 is reserved for transition kernels, lane 1 for resampling.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Kernel draws at a given step use this lane.
pub const LANE_KERNEL: u64 = 0;
/// The resampler's draws at a given step use this lane (particle field 0).
pub const LANE_RESAMPLE: u64 = 1;

/// splitmix64's finalizer: a cheap, well-mixed u64 -> u64 permutation.
fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E3779B97F4A7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D049BB133111EB);
    x ^ (x >> 31)
}

/// Expand a u64 seed into a 256-bit ChaCha key by iterating splitmix64.
fn expand_key(seed: u64) -> [u8; 32] {
    let mut key = [0u8; 32];
    let mut x = seed;
    for chunk in key.chunks_exact_mut(8) {
        x = splitmix64(x);
        chunk.copy_from_slice(&x.to_le_bytes());
    }
    key
}

/// Pack (step, lane, particle) into a stream id with disjoint bit fields:
/// bits 0..32 particle, bit 32 lane, bits 33.. step. Collision-free for
/// particle counts below 2^32 and horizons below 2^31.
pub fn pack_substream(step: u64, lane: u64, particle: u64) -> u64 {
    debug_assert!(lane < 2 && particle < (1 << 32) && step < (1 << 31));
    (step << 33) | (lane << 32) | particle
}

/// Derive the seed for replicate `r` of a run seeded with `seed`.
pub fn derive_replicate_seed(seed: u64, r: u64) -> u64 {
    splitmix64(seed ^ splitmix64(r.wrapping_add(1)))
}

/// A stream of the keyed ChaCha8 keystream. Implements [`RngCore`]; draw
/// from it like any other generator.
#[derive(Clone, Debug)]
pub struct RngStream {
    key: [u8; 32],
    id: u64,
    rng: ChaCha8Rng,
}

impl RngStream {
    /// Root stream (id 0) for a run seed.
    pub fn new(seed: u64) -> Self {
        let key = expand_key(seed);
        let mut rng = ChaCha8Rng::from_seed(key);
        rng.set_stream(0);
        RngStream { key, id: 0, rng }
    }

    pub fn id(&self) -> u64 {
        self.id
    }

    /// Child stream `i`. A pure function of (key, id, i): independent of
    /// how much has been drawn from `self`, so splitting is repeatable.
    pub fn split(&self, i: u64) -> Self {
        let id = splitmix64(self.id.rotate_left(17) ^ splitmix64(i));
        self.at_stream(id)
    }

    /// Directly addressed substream; the engine reserves the
    /// [`pack_substream`] address space of the *root* stream for its
    /// per-(step, lane, particle) draws.
    pub fn substream(&self, id: u64) -> Self {
        self.at_stream(id)
    }

    fn at_stream(&self, id: u64) -> Self {
        let mut rng = ChaCha8Rng::from_seed(self.key);
        rng.set_stream(id);
        RngStream {
            key: self.key,
            id,
            rng,
        }
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dest: &mut [u8]) {
        self.rng.fill_bytes(dest)
    }

    fn try_fill_bytes(&mut self, dest: &mut [u8]) -> Result<(), rand::Error> {
        self.rng.try_fill_bytes(dest)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn same_seed_same_stream() {
        let mut a = RngStream::new(42);
        let mut b = RngStream::new(42);
        for _ in 0..16 {
            assert_eq!(a.next_u64(), b.next_u64());
        }
    }

    #[test]
    fn split_is_position_independent() {
        let mut parent = RngStream::new(7);
        let before = parent.split(3);
        let _ = parent.gen::<f64>(); // advance the parent
        let after = parent.split(3);
        let mut x = before;
        let mut y = after;
        for _ in 0..8 {
            assert_eq!(x.next_u64(), y.next_u64());
        }
    }

    #[test]
    fn distinct_children_differ() {
        let parent = RngStream::new(7);
        let mut a = parent.split(0);
        let mut b = parent.split(1);
        let mut c = parent.substream(pack_substream(1, LANE_KERNEL, 0));
        let mut d = parent.substream(pack_substream(1, LANE_KERNEL, 1));
        assert_ne!(a.next_u64(), b.next_u64());
        assert_ne!(c.next_u64(), d.next_u64());
    }

    #[test]
    fn packing_is_injective_on_the_relevant_ranges() {
        let mut seen = std::collections::HashSet::new();
        for step in [1u64, 2, 1000] {
            for lane in [LANE_KERNEL, LANE_RESAMPLE] {
                for particle in [0u64, 1, 99_999] {
                    assert!(seen.insert(pack_substream(step, lane, particle)));
                }
            }
        }
    }

    #[test]
    fn replicate_seeds_are_distinct() {
        let seeds: Vec<u64> = (0..32).map(|r| derive_replicate_seed(5, r)).collect();
        let unique: std::collections::HashSet<_> = seeds.iter().collect();
        assert_eq!(unique.len(), seeds.len());
    }
}
