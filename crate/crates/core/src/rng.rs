//! Seeded random streams.
//!
//! Every stochastic stage (weight init, shuffling, k-means++ seeding, noise
//! synthesis, t-SNE init) draws from a `ChaCha8` generator keyed by an
//! explicit `(seed, stream)` pair, so distinct pipeline stages and distinct
//! samples get independent streams that never depend on evaluation order.

use crate::num;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Well-known stream ids, so stage streams cannot collide by accident.
pub mod stream {
    pub const WEIGHT_INIT: u64 = 1;
    pub const SHUFFLE: u64 = 2;
    pub const KMEANS: u64 = 3;
    pub const TSNE: u64 = 4;
    /// Per-sample synthesis streams start here; sample `i` uses `SYNTH + i`.
    pub const SYNTH: u64 = 1 << 32;
}

/// Deterministic generator for a `(seed, stream)` pair.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Uniform draw from `[lo, hi)`.
pub fn uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * rng.gen::<f64>()
}

/// Standard normal via Box-Muller (keeps `no_std` builds free of rand_distr).
pub fn normal(rng: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = loop {
        let u = rng.gen::<f64>();
        if u > 0.0 {
            break u;
        }
    };
    let u2: f64 = rng.gen();
    num::sqrt(-2.0 * num::ln(u1)) * num::cos(2.0 * num::PI * u2)
}

/// Seeded Fisher-Yates shuffle of `0..n`.
pub fn permutation(rng: &mut ChaCha8Rng, n: usize) -> alloc::vec::Vec<usize> {
    let mut idx: alloc::vec::Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        let j = rng.gen_range(0..=i);
        idx.swap(i, j);
    }
    idx
}
