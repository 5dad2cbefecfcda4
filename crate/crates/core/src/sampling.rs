//! Seeded random streams shared by the Monte-Carlo estimators.
//!
//! Every stream is a ChaCha8 generator keyed by a 64-bit seed and a stream
//! index, so shards and per-cone jobs draw from disjoint, reproducible
//! sequences regardless of scheduling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};

/// Default Monte-Carlo seed.
pub const DEFAULT_SEED: u64 = 42;

/// Generator for stream `stream` of `seed`.
pub fn rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

/// SplitMix64 finalizer over `(seed, key)`; used to derive child seeds.
pub fn derive_seed(seed: u64, key: u64) -> u64 {
    let mut z = seed ^ key.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(0x632B_E59B_D9B4_E019);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Symmetric Dirichlet(1, ..., 1) weights of length `n`.
pub fn dirichlet_ones<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<f64> {
    let mut w: Vec<f64> = (0..n).map(|_| Exp1.sample(rng)).collect();
    let total: f64 = w.iter().sum();
    w.iter_mut().for_each(|x| *x /= total);
    w
}

/// Fill `out` with independent normals of variance `variance` using the
/// polar Box-Muller transform on uniforms.
pub fn box_muller_fill<R: Rng + ?Sized>(rng: &mut R, variance: f64, out: &mut [f64]) {
    let sd = variance.sqrt();
    let mut i = 0;
    while i < out.len() {
        let (u, v, s) = loop {
            let u = 2.0 * rng.random::<f64>() - 1.0;
            let v = 2.0 * rng.random::<f64>() - 1.0;
            let s = u * u + v * v;
            if s > 0.0 && s < 1.0 {
                break (u, v, s);
            }
        };
        let k = (-2.0 * s.ln() / s).sqrt() * sd;
        out[i] = u * k;
        if i + 1 < out.len() {
            out[i + 1] = v * k;
        }
        i += 2;
    }
}
