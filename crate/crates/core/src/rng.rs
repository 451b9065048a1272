//! Project-wide random number generation.
//!
//! Every random draw comes from ChaCha8 (`rand_chacha::ChaCha8Rng`), seeded
//! with `SeedableRng::seed_from_u64` and split into independent substreams
//! with `set_stream`. Uniforms are built from the top 53 bits of `next_u64`,
//! and the samplers below are plain inversion / Box-Muller so that a dataset
//! can be regenerated bit-for-bit from the seed by any implementation of the
//! same recipe.

use rand::seq::SliceRandom;
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

/// Independent generator for substream `stream` of `seed`.
pub fn substream(seed: u64, stream: u64) -> Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Derives a child seed, so nested procedures get their own stream families.
pub fn derive_seed(seed: u64, tag: u64) -> u64 {
    // splitmix64 finalizer over the pair
    let mut z = seed ^ tag.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Uniform on [0, 1) with 53 bits of precision.
pub fn unit(rng: &mut Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Uniform on (0, 1].
fn unit_open(rng: &mut Rng) -> f64 {
    1.0 - unit(rng)
}

pub fn uniform(rng: &mut Rng, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * unit(rng)
}

pub fn bernoulli(rng: &mut Rng, p: f64) -> bool {
    unit(rng) < p
}

/// Sum of `size` Bernoulli(p) trials.
pub fn binomial(rng: &mut Rng, size: u32, p: f64) -> u32 {
    (0..size).filter(|_| bernoulli(rng, p)).count() as u32
}

/// Exponential with the given rate, by inversion.
pub fn exponential(rng: &mut Rng, rate: f64) -> f64 {
    -unit_open(rng).ln() / rate
}

/// Poisson by sequential search of the CDF with one uniform per draw.
pub fn poisson(rng: &mut Rng, lambda: f64) -> u32 {
    let u = unit(rng);
    let mut k = 0u32;
    let mut p = (-lambda).exp();
    let mut cdf = p;
    while u >= cdf {
        k += 1;
        p *= lambda / k as f64;
        cdf += p;
        if p == 0.0 && cdf <= u {
            // rounding left the CDF short of u; stop at the last reachable count
            break;
        }
    }
    k
}

/// Normal by the cosine branch of Box-Muller (two uniforms per draw).
pub fn normal(rng: &mut Rng, mean: f64, sd: f64) -> f64 {
    let u1 = unit_open(rng);
    let u2 = unit(rng);
    mean + sd * (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

pub fn shuffle<T>(rng: &mut Rng, items: &mut [T]) {
    items.shuffle(rng);
}

pub fn permutation(rng: &mut Rng, n: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..n).collect();
    shuffle(rng, &mut idx);
    idx
}
