//! Seeded substreams and a few sampling primitives.
//!
//! Every estimator in the crate derives its randomness from an explicit
//! `u64` seed so that identical inputs give identical outputs. Independent
//! pieces of work (shells, radii, levels, workers) each get their own stream
//! via [`substream`], which mixes the seed with a tag list.

use alloc::vec::Vec;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::math;

/// Deterministic stream cipher RNG used throughout the crate.
pub type Stream = ChaCha8Rng;

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derive an independent stream from `seed` and a list of tags.
pub fn substream(seed: u64, tags: &[u64]) -> Stream {
    let mut state = splitmix(seed ^ 0x7461_6e67_656e_6379); // "tangency"
    for &t in tags {
        state = splitmix(state ^ t);
    }
    ChaCha8Rng::seed_from_u64(state)
}

/// Standard normal via Box-Muller.
pub fn normal(rng: &mut Stream) -> f64 {
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen_range(0.0..1.0);
    math::sqrt(-2.0 * math::ln(u1)) * math::cos(2.0 * core::f64::consts::PI * u2)
}

/// Uniform direction on the unit sphere of dimension `dim`.
pub fn unit_vector(rng: &mut Stream, dim: usize) -> Vec<f64> {
    if dim == 1 {
        return if rng.gen::<bool>() {
            [1.0].into()
        } else {
            [-1.0].into()
        };
    }
    loop {
        let v: Vec<f64> = (0..dim).map(|_| normal(rng)).collect();
        let n = math::norm(&v);
        if n > 1e-12 {
            return v.iter().map(|x| x / n).collect();
        }
    }
}

/// Uniform point in the ball of radius `r` centered at the origin.
pub fn ball_point(rng: &mut Stream, dim: usize, r: f64) -> Vec<f64> {
    let dir = unit_vector(rng, dim);
    let u: f64 = rng.gen_range(0.0..1.0f64);
    let rad = r * math::powf(u, 1.0 / dim as f64);
    dir.iter().map(|d| d * rad).collect()
}
