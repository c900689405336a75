//! Deterministic sampling helpers. Every suite draws from a ChaCha stream
//! seeded explicitly (default seed 0).

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub type SampleRng = ChaCha8Rng;

pub const DEFAULT_SEED: u64 = 0;

pub fn seeded_rng(seed: u64) -> SampleRng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn standard_normal_vector<R: Rng>(rng: &mut R, dim: usize) -> DVector<f64> {
    DVector::from_fn(dim, |_, _| rng.sample(StandardNormal))
}

/// Uniform point on the unit sphere `S^{dim-1}`.
pub fn unit_vector<R: Rng>(rng: &mut R, dim: usize) -> DVector<f64> {
    loop {
        let v = standard_normal_vector(rng, dim);
        let n = v.norm();
        if n > 1e-8 {
            return v / n;
        }
    }
}

/// Uniform point in the open ball of the given radius in `R^dim`.
pub fn ball_point<R: Rng>(rng: &mut R, dim: usize, radius: f64) -> DVector<f64> {
    let u: f64 = rng.random();
    unit_vector(rng, dim) * (radius * u.powf(1.0 / dim as f64))
}

pub fn uniform<R: Rng>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * rng.random::<f64>()
}
