//! Seeded random generation for matrices and covariance instances.
//!
//! All randomness in the crate flows from explicit `u64` seeds through
//! ChaCha streams. Standard normals are produced by the Box–Muller
//! transform (pairs of uniforms to pairs of normals), so a stream is
//! reproducible from the seed alone, independent of any external
//! distribution crate. Parallel work splits seeds deterministically with
//! [`substream_seed`]; results therefore do not depend on the scheduling
//! of worker threads.

use nalgebra::DMatrix;
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::matcore::SymMatrix;

/// SplitMix64 finalizer; used to derive well-separated substream seeds.
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Deterministic seed for shard `index` of a run seeded with `seed`.
pub fn substream_seed(seed: u64, index: u64) -> u64 {
    splitmix64(seed ^ splitmix64(index.wrapping_add(0xA5A5_A5A5_0000_0001)))
}

/// Gaussian stream over ChaCha8: uniforms in `(0, 1]` fed through
/// Box–Muller.
pub struct GaussStream {
    rng: ChaCha8Rng,
    spare: Option<f64>,
}

impl GaussStream {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
            spare: None,
        }
    }

    /// Uniform in `(0, 1]` from the top 53 bits of the next word.
    pub fn uniform(&mut self) -> f64 {
        (((self.rng.next_u64() >> 11) + 1) as f64) * (1.0 / 9_007_199_254_740_992.0)
    }

    /// Standard normal via Box–Muller.
    pub fn normal(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        let u1 = self.uniform();
        let u2 = self.uniform();
        let radius = (-2.0 * u1.ln()).sqrt();
        let angle = std::f64::consts::TAU * u2;
        self.spare = Some(radius * angle.sin());
        radius * angle.cos()
    }

    /// Uniform in `[lo, hi)`.
    pub fn uniform_in(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * (self.uniform() - f64::EPSILON).max(0.0)
    }

    /// Uniform integer in `[lo, hi]`.
    pub fn integer_in(&mut self, lo: usize, hi: usize) -> usize {
        debug_assert!(hi >= lo);
        lo + (self.rng.next_u64() % (hi - lo + 1) as u64) as usize
    }

    pub fn matrix(&mut self, rows: usize, cols: usize) -> DMatrix<f64> {
        DMatrix::from_fn(rows, cols, |_, _| self.normal())
    }

    pub fn symmetric(&mut self, dim: usize, scale: f64) -> SymMatrix {
        let g = self.matrix(dim, dim);
        SymMatrix::symmetrized(g * scale)
    }

    /// Random positive definite matrix `G Gᵀ/dim + ridge·I`, well
    /// conditioned for the desk scales used in the verification suites.
    pub fn positive_definite(&mut self, dim: usize, ridge: f64) -> SymMatrix {
        let g = self.matrix(dim, dim);
        let gram = &g * g.transpose() / dim.max(1) as f64;
        SymMatrix::symmetrized(gram + DMatrix::identity(dim, dim) * ridge)
    }
}
