//! Seeded random draws with an index log.
//!
//! One generator per run; every vector draw increments a counter so a failing
//! check can name the draw indices it consumed, making failures replayable
//! from the scenario seed alone.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::linalg::C64;

pub struct SeededRng {
    inner: ChaCha8Rng,
    draws: u64,
}

impl SeededRng {
    pub fn new(seed: u64) -> Self {
        SeededRng {
            inner: ChaCha8Rng::seed_from_u64(seed),
            draws: 0,
        }
    }

    /// Number of vector draws made so far.
    pub fn draw_count(&self) -> u64 {
        self.draws
    }

    fn unit_interval(&mut self) -> f64 {
        self.inner.random_range(-1.0..1.0)
    }

    /// Random complex vector with entries uniform in the unit square,
    /// normalized to unit Euclidean norm. Counts as one draw.
    pub fn complex_vector(&mut self, dim: usize) -> Vec<C64> {
        self.draws += 1;
        let mut v: Vec<C64> = (0..dim)
            .map(|_| Complex64::new(self.unit_interval(), self.unit_interval()))
            .collect();
        normalize(&mut v);
        v
    }

    /// Random real vector (imaginary parts zero), unit norm. One draw.
    pub fn real_vector(&mut self, dim: usize) -> Vec<C64> {
        self.draws += 1;
        let mut v: Vec<C64> = (0..dim)
            .map(|_| Complex64::new(self.unit_interval(), 0.0))
            .collect();
        normalize(&mut v);
        v
    }

    pub fn index(&mut self, bound: usize) -> usize {
        self.inner.random_range(0..bound)
    }

    pub fn real_in(&mut self, lo: f64, hi: f64) -> f64 {
        self.inner.random_range(lo..hi)
    }
}

fn normalize(v: &mut [C64]) {
    let norm: f64 = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    if norm > 1e-300 {
        for c in v.iter_mut() {
            *c /= norm;
        }
    } else {
        v[0] = Complex64::new(1.0, 0.0);
    }
}
