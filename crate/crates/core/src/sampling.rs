//! Seeded random sampling shared by every verification suite.

use nalgebra::Vector3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::geometry::{ChartCoords, Hemisphere, S3Point};

/// Deterministic sampler: identical seeds give identical streams on every
/// platform.
#[derive(Debug, Clone)]
pub struct Sampler {
    rng: ChaCha8Rng,
}

impl Sampler {
    pub fn new(seed: u64) -> Self {
        Self { rng: ChaCha8Rng::seed_from_u64(seed) }
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.rng.random::<f64>()
    }

    pub fn index(&mut self, n: usize) -> usize {
        self.rng.random_range(0..n)
    }

    /// Uniform on S³ (normalized Gaussian 4-vector).
    pub fn point(&mut self) -> S3Point {
        loop {
            let q: [f64; 4] = std::array::from_fn(|_| self.rng.sample(StandardNormal));
            if let Ok(p) = S3Point::from_components(q) {
                return p;
            }
        }
    }

    /// Uniform in the ball |v| ≤ radius.
    pub fn ball(&mut self, radius: f64) -> Vector3<f64> {
        loop {
            let v = Vector3::new(self.uniform(-1.0, 1.0), self.uniform(-1.0, 1.0), self.uniform(-1.0, 1.0));
            if v.norm_squared() <= 1.0 {
                return v * radius;
            }
        }
    }

    pub fn cube(&mut self, half_width: f64) -> Vector3<f64> {
        Vector3::new(
            self.uniform(-half_width, half_width),
            self.uniform(-half_width, half_width),
            self.uniform(-half_width, half_width),
        )
    }

    /// Northern-hemisphere chart point with |ε| ≤ frac·R.
    pub fn chart_point(&mut self, radius: f64, frac: f64) -> ChartCoords {
        ChartCoords {
            eps: self.ball(frac * radius),
            hemisphere: Hemisphere::North,
            radius,
        }
    }

    pub fn phase(&mut self) -> f64 {
        self.uniform(0.0, std::f64::consts::TAU)
    }
}
