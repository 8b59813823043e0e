//! Deterministic low-discrepancy sampling of four-dimensional chart
//! domains.
//!
//! Points come from the Halton sequence in bases 2, 3, 5, 7 with a
//! seeded Cranley-Patterson rotation: each dimension is shifted by a
//! uniform offset drawn from a counter-based generator keyed on the
//! seed, then wrapped modulo one. The rotation preserves the
//! low-discrepancy property, decorrelates runs with different seeds,
//! and keeps every run bit-reproducible for a fixed (domain, count,
//! seed).

use crate::error::{Error, Result};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Axis-aligned box of chart coordinates.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DomainBox {
    pub min: [f64; 4],
    pub max: [f64; 4],
}

impl DomainBox {
    pub fn new(min: [f64; 4], max: [f64; 4]) -> Result<Self> {
        for k in 0..4 {
            if !(min[k].is_finite() && max[k].is_finite() && min[k] < max[k]) {
                return Err(Error::InvalidParams {
                    message: format!(
                        "domain axis {k} needs finite min < max, got [{}, {}]",
                        min[k], max[k]
                    ),
                });
            }
        }
        Ok(DomainBox { min, max })
    }

    pub fn from_intervals(iv: [(f64, f64); 4]) -> Result<Self> {
        Self::new(std::array::from_fn(|k| iv[k].0), std::array::from_fn(|k| iv[k].1))
    }

    pub fn intervals(&self) -> [(f64, f64); 4] {
        std::array::from_fn(|k| (self.min[k], self.max[k]))
    }

    /// Map a unit-cube point into the box.
    pub fn lerp(&self, u: [f64; 4]) -> [f64; 4] {
        std::array::from_fn(|k| self.min[k] + (self.max[k] - self.min[k]) * u[k])
    }

    pub fn contains(&self, p: [f64; 4]) -> bool {
        (0..4).all(|k| self.min[k] <= p[k] && p[k] <= self.max[k])
    }
}

const BASES: [u64; 4] = [2, 3, 5, 7];

/// Radical-inverse (van der Corput) value of `index` in `base`.
fn radical_inverse(mut index: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut value = 0.0;
    while index > 0 {
        value += (index % base) as f64 * f;
        index /= base;
        f *= inv;
    }
    value
}

/// `count` rotated Halton points inside `domain`.
pub fn sample_points(domain: &DomainBox, count: usize, seed: u64) -> Vec<[f64; 4]> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shift: [f64; 4] = std::array::from_fn(|_| rng.gen_range(0.0..1.0));
    (0..count)
        .map(|i| {
            let u: [f64; 4] = std::array::from_fn(|k| {
                let v = radical_inverse(i as u64 + 1, BASES[k]) + shift[k];
                v - v.floor()
            });
            domain.lerp(u)
        })
        .collect()
}

/// Plain pseudo-random points, for probe sets where stratification is
/// irrelevant but a second independent stream is wanted.
pub fn random_points(domain: &DomainBox, count: usize, seed: u64) -> Vec<[f64; 4]> {
    let mut rng = StdRng::seed_from_u64(seed);
    (0..count)
        .map(|_| std::array::from_fn(|k| rng.gen_range(domain.min[k]..domain.max[k])))
        .collect()
}
