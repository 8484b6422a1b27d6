//! Seeded random graph generation.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::matrix::DistanceMatrix;

/// Parameters of a random directed graph with integer edge weights.
#[derive(Clone, Debug, PartialEq)]
pub struct GraphSpec {
    pub n: usize,
    pub edge_probability: f64,
    /// Inclusive `[lo, hi]` range of integer weights.
    pub weight_range: (u32, u32),
    pub seed: u64,
}

impl GraphSpec {
    pub fn new(n: usize, edge_probability: f64, weight_range: (u32, u32), seed: u64) -> Self {
        Self {
            n,
            edge_probability,
            weight_range,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let (lo, hi) = self.weight_range;
        if self.n == 0 {
            return Err(Error::InvalidGraphSpec("n must be positive".into()));
        }
        if !(0.0..=1.0).contains(&self.edge_probability) {
            return Err(Error::InvalidGraphSpec(format!(
                "edge probability {} is outside [0, 1]",
                self.edge_probability
            )));
        }
        if lo < 1 || lo > hi {
            return Err(Error::InvalidGraphSpec(format!(
                "weight range [{lo}, {hi}] must satisfy 1 <= lo <= hi"
            )));
        }
        // Weights must be exact in f32.
        if hi > 1 << 24 {
            return Err(Error::InvalidGraphSpec(format!(
                "max weight {hi} is not exactly representable"
            )));
        }
        Ok(())
    }
}

/// Draws each off-diagonal edge independently with `edge_probability`.
/// Entries are visited row-major, so a given `GraphSpec` always yields the same
/// matrix regardless of platform.
pub fn generate_graph(spec: &GraphSpec) -> Result<DistanceMatrix> {
    spec.validate()?;
    let (lo, hi) = spec.weight_range;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut d = DistanceMatrix::new(spec.n)?;
    for i in 0..spec.n {
        for j in 0..spec.n {
            if i == j {
                continue;
            }
            if rng.gen::<f64>() < spec.edge_probability {
                let w = rng.gen_range(lo..=hi);
                d.set(i, j, w as f32);
            }
        }
    }
    Ok(d)
}
