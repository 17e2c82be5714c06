//! Seeded Gaussian blob generator.
//!
//! Each blob draws from its own ChaCha8 stream (same seed, stream = blob
//! index), so appending a center never changes the points of earlier blobs.
//! Normal deviates come from the Box–Muller transform.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::datamodel::DataMatrix;
use crate::error::{arg_err, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct BlobSpec {
    pub centers: Vec<Vec<f64>>,
    pub points_per_center: usize,
    pub sigma: f64,
    pub seed: u64,
}

impl BlobSpec {
    pub fn validate(&self) -> Result<()> {
        let Some(first) = self.centers.first() else {
            return arg_err("at least one center is required");
        };
        if first.is_empty() {
            return arg_err("centers must have at least one dimension");
        }
        if self.centers.iter().any(|c| c.len() != first.len()) {
            return arg_err("all centers must have the same dimension");
        }
        if self.centers.iter().flatten().any(|v| !v.is_finite()) {
            return arg_err("centers must be finite");
        }
        if self.points_per_center == 0 {
            return arg_err("points_per_center must be at least 1");
        }
        if !(self.sigma >= 0.0 && self.sigma.is_finite()) {
            return arg_err("sigma must be finite and non-negative");
        }
        Ok(())
    }
}

struct Gaussian {
    rng: ChaCha8Rng,
    spare: Option<f64>,
}

impl Gaussian {
    fn next(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        // u1 in (0, 1] keeps the logarithm finite
        let u1 = 1.0 - self.rng.random::<f64>();
        let u2 = self.rng.random::<f64>();
        let r = (-2.0 * u1.ln()).sqrt();
        let theta = std::f64::consts::TAU * u2;
        self.spare = Some(r * theta.sin());
        r * theta.cos()
    }
}

/// Generates the blobs in center order. Returns the matrix (rows `g<i>`) and
/// the ground-truth blob index of every row.
pub fn generate_blobs(spec: &BlobSpec) -> Result<(DataMatrix, Vec<usize>)> {
    spec.validate()?;
    let d = spec.centers[0].len();
    let n = spec.centers.len() * spec.points_per_center;
    let mut values = Vec::with_capacity(n * d);
    let mut labels = Vec::with_capacity(n);
    for (b, center) in spec.centers.iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        rng.set_stream(b as u64);
        let mut gauss = Gaussian { rng, spare: None };
        for _ in 0..spec.points_per_center {
            values.extend(center.iter().map(|c| c + spec.sigma * gauss.next()));
            labels.push(b);
        }
    }
    let data = DataMatrix::new(
        values,
        n,
        d,
        (0..n).map(|i| format!("g{i}")).collect(),
        (0..d).map(|j| format!("c{j}")).collect(),
    )?;
    Ok((data, labels))
}
