//! Balanced two-dimensional Gaussian-mixture generator with a numerically
//! evaluated Bayes rule.
//!
//! Each class is a mixture of ten Gaussian clusters. Class +1 centers are
//! drawn from N((1,0), I), class -1 centers from N((0,1), I); observations
//! then come from N(center, I/5). With equal priors the Bayes score reduces
//! to a log-ratio of within-class mixture densities.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use edsvm_core::kernel::Dataset;
use edsvm_core::matrix::{sq_dist, Matrix};
use edsvm_core::EdsvmError;

pub const CENTERS_PER_CLASS: usize = 10;

/// A fixed mixture realization: cluster centers per class plus the sampling
/// parameters.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MixtureSpec {
    pub centers_pos: Vec<[f64; 2]>,
    pub centers_neg: Vec<[f64; 2]>,
    pub per_center: usize,
    pub cluster_cov_scale: f64,
    pub seed: u64,
}

impl MixtureSpec {
    pub fn validate(&self) -> Result<(), EdsvmError> {
        if self.centers_pos.is_empty() || self.centers_neg.is_empty() {
            return Err(EdsvmError::InvalidData("need at least one center per class".into()));
        }
        if self.cluster_cov_scale.is_nan() || self.cluster_cov_scale <= 0.0 {
            return Err(EdsvmError::InvalidData("cluster covariance scale must be positive".into()));
        }
        Ok(())
    }
}

fn standard_normal_pair(rng: &mut ChaCha8Rng) -> [f64; 2] {
    [StandardNormal.sample(rng), StandardNormal.sample(rng)]
}

/// Draws ten centers per class from the stated Gaussians; the draw is fixed
/// thereafter by storing it in the spec.
pub fn draw_centers(seed: u64) -> MixtureSpec {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let centers_pos = (0..CENTERS_PER_CLASS)
        .map(|_| {
            let z = standard_normal_pair(&mut rng);
            [1.0 + z[0], z[1]]
        })
        .collect();
    let centers_neg = (0..CENTERS_PER_CLASS)
        .map(|_| {
            let z = standard_normal_pair(&mut rng);
            [z[0], 1.0 + z[1]]
        })
        .collect();
    MixtureSpec {
        centers_pos,
        centers_neg,
        per_center: 10,
        cluster_cov_scale: 0.2,
        seed,
    }
}

/// Balanced sample: `per_center` observations around each center of each
/// class, labels +1/-1, deterministic under `(spec, seed)`.
pub fn sample_dataset(spec: &MixtureSpec, seed: u64) -> Result<Dataset, EdsvmError> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sd = spec.cluster_cov_scale.sqrt();
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for (centers, label) in [(&spec.centers_pos, 1.0), (&spec.centers_neg, -1.0)] {
        for c in centers.iter() {
            for _ in 0..spec.per_center {
                let z = standard_normal_pair(&mut rng);
                rows.push(vec![c[0] + sd * z[0], c[1] + sd * z[1]]);
                labels.push(label);
            }
        }
    }
    Dataset::new(Matrix::from_rows(&rows)?, labels)
}

fn log_sum_exp(terms: impl Iterator<Item = f64>) -> f64 {
    let vals: Vec<f64> = terms.collect();
    let max = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if max.is_infinite() {
        return max;
    }
    max + vals.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}

/// Log-ratio of class-conditional mixture densities at `z`; its sign is the
/// Bayes class under equal priors.
pub fn bayes_score(spec: &MixtureSpec, z: &[f64; 2]) -> f64 {
    let coef = 1.0 / (2.0 * spec.cluster_cov_scale);
    let pos = log_sum_exp(
        spec.centers_pos
            .iter()
            .map(|c| -coef * sq_dist(c.as_slice(), z.as_slice())),
    );
    let neg = log_sum_exp(
        spec.centers_neg
            .iter()
            .map(|c| -coef * sq_dist(c.as_slice(), z.as_slice())),
    );
    pos - neg
}

/// Labelled draws `(point, label)` from the mixture, for Monte Carlo
/// evaluation of any classifier.
pub fn sample_mixture_points(
    spec: &MixtureSpec,
    count: usize,
    seed: u64,
) -> Result<Vec<([f64; 2], f64)>, EdsvmError> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sd = spec.cluster_cov_scale.sqrt();
    Ok((0..count)
        .map(|_| {
            let positive = rng.gen_bool(0.5);
            let centers = if positive { &spec.centers_pos } else { &spec.centers_neg };
            let c = centers[rng.gen_range(0..centers.len())];
            let zn = standard_normal_pair(&mut rng);
            (
                [c[0] + sd * zn[0], c[1] + sd * zn[1]],
                if positive { 1.0 } else { -1.0 },
            )
        })
        .collect())
}

/// Monte Carlo estimate of the Bayes classifier's accuracy under the mixture.
pub fn bayes_accuracy(spec: &MixtureSpec, mc_samples: usize, seed: u64) -> Result<f64, EdsvmError> {
    if mc_samples < 10_000 {
        return Err(EdsvmError::InvalidHyper(
            "need at least 10^4 Monte Carlo samples".into(),
        ));
    }
    let draws = sample_mixture_points(spec, mc_samples, seed)?;
    let correct = draws
        .iter()
        .filter(|(p, y)| (bayes_score(spec, p) >= 0.0) == (*y > 0.0))
        .count();
    Ok(correct as f64 / mc_samples as f64)
}

/// Evenly spaced lattice over `[x_lo, x_hi] x [y_lo, y_hi]`, row-major.
pub fn grid_lattice(bounds: [f64; 4], resolution: usize) -> Vec<[f64; 2]> {
    let [x_lo, x_hi, y_lo, y_hi] = bounds;
    let step = |lo: f64, hi: f64, i: usize| lo + (hi - lo) * i as f64 / (resolution - 1) as f64;
    let mut pts = Vec::with_capacity(resolution * resolution);
    for iy in 0..resolution {
        for ix in 0..resolution {
            pts.push([step(x_lo, x_hi, ix), step(y_lo, y_hi, iy)]);
        }
    }
    pts
}
