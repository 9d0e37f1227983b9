//! Datasets, kernel specifications, and Gram matrix computation.

use serde::{Deserialize, Serialize};

use crate::error::EdsvmError;
use crate::matrix::{dot, sq_dist, Matrix};

/// Binary classification sample: an `n x p` feature matrix with labels in {-1, +1}.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    features: Matrix,
    labels: Vec<f64>,
}

impl Dataset {
    /// Validates labels, finiteness, and class presence. Training calls
    /// additionally require `n >= 2` with both classes present, which is
    /// checked here as well since every dataset in this crate feeds a fit.
    pub fn new(features: Matrix, labels: Vec<f64>) -> Result<Self, EdsvmError> {
        if features.rows() != labels.len() {
            return Err(EdsvmError::Shape(format!(
                "{} feature rows vs {} labels",
                features.rows(),
                labels.len()
            )));
        }
        if !features.is_finite() {
            return Err(EdsvmError::InvalidData("non-finite feature entry".into()));
        }
        for &y in &labels {
            if y != 1.0 && y != -1.0 {
                return Err(EdsvmError::InvalidData(format!(
                    "label {y} is not -1 or +1"
                )));
            }
        }
        if labels.len() < 2 {
            return Err(EdsvmError::InvalidData("need at least 2 samples".into()));
        }
        let pos = labels.iter().filter(|&&y| y > 0.0).count();
        if pos == 0 || pos == labels.len() {
            return Err(EdsvmError::InvalidData(
                "both classes must be present".into(),
            ));
        }
        Ok(Dataset { features, labels })
    }

    /// Skips the training-time checks (class presence, minimum size). Used
    /// when reconstructing the support-vector expansion from a model file,
    /// which can legitimately hold a single class.
    pub fn new_unchecked(features: Matrix, labels: Vec<f64>) -> Self {
        Dataset { features, labels }
    }

    pub fn features(&self) -> &Matrix {
        &self.features
    }

    pub fn labels(&self) -> &[f64] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.features.cols()
    }

    /// Subset by row indices (used by cross-validation folds).
    pub fn subset(&self, idx: &[usize]) -> Result<Dataset, EdsvmError> {
        let features = self.features.select_rows(idx);
        let labels = idx.iter().map(|&i| self.labels[i]).collect();
        Dataset::new(features, labels)
    }
}

/// Kernel function choice.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum KernelSpec {
    Linear,
    Polynomial { degree: u32, coef0: f64 },
    Rbf { gamma: f64 },
}

impl KernelSpec {
    pub fn validate(&self) -> Result<(), EdsvmError> {
        match *self {
            KernelSpec::Linear => Ok(()),
            KernelSpec::Polynomial { degree, coef0 } => {
                if degree < 1 {
                    Err(EdsvmError::InvalidHyper("polynomial degree must be >= 1".into()))
                } else if !coef0.is_finite() {
                    Err(EdsvmError::InvalidHyper("polynomial coef0 must be finite".into()))
                } else {
                    Ok(())
                }
            }
            KernelSpec::Rbf { gamma } => {
                if gamma > 0.0 && gamma.is_finite() {
                    Ok(())
                } else {
                    Err(EdsvmError::InvalidHyper(format!(
                        "RBF gamma must be positive and finite, got {gamma}"
                    )))
                }
            }
        }
    }

    /// K(a, b) for a single pair of points.
    pub fn eval(&self, a: &[f64], b: &[f64]) -> f64 {
        match *self {
            KernelSpec::Linear => dot(a, b),
            KernelSpec::Polynomial { degree, coef0 } => (dot(a, b) + coef0).powi(degree as i32),
            KernelSpec::Rbf { gamma } => (-gamma * sq_dist(a, b)).exp(),
        }
    }
}

/// Symmetric `n x n` kernel matrix over one set of points.
#[derive(Debug, Clone)]
pub struct GramMatrix {
    values: Matrix,
}

impl GramMatrix {
    /// Symmetrizes the computed matrix to kill round-off asymmetry from
    /// floating-point evaluation order.
    pub fn compute(kernel: &KernelSpec, points: &Matrix) -> Result<Self, EdsvmError> {
        kernel.validate()?;
        if !points.is_finite() {
            return Err(EdsvmError::InvalidData("non-finite input point".into()));
        }
        let n = points.rows();
        let mut values = Matrix::zeros(n, n);
        for i in 0..n {
            for j in 0..=i {
                let v = kernel.eval(points.row(i), points.row(j));
                values.set(i, j, v);
                values.set(j, i, v);
            }
        }
        Ok(GramMatrix { values })
    }

    pub fn values(&self) -> &Matrix {
        &self.values
    }

    pub fn n(&self) -> usize {
        self.values.rows()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values.get(i, j)
    }

    pub fn row(&self, i: usize) -> &[f64] {
        self.values.row(i)
    }
}

/// Kernel matrix between two point sets: entry (i, j) = K(a_i, b_j).
pub fn compute_gram(
    kernel: &KernelSpec,
    a: &Matrix,
    b: &Matrix,
) -> Result<Matrix, EdsvmError> {
    kernel.validate()?;
    if a.cols() != b.cols() {
        return Err(EdsvmError::Shape(format!(
            "column mismatch: {} vs {}",
            a.cols(),
            b.cols()
        )));
    }
    if !a.is_finite() || !b.is_finite() {
        return Err(EdsvmError::InvalidData("non-finite input point".into()));
    }
    let mut out = Matrix::zeros(a.rows(), b.rows());
    for i in 0..a.rows() {
        let ai = a.row(i);
        let row = out.row_mut(i);
        for (j, rj) in row.iter_mut().enumerate() {
            *rj = kernel.eval(ai, b.row(j));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mat(rows: usize, cols: usize, v: &[f64]) -> Matrix {
        Matrix::from_vec(rows, cols, v.to_vec()).unwrap()
    }

    #[test]
    fn linear_kernel_is_dot_product() {
        let a = mat(1, 2, &[1.0, 0.0]);
        let b = mat(1, 2, &[-1.0, 0.0]);
        let g = compute_gram(&KernelSpec::Linear, &a, &b).unwrap();
        assert_eq!(g.get(0, 0), -1.0);
    }

    #[test]
    fn rbf_at_zero_distance_is_one() {
        let a = mat(1, 3, &[0.3, -1.2, 4.0]);
        let g = compute_gram(&KernelSpec::Rbf { gamma: 1.0 }, &a, &a).unwrap();
        assert_eq!(g.get(0, 0), 1.0);
    }

    #[test]
    fn rbf_matches_direct_scalar_evaluation() {
        // gamma=0.5, ||a-b||^2 = 4 => exp(-2) = 0.1353352832366127
        let a = mat(1, 2, &[0.0, 0.0]);
        let b = mat(1, 2, &[2.0, 0.0]);
        let g = compute_gram(&KernelSpec::Rbf { gamma: 0.5 }, &a, &b).unwrap();
        assert!((g.get(0, 0) - 0.135_335_283_236_612_7).abs() < 1e-15);
    }

    #[test]
    fn polynomial_kernel_expands() {
        let a = mat(1, 2, &[1.0, 2.0]);
        let b = mat(1, 2, &[3.0, 1.0]);
        // (1*3 + 2*1 + 1)^2 = 36
        let k = KernelSpec::Polynomial { degree: 2, coef0: 1.0 };
        let g = compute_gram(&k, &a, &b).unwrap();
        assert_eq!(g.get(0, 0), 36.0);
    }

    #[test]
    fn gram_rejects_dimension_mismatch() {
        let a = mat(1, 2, &[1.0, 0.0]);
        let b = mat(1, 3, &[1.0, 0.0, 0.0]);
        assert!(compute_gram(&KernelSpec::Linear, &a, &b).is_err());
    }

    #[test]
    fn gram_rejects_non_finite() {
        let a = mat(1, 1, &[f64::NAN]);
        assert!(compute_gram(&KernelSpec::Linear, &a, &a).is_err());
    }

    #[test]
    fn dataset_rejects_bad_labels() {
        let x = mat(2, 1, &[0.0, 1.0]);
        assert!(Dataset::new(x.clone(), vec![1.0, 0.5]).is_err());
        assert!(Dataset::new(x.clone(), vec![1.0, 1.0]).is_err());
        assert!(Dataset::new(x, vec![1.0, -1.0]).is_ok());
    }

    #[test]
    fn invalid_kernel_params_rejected() {
        assert!(KernelSpec::Rbf { gamma: 0.0 }.validate().is_err());
        assert!(KernelSpec::Rbf { gamma: -1.0 }.validate().is_err());
        assert!(KernelSpec::Polynomial { degree: 0, coef0: 0.0 }.validate().is_err());
    }

    /// Cholesky of K + jitter*I succeeds iff the smallest eigenvalue of K
    /// is at least -jitter.
    fn is_psd_up_to(k: &GramMatrix, jitter: f64) -> bool {
        let n = k.n();
        let mut a = k.values().clone();
        for i in 0..n {
            a.set(i, i, a.get(i, i) + jitter);
        }
        let mut l = Matrix::zeros(n, n);
        for i in 0..n {
            for j in 0..=i {
                let mut sum = a.get(i, j);
                for t in 0..j {
                    sum -= l.get(i, t) * l.get(j, t);
                }
                if i == j {
                    if sum <= 0.0 {
                        return false;
                    }
                    l.set(i, j, sum.sqrt());
                } else {
                    l.set(i, j, sum / l.get(j, j));
                }
            }
        }
        true
    }

    #[test]
    fn gram_is_symmetric_and_psd_for_all_kernels() {
        use rand::prelude::*;
        use rand_chacha::ChaCha8Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for kernel in [
            KernelSpec::Linear,
            KernelSpec::Polynomial { degree: 3, coef0: 1.0 },
            KernelSpec::Rbf { gamma: 0.8 },
        ] {
            for _ in 0..5 {
                let n = rng.gen_range(3..25);
                let p = rng.gen_range(1..6);
                let data: Vec<f64> = (0..n * p).map(|_| rng.gen_range(-2.0..2.0)).collect();
                let x = Matrix::from_vec(n, p, data).unwrap();
                let g = GramMatrix::compute(&kernel, &x).unwrap();
                for i in 0..n {
                    for j in 0..n {
                        assert!((g.get(i, j) - g.get(j, i)).abs() <= 1e-12);
                    }
                }
                assert!(is_psd_up_to(&g, 1e-8), "{kernel:?} Gram not PSD up to jitter");
            }
        }
    }

    #[test]
    fn rbf_entries_lie_in_unit_interval() {
        use rand::prelude::*;
        use rand_chacha::ChaCha8Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        // Ranges kept small enough that exp(-gamma d^2) cannot underflow.
        let data: Vec<f64> = (0..40).map(|_| rng.gen_range(-3.0..3.0)).collect();
        let x = Matrix::from_vec(20, 2, data).unwrap();
        let g = GramMatrix::compute(&KernelSpec::Rbf { gamma: 2.0 }, &x).unwrap();
        for i in 0..20 {
            for j in 0..20 {
                let v = g.get(i, j);
                assert!(v > 0.0 && v <= 1.0, "RBF entry {v} outside (0, 1]");
            }
        }
    }
}
