//! Column z-score standardization with training-fold statistics.

use edsvm_core::Matrix;

/// Per-column mean/scale fitted on training data and applied elsewhere.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct Standardizer {
    mean: Vec<f64>,
    scale: Vec<f64>,
}

impl Standardizer {
    pub fn fit(features: &Matrix) -> Standardizer {
        let n = features.rows() as f64;
        let p = features.cols();
        let mut mean = vec![0.0; p];
        for i in 0..features.rows() {
            for (m, &v) in mean.iter_mut().zip(features.row(i)) {
                *m += v;
            }
        }
        for m in &mut mean {
            *m /= n;
        }
        let mut var = vec![0.0; p];
        for i in 0..features.rows() {
            for j in 0..p {
                let d = features.get(i, j) - mean[j];
                var[j] += d * d;
            }
        }
        let scale = var
            .iter()
            .map(|v| {
                let s = (v / n).sqrt();
                if s > 0.0 {
                    s
                } else {
                    1.0 // constant column: leave it centered, unscaled
                }
            })
            .collect();
        Standardizer { mean, scale }
    }

    pub fn transform(&self, features: &Matrix) -> Matrix {
        let mut out = features.clone();
        for i in 0..out.rows() {
            let row = out.row_mut(i);
            for ((v, &m), &s) in row.iter_mut().zip(&self.mean).zip(&self.scale) {
                *v = (*v - m) / s;
            }
        }
        out
    }
}
