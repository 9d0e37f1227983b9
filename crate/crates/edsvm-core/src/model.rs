//! Fitted models and kernel-expansion decision functions.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::elite::EliteGuide;
use crate::error::EdsvmError;
use crate::kernel::{Dataset, KernelSpec};
use crate::matrix::Matrix;

/// Which estimator produced a model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ModelVariant {
    Csvm,
    Lssvm,
    LinexSvm,
    Cedsvm,
    Lsedsvm,
}

impl ModelVariant {
    pub fn as_str(&self) -> &'static str {
        match self {
            ModelVariant::Csvm => "c-svm",
            ModelVariant::Lssvm => "ls-svm",
            ModelVariant::LinexSvm => "linex-svm",
            ModelVariant::Cedsvm => "c-edsvm",
            ModelVariant::Lsedsvm => "ls-edsvm",
        }
    }
}

/// A fitted classifier: dual (or representer) coefficients over the stored
/// training points plus an intercept.
///
/// For dual-fitted variants `alpha` holds the dual multipliers, so the
/// decision function is `f(x) = beta0 + sum_j alpha_j y_j K(x_j, x)`. The
/// primal-fitted LINEX model stores `alpha_j = y_j c_j` for its representer
/// coefficients `c`, which makes the same expansion valid for every variant.
#[derive(Debug, Clone)]
pub struct TrainedModel {
    pub variant: ModelVariant,
    pub kernel: KernelSpec,
    pub alpha: Vec<f64>,
    pub beta0: f64,
    pub train: Arc<Dataset>,
    pub hyper: BTreeMap<String, f64>,
    pub elite: Option<EliteGuide>,
}

impl TrainedModel {
    /// `f(x) = beta0 + sum_j alpha_j y_j K(x_j, x)` for each row of `x`.
    pub fn decision_values(&self, x: &Matrix) -> Result<Vec<f64>, EdsvmError> {
        if x.cols() != self.train.dim() {
            return Err(EdsvmError::Shape(format!(
                "query has {} columns, model was trained on {}",
                x.cols(),
                self.train.dim()
            )));
        }
        if self.alpha.len() != self.train.len() {
            return Err(EdsvmError::ModelState(
                "coefficient length does not match stored training set".into(),
            ));
        }
        let labels = self.train.labels();
        let feats = self.train.features();
        let mut out = Vec::with_capacity(x.rows());
        for q in 0..x.rows() {
            let point = x.row(q);
            let mut f = self.beta0;
            for (j, (&aj, &yj)) in self.alpha.iter().zip(labels).enumerate() {
                if aj != 0.0 {
                    f += aj * yj * self.kernel.eval(feats.row(j), point);
                }
            }
            out.push(f);
        }
        Ok(out)
    }

    /// Class labels `sign(f(x))`, with `sign(0)` mapped to +1.
    pub fn predict(&self, x: &Matrix) -> Result<Vec<f64>, EdsvmError> {
        Ok(self
            .decision_values(x)?
            .into_iter()
            .map(|f| if f >= 0.0 { 1.0 } else { -1.0 })
            .collect())
    }

    /// Decision values on the model's own training set.
    pub fn train_decision_values(&self) -> Result<Vec<f64>, EdsvmError> {
        self.decision_values(self.train.features())
    }

    /// Signed margin deviations `delta_i = 1 - y_i f(x_i)` on the training set.
    pub fn margin_deviations(&self) -> Result<Vec<f64>, EdsvmError> {
        let f = self.train_decision_values()?;
        Ok(self
            .train
            .labels()
            .iter()
            .zip(&f)
            .map(|(&y, &fi)| 1.0 - y * fi)
            .collect())
    }
}

/// Serialization form of a fitted model: only points with nonzero
/// coefficients are kept, which leaves every decision value unchanged.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelFile {
    pub variant: ModelVariant,
    pub kernel: KernelSpec,
    pub beta0: f64,
    pub hyper: BTreeMap<String, f64>,
    pub sv_coeff: Vec<f64>,
    pub sv_labels: Vec<f64>,
    pub sv_rows: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub elite: Option<EliteGuide>,
}

impl ModelFile {
    pub fn from_model(model: &TrainedModel) -> ModelFile {
        let mut sv_coeff = Vec::new();
        let mut sv_labels = Vec::new();
        let mut sv_rows = Vec::new();
        for j in 0..model.train.len() {
            if model.alpha[j] != 0.0 {
                sv_coeff.push(model.alpha[j]);
                sv_labels.push(model.train.labels()[j]);
                sv_rows.push(model.train.features().row(j).to_vec());
            }
        }
        ModelFile {
            variant: model.variant,
            kernel: model.kernel,
            beta0: model.beta0,
            hyper: model.hyper.clone(),
            sv_coeff,
            sv_labels,
            sv_rows,
            elite: model.elite.clone(),
        }
    }

    pub fn into_model(self) -> Result<TrainedModel, EdsvmError> {
        let features = Matrix::from_rows(&self.sv_rows)?;
        if self.sv_coeff.len() != self.sv_labels.len() || self.sv_coeff.len() != features.rows() {
            return Err(EdsvmError::Shape("inconsistent model file".into()));
        }
        // A model file may legally hold a single class or a single point;
        // bypass the training-time dataset checks.
        let train = Dataset::new_unchecked(features, self.sv_labels);
        Ok(TrainedModel {
            variant: self.variant,
            kernel: self.kernel,
            alpha: self.sv_coeff,
            beta0: self.beta0,
            train: Arc::new(train),
            hyper: self.hyper,
            elite: self.elite,
        })
    }
}
