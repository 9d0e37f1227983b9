//! Elite index sets and benchmark target slacks.
//!
//! An elite set collects the training points that are influential for at
//! least one benchmark model (its support vectors). Each elite point carries
//! a target slack aggregated from the benchmark slacks at that point.

use serde::{Deserialize, Serialize};

use crate::baselines::{extract_slacks, support_indices};
use crate::error::EdsvmError;
use crate::model::{ModelVariant, TrainedModel};

/// Elite indices (in original dataset order) with their target slacks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EliteGuide {
    /// Sorted, unique indices into the training set.
    pub elite: Vec<usize>,
    /// Target slack per elite index, same order as `elite`.
    pub targets: Vec<f64>,
    /// Which benchmark models contributed, for provenance.
    pub source: Vec<String>,
}

impl EliteGuide {
    pub fn new(elite: Vec<usize>, targets: Vec<f64>, source: Vec<String>) -> Result<Self, EdsvmError> {
        if elite.len() != targets.len() {
            return Err(EdsvmError::Shape(format!(
                "{} elite indices vs {} targets",
                elite.len(),
                targets.len()
            )));
        }
        for w in elite.windows(2) {
            if w[1] <= w[0] {
                return Err(EdsvmError::InvalidData(
                    "elite indices must be strictly increasing".into(),
                ));
            }
        }
        for &t in &targets {
            if !t.is_finite() || t < 0.0 {
                return Err(EdsvmError::InvalidData(format!(
                    "target slack {t} must be finite and nonnegative"
                )));
            }
        }
        Ok(EliteGuide { elite, targets, source })
    }

    /// An empty guide: the fit degenerates to the plain estimator at cost
    /// scaled by omega.
    pub fn empty() -> Self {
        EliteGuide { elite: Vec::new(), targets: Vec::new(), source: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.elite.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elite.is_empty()
    }

    /// Checks all indices address a training set of size `n`.
    pub fn validate_for(&self, n: usize) -> Result<(), EdsvmError> {
        if let Some(&last) = self.elite.last() {
            if last >= n {
                return Err(EdsvmError::InvalidData(format!(
                    "elite index {last} out of range for n = {n}"
                )));
            }
        }
        Ok(())
    }
}

/// How per-model benchmark slacks combine into one target per elite point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum AggregationRule {
    /// Pointwise minimum over all supplied models.
    Min,
    /// Pointwise arithmetic mean over all supplied models.
    Mean,
    /// Pointwise maximum over all supplied models.
    Max,
    /// Slacks of one named model, unchanged.
    Single(ModelVariant),
    /// Mean over the named subset of models.
    MeanOf(Vec<ModelVariant>),
}

fn same_training_data(models: &[&TrainedModel]) -> bool {
    models
        .windows(2)
        .all(|w| std::sync::Arc::ptr_eq(&w[0].train, &w[1].train) || w[0].train == w[1].train)
}

/// Union of the support vectors of the given benchmark models, sorted
/// ascending in original dataset order.
pub fn build_elite_set(models: &[&TrainedModel], eps: f64) -> Result<Vec<usize>, EdsvmError> {
    if models.is_empty() {
        return Ok(Vec::new());
    }
    if !same_training_data(models) {
        return Err(EdsvmError::ModelState(
            "benchmark models were fitted on different datasets".into(),
        ));
    }
    let mut member = vec![false; models[0].train.len()];
    for m in models {
        for i in support_indices(m, eps)? {
            member[i] = true;
        }
    }
    Ok(member
        .iter()
        .enumerate()
        .filter_map(|(i, &is_in)| is_in.then_some(i))
        .collect())
}

/// Target slack per elite index, aggregated across benchmark models.
pub fn aggregate_targets(
    models: &[&TrainedModel],
    elite: &[usize],
    rule: &AggregationRule,
) -> Result<Vec<f64>, EdsvmError> {
    if models.is_empty() {
        return Err(EdsvmError::ModelState("no benchmark models supplied".into()));
    }
    if !same_training_data(models) {
        return Err(EdsvmError::ModelState(
            "benchmark models were fitted on different datasets".into(),
        ));
    }
    let slacks: Vec<Vec<f64>> = models
        .iter()
        .map(|m| extract_slacks(m))
        .collect::<Result<_, _>>()?;

    let pick = |variant: ModelVariant| -> Result<usize, EdsvmError> {
        models
            .iter()
            .position(|m| m.variant == variant)
            .ok_or_else(|| {
                EdsvmError::ModelState(format!("no fitted {} among benchmarks", variant.as_str()))
            })
    };

    let mut out = Vec::with_capacity(elite.len());
    for &i in elite {
        let vals: Vec<f64> = slacks.iter().map(|s| s[i]).collect();
        let t = match rule {
            AggregationRule::Min => vals.iter().cloned().fold(f64::INFINITY, f64::min),
            AggregationRule::Max => vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
            AggregationRule::Mean => vals.iter().sum::<f64>() / vals.len() as f64,
            AggregationRule::Single(v) => vals[pick(*v)?],
            AggregationRule::MeanOf(list) => {
                let mut acc = 0.0;
                for v in list {
                    acc += vals[pick(*v)?];
                }
                acc / list.len() as f64
            }
        };
        out.push(t);
    }
    Ok(out)
}

/// Convenience wrapper: elite set plus aggregated targets.
pub fn build_guide(
    models: &[&TrainedModel],
    rule: &AggregationRule,
    eps: f64,
) -> Result<EliteGuide, EdsvmError> {
    let elite = build_elite_set(models, eps)?;
    let targets = aggregate_targets(models, &elite, rule)?;
    let source = models.iter().map(|m| m.variant.as_str().to_string()).collect();
    EliteGuide::new(elite, targets, source)
}
