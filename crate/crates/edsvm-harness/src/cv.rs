//! Stratified k-fold assignment and hyperparameter grid search.

use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use edsvm_core::baselines::{fit_csvm_with, fit_linexsvm_with, fit_lssvm_with};
use edsvm_core::edsvm::{fit_edsvm_with, EdsvmConfig, EdsvmVariant, FitOptions};
use edsvm_core::elite::EliteGuide;
use edsvm_core::kernel::{Dataset, GramMatrix, KernelSpec};
use edsvm_core::model::TrainedModel;
use edsvm_core::EdsvmError;

use crate::standardize::Standardizer;

#[derive(Debug, Error)]
pub enum CvError {
    #[error("class with {0} members cannot fill {1} folds")]
    ClassTooSmall(usize, usize),
    #[error("grid is empty or invalid: {0}")]
    BadGrid(String),
    #[error("every grid point failed; last error: {0}")]
    AllPointsFailed(String),
    #[error(transparent)]
    Fit(#[from] EdsvmError),
}

/// Hyperparameter grids following the tuning protocol: costs over powers of
/// two, guidance weights over a decimal grid, LINEX asymmetry over negative
/// integers, and RBF bandwidths over a log-spaced grid.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GridSpec {
    pub c_values: Vec<f64>,
    pub omega_values: Vec<f64>,
    pub a_values: Vec<f64>,
    pub gamma_values: Vec<f64>,
    pub folds: usize,
    pub seed: u64,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            c_values: (-3..=5).map(|e| 2f64.powi(e)).collect(),
            omega_values: (1..=9).map(|k| k as f64 / 10.0).collect(),
            a_values: (1..=8).map(|k| -(k as f64)).collect(),
            gamma_values: (-7..=3).map(|e| 2f64.powi(e)).collect(),
            folds: 5,
            seed: 0,
        }
    }
}

impl GridSpec {
    pub fn validate(&self) -> Result<(), CvError> {
        if self.c_values.is_empty()
            || self.omega_values.is_empty()
            || self.a_values.is_empty()
            || self.gamma_values.is_empty()
        {
            return Err(CvError::BadGrid("empty grid axis".into()));
        }
        if self.folds < 2 {
            return Err(CvError::BadGrid("need at least 2 folds".into()));
        }
        Ok(())
    }
}

/// Per-class round-robin fold assignment after a seeded shuffle. Fold sizes
/// differ by at most one within each class.
pub fn stratified_kfold(labels: &[f64], k: usize, seed: u64) -> Result<Vec<usize>, CvError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut assignment = vec![0usize; labels.len()];
    for class in [1.0, -1.0] {
        let mut idx: Vec<usize> = labels
            .iter()
            .enumerate()
            .filter_map(|(i, &y)| (y == class).then_some(i))
            .collect();
        if idx.len() < k {
            return Err(CvError::ClassTooSmall(idx.len(), k));
        }
        idx.shuffle(&mut rng);
        for (pos, &i) in idx.iter().enumerate() {
            assignment[i] = pos % k;
        }
    }
    Ok(assignment)
}

/// Train/test index pairs implied by a fold assignment.
pub fn fold_splits(assignment: &[usize], k: usize) -> Vec<(Vec<usize>, Vec<usize>)> {
    (0..k)
        .map(|fold| {
            let mut train = Vec::new();
            let mut test = Vec::new();
            for (i, &f) in assignment.iter().enumerate() {
                if f == fold {
                    test.push(i);
                } else {
                    train.push(i);
                }
            }
            (train, test)
        })
        .collect()
}

/// Model family being tuned.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Family {
    Csvm,
    Lssvm,
    LinexSvm,
    Cedsvm,
    Lsedsvm,
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::Csvm => "c-svm",
            Family::Lssvm => "ls-svm",
            Family::LinexSvm => "linex-svm",
            Family::Cedsvm => "c-edsvm",
            Family::Lsedsvm => "ls-edsvm",
        }
    }
}

/// Kernel treatment during the search: fixed, or RBF with gamma on the grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum KernelChoice {
    Fixed(KernelSpec),
    RbfTuned,
}

/// One point of the hyperparameter grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HyperPoint {
    pub c: f64,
    pub omega: Option<f64>,
    pub a: Option<f64>,
    pub gamma: Option<f64>,
}

impl HyperPoint {
    pub fn kernel(&self, choice: KernelChoice) -> KernelSpec {
        match choice {
            KernelChoice::Fixed(k) => k,
            KernelChoice::RbfTuned => KernelSpec::Rbf { gamma: self.gamma.unwrap() },
        }
    }
}

/// One evaluated grid point.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GridRow {
    pub point: HyperPoint,
    /// Mean cross-validated misclassification error; `None` when the fit
    /// failed on some fold (the point is skipped and flagged).
    pub cv_error: Option<f64>,
    pub failure: Option<String>,
}

/// Grid-search outcome: the selected point plus the full table.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GridSearchResult {
    pub family: Family,
    pub best: HyperPoint,
    pub best_cv_error: f64,
    pub table: Vec<GridRow>,
}

/// Per-fold data prepared once and reused across every grid point: subsets,
/// optional standardization, and a Gram matrix per kernel.
pub struct FoldContext {
    pub train: Arc<Dataset>,
    pub test_features: edsvm_core::Matrix,
    pub test_labels: Vec<f64>,
    /// The guide for elite-driven fits on this fold (indices into `train`).
    pub guide: EliteGuide,
}

impl FoldContext {
    pub fn build(
        data: &Dataset,
        train_idx: &[usize],
        test_idx: &[usize],
        standardize: bool,
    ) -> Result<FoldContext, EdsvmError> {
        let train_raw = data.subset(train_idx)?;
        let test_features_raw = data.features().select_rows(test_idx);
        let test_labels: Vec<f64> = test_idx.iter().map(|&i| data.labels()[i]).collect();
        let (train, test_features) = if standardize {
            let scaler = Standardizer::fit(train_raw.features());
            let tf = scaler.transform(train_raw.features());
            let qf = scaler.transform(&test_features_raw);
            (Dataset::new(tf, train_raw.labels().to_vec())?, qf)
        } else {
            (train_raw, test_features_raw)
        };
        Ok(FoldContext {
            train: Arc::new(train),
            test_features,
            test_labels,
            guide: EliteGuide::empty(),
        })
    }
}

/// Fits one family at one grid point on one fold.
pub fn fit_family(
    family: Family,
    point: &HyperPoint,
    kernel: &KernelSpec,
    fold: &FoldContext,
    gram: Option<&GramMatrix>,
    opts: FitOptions,
) -> Result<TrainedModel, EdsvmError> {
    match family {
        Family::Csvm => fit_csvm_with(&fold.train, point.c, kernel, opts, gram).map(|f| f.model),
        Family::Lssvm => fit_lssvm_with(&fold.train, point.c, kernel, opts, gram).map(|f| f.model),
        Family::LinexSvm => fit_linexsvm_with(&fold.train, point.c, point.a.unwrap(), kernel, gram),
        Family::Cedsvm | Family::Lsedsvm => {
            let cfg = EdsvmConfig {
                c: point.c,
                omega: point.omega.unwrap(),
                guide: fold.guide.clone(),
                variant: if family == Family::Cedsvm {
                    EdsvmVariant::Cedsvm
                } else {
                    EdsvmVariant::Lsedsvm
                },
                kernel: *kernel,
            };
            fit_edsvm_with(&fold.train, &cfg, opts, gram).map(|f| f.model)
        }
    }
}

fn enumerate_points(family: Family, grid: &GridSpec, choice: KernelChoice) -> Vec<HyperPoint> {
    let gammas: Vec<Option<f64>> = match choice {
        KernelChoice::Fixed(_) => vec![None],
        KernelChoice::RbfTuned => {
            let mut g = grid.gamma_values.clone();
            g.sort_by(|a, b| a.partial_cmp(b).unwrap());
            g.into_iter().map(Some).collect()
        }
    };
    let mut cs = grid.c_values.clone();
    cs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    // Tie-break order: smaller C, then larger omega, then smaller gamma.
    let mut omegas = grid.omega_values.clone();
    omegas.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let mut avals = grid.a_values.clone();
    avals.sort_by(|a, b| b.partial_cmp(a).unwrap());

    let mut points = Vec::new();
    for &c in &cs {
        match family {
            Family::Csvm | Family::Lssvm => {
                for &g in &gammas {
                    points.push(HyperPoint { c, omega: None, a: None, gamma: g });
                }
            }
            Family::LinexSvm => {
                for &a in &avals {
                    for &g in &gammas {
                        points.push(HyperPoint { c, omega: None, a: Some(a), gamma: g });
                    }
                }
            }
            Family::Cedsvm | Family::Lsedsvm => {
                for &w in &omegas {
                    for &g in &gammas {
                        points.push(HyperPoint { c, omega: Some(w), a: None, gamma: g });
                    }
                }
            }
        }
    }
    points
}

/// Exhaustive grid search minimizing mean cross-validated misclassification
/// error. Folds are prepared by the caller (so elite guides, standardization,
/// and fold assignment are shared across competing families). Ties resolve
/// to the earliest point in the deterministic enumeration order (smaller C,
/// then larger omega, then smaller gamma).
pub fn grid_search(
    family: Family,
    folds: &[FoldContext],
    grid: &GridSpec,
    choice: KernelChoice,
    opts: FitOptions,
) -> Result<GridSearchResult, CvError> {
    grid.validate()?;
    let points = enumerate_points(family, grid, choice);

    // Cache one training Gram per (fold, kernel); kernels vary only with gamma.
    let kernels: Vec<KernelSpec> = match choice {
        KernelChoice::Fixed(k) => vec![k],
        KernelChoice::RbfTuned => {
            let mut g = grid.gamma_values.clone();
            g.sort_by(|a, b| a.partial_cmp(b).unwrap());
            g.into_iter().map(|gamma| KernelSpec::Rbf { gamma }).collect()
        }
    };
    let grams: Vec<Vec<GramMatrix>> = kernels
        .par_iter()
        .map(|k| {
            folds
                .iter()
                .map(|f| GramMatrix::compute(k, f.train.features()).expect("finite training data"))
                .collect()
        })
        .collect();
    let kernel_index = |p: &HyperPoint| -> usize {
        match choice {
            KernelChoice::Fixed(_) => 0,
            KernelChoice::RbfTuned => kernels
                .iter()
                .position(|k| matches!(k, KernelSpec::Rbf { gamma } if *gamma == p.gamma.unwrap()))
                .unwrap(),
        }
    };

    let table: Vec<GridRow> = points
        .par_iter()
        .map(|point| {
            let ki = kernel_index(point);
            let kernel = kernels[ki];
            let mut errors = Vec::with_capacity(folds.len());
            for (fi, fold) in folds.iter().enumerate() {
                match fit_family(family, point, &kernel, fold, Some(&grams[ki][fi]), opts) {
                    Ok(model) => {
                        let pred = match model.predict(&fold.test_features) {
                            Ok(p) => p,
                            Err(e) => {
                                return GridRow {
                                    point: *point,
                                    cv_error: None,
                                    failure: Some(e.to_string()),
                                }
                            }
                        };
                        let wrong = pred
                            .iter()
                            .zip(&fold.test_labels)
                            .filter(|(p, y)| p != y)
                            .count();
                        errors.push(wrong as f64 / fold.test_labels.len() as f64);
                    }
                    Err(e) => {
                        return GridRow { point: *point, cv_error: None, failure: Some(e.to_string()) };
                    }
                }
            }
            let mean = errors.iter().sum::<f64>() / errors.len() as f64;
            GridRow { point: *point, cv_error: Some(mean), failure: None }
        })
        .collect();

    let mut best: Option<(usize, f64)> = None;
    for (i, row) in table.iter().enumerate() {
        if let Some(err) = row.cv_error {
            if best.is_none_or(|(_, b)| err < b) {
                best = Some((i, err));
            }
        }
    }
    let (bi, berr) = best.ok_or_else(|| {
        let last = table
            .iter()
            .rev()
            .find_map(|r| r.failure.clone())
            .unwrap_or_else(|| "empty grid".into());
        CvError::AllPointsFailed(last)
    })?;
    Ok(GridSearchResult { family, best: table[bi].point, best_cv_error: berr, table })
}

#[cfg(test)]
mod tests {
    use super::*;
    use edsvm_core::Matrix;

    #[test]
    fn balanced_divisible_folds() {
        let labels: Vec<f64> = (0..20).map(|i| if i < 10 { 1.0 } else { -1.0 }).collect();
        let assignment = stratified_kfold(&labels, 5, 3).unwrap();
        for fold in 0..5 {
            for class in [1.0, -1.0] {
                let count = labels
                    .iter()
                    .zip(&assignment)
                    .filter(|(&y, &f)| y == class && f == fold)
                    .count();
                assert_eq!(count, 2);
            }
        }
    }

    #[test]
    fn same_seed_same_assignment() {
        let labels: Vec<f64> = (0..31).map(|i| if i % 3 == 0 { 1.0 } else { -1.0 }).collect();
        let a = stratified_kfold(&labels, 4, 99).unwrap();
        let b = stratified_kfold(&labels, 4, 99).unwrap();
        assert_eq!(a, b);
        let c = stratified_kfold(&labels, 4, 100).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn imbalanced_proportions_within_one_sample() {
        // Haberman-like imbalance: 225 positive, 81 negative.
        let mut labels = vec![1.0; 225];
        labels.extend(vec![-1.0; 81]);
        let k = 5;
        let assignment = stratified_kfold(&labels, k, 7).unwrap();
        for fold in 0..k {
            let pos = labels
                .iter()
                .zip(&assignment)
                .filter(|(&y, &f)| y > 0.0 && f == fold)
                .count();
            let neg = labels
                .iter()
                .zip(&assignment)
                .filter(|(&y, &f)| y < 0.0 && f == fold)
                .count();
            assert!((pos as i64 - 45).abs() <= 1, "pos per fold {pos}");
            assert!((neg as i64 - 16).unsigned_abs() <= 1, "neg per fold {neg}");
        }
    }

    #[test]
    fn class_smaller_than_k_rejected() {
        let labels = vec![1.0, 1.0, 1.0, -1.0, -1.0];
        assert!(stratified_kfold(&labels, 3, 0).is_err());
    }

    fn separable_folds() -> Vec<FoldContext> {
        // 20 linearly separable points, 2 folds.
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for i in 0..10 {
            rows.push(vec![1.0 + 0.1 * i as f64, 0.3 * i as f64]);
            labels.push(1.0);
            rows.push(vec![-1.0 - 0.1 * i as f64, -0.3 * i as f64]);
            labels.push(-1.0);
        }
        let data = Dataset::new(Matrix::from_rows(&rows).unwrap(), labels).unwrap();
        let assignment = stratified_kfold(data.labels(), 2, 1).unwrap();
        fold_splits(&assignment, 2)
            .iter()
            .map(|(tr, te)| FoldContext::build(&data, tr, te, false).unwrap())
            .collect()
    }

    #[test]
    fn single_point_grid_returns_that_point() {
        let folds = separable_folds();
        let grid = GridSpec {
            c_values: vec![1.0],
            omega_values: vec![0.5],
            a_values: vec![-1.0],
            gamma_values: vec![0.5],
            folds: 2,
            seed: 0,
        };
        let res = grid_search(
            Family::Csvm,
            &folds,
            &grid,
            KernelChoice::Fixed(KernelSpec::Linear),
            FitOptions::default(),
        )
        .unwrap();
        assert_eq!(res.best.c, 1.0);
        assert_eq!(res.table.len(), 1);
    }

    #[test]
    fn perfect_point_wins() {
        let folds = separable_folds();
        // C = 1e-9 underfits badly (alpha pinned near zero); C = 1 separates.
        let grid = GridSpec {
            c_values: vec![1e-9, 1.0],
            omega_values: vec![0.5],
            a_values: vec![-1.0],
            gamma_values: vec![0.5],
            folds: 2,
            seed: 0,
        };
        let res = grid_search(
            Family::Csvm,
            &folds,
            &grid,
            KernelChoice::Fixed(KernelSpec::Linear),
            FitOptions::default(),
        )
        .unwrap();
        assert_eq!(res.best.c, 1.0);
        assert_eq!(res.best_cv_error, 0.0);
    }

    #[test]
    fn grid_search_is_deterministic() {
        let folds = separable_folds();
        let grid = GridSpec {
            c_values: vec![0.25, 1.0, 4.0],
            omega_values: vec![0.3, 0.7],
            a_values: vec![-1.0],
            gamma_values: vec![0.25, 1.0],
            folds: 2,
            seed: 0,
        };
        let r1 = grid_search(Family::Lssvm, &folds, &grid, KernelChoice::RbfTuned, FitOptions::default()).unwrap();
        let r2 = grid_search(Family::Lssvm, &folds, &grid, KernelChoice::RbfTuned, FitOptions::default()).unwrap();
        assert_eq!(r1.best, r2.best);
        assert_eq!(
            serde_json::to_string(&r1.table).unwrap(),
            serde_json::to_string(&r2.table).unwrap()
        );
    }

    #[test]
    fn ties_prefer_smaller_c_and_larger_omega() {
        let folds = separable_folds();
        // Separable data: many points achieve zero CV error; the tie-break
        // must pick the smallest C with the largest omega.
        let grid = GridSpec {
            c_values: vec![4.0, 0.5, 2.0],
            omega_values: vec![0.2, 0.8],
            a_values: vec![-1.0],
            gamma_values: vec![0.5],
            folds: 2,
            seed: 0,
        };
        let mut folds_with_guides = folds;
        for f in &mut folds_with_guides {
            f.guide = EliteGuide::new(vec![0, 1], vec![0.1, 0.2], vec![]).unwrap();
        }
        let res = grid_search(
            Family::Cedsvm,
            &folds_with_guides,
            &grid,
            KernelChoice::Fixed(KernelSpec::Linear),
            FitOptions::default(),
        )
        .unwrap();
        assert_eq!(res.best_cv_error, 0.0);
        assert_eq!(res.best.c, 0.5);
        assert_eq!(res.best.omega, Some(0.8));
    }
}
