//! End-to-end experiment protocols: benchmark tuning, per-fold elite guide
//! construction, elite-driven fits, and metric reporting.
//!
//! Two modes are supported. Cross-validation mode tunes every family by grid
//! search over shared stratified folds and reports fold means and standard
//! deviations at the selected point. Train/test mode draws one stratified
//! split, tunes on the training part, refits on all of it, and evaluates
//! once on the held-out part; the same split is shared by every family.

use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use edsvm_core::edsvm::FitOptions;
use edsvm_core::elite::{build_guide, AggregationRule, EliteGuide};
use edsvm_core::kernel::Dataset;
use edsvm_core::model::{ModelVariant, TrainedModel};

use crate::cv::{
    fit_family, fold_splits, grid_search, stratified_kfold, CvError, Family, FoldContext,
    GridSearchResult, GridSpec, HyperPoint, KernelChoice,
};
use crate::metrics::{compute_metrics, Metrics};

/// Elite target-slack recipe.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TargetRule {
    /// Best-case benchmark: pointwise minimum over all three baselines.
    Min,
    /// Average of the LINEX and squared-slack baseline slacks.
    Mean,
    /// Conservative benchmark: pointwise maximum over all three baselines.
    Max,
    /// LINEX-only benchmark.
    Linex,
    /// Per-variant recipe used for the tabular benchmarks: the hinge variant
    /// averages LINEX and LS slacks, the squared variant averages hinge and
    /// LINEX slacks.
    UciCedsvm,
    UciLsedsvm,
}

impl TargetRule {
    pub fn name(&self) -> &'static str {
        match self {
            TargetRule::Min => "min",
            TargetRule::Mean => "mean",
            TargetRule::Max => "max",
            TargetRule::Linex => "linex",
            TargetRule::UciCedsvm => "uci-cedsvm",
            TargetRule::UciLsedsvm => "uci-lsedsvm",
        }
    }

    pub fn aggregation_for(&self, family: Family) -> AggregationRule {
        match self {
            TargetRule::Min => AggregationRule::Min,
            TargetRule::Max => AggregationRule::Max,
            TargetRule::Mean => {
                AggregationRule::MeanOf(vec![ModelVariant::LinexSvm, ModelVariant::Lssvm])
            }
            TargetRule::Linex => AggregationRule::Single(ModelVariant::LinexSvm),
            TargetRule::UciCedsvm | TargetRule::UciLsedsvm => match family {
                Family::Lsedsvm => {
                    AggregationRule::MeanOf(vec![ModelVariant::Csvm, ModelVariant::LinexSvm])
                }
                _ => AggregationRule::MeanOf(vec![ModelVariant::LinexSvm, ModelVariant::Lssvm]),
            },
        }
    }
}

/// How the data is split for reporting.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SplitMode {
    CrossValidation,
    TrainTest { train_fraction: f64 },
}

/// Full experiment description.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Protocol {
    pub families: Vec<Family>,
    pub kernel: KernelChoice,
    pub grid: GridSpec,
    pub targets: TargetRule,
    pub elite_eps: f64,
    pub standardize: bool,
    pub mode: SplitMode,
    pub seed: u64,
}

impl Protocol {
    pub fn validate(&self) -> Result<(), CvError> {
        self.grid.validate()?;
        if self.families.is_empty() {
            return Err(CvError::BadGrid("no model families requested".into()));
        }
        if let SplitMode::TrainTest { train_fraction } = self.mode {
            if !(train_fraction > 0.0 && train_fraction < 1.0) {
                return Err(CvError::BadGrid(format!(
                    "train fraction {train_fraction} must lie in (0, 1)"
                )));
            }
        }
        if self.elite_eps.is_nan() || self.elite_eps <= 0.0 {
            return Err(CvError::BadGrid("elite eps must be positive".into()));
        }
        Ok(())
    }
}

/// Componentwise mean and (sample) standard deviation across folds.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MetricsSummary {
    pub mean: Metrics,
    pub sd: Metrics,
}

fn summarize(per_fold: &[Metrics]) -> MetricsSummary {
    let k = per_fold.len() as f64;
    let field = |get: fn(&Metrics) -> f64| -> (f64, f64) {
        let mean = per_fold.iter().map(get).sum::<f64>() / k;
        let sd = if per_fold.len() > 1 {
            (per_fold.iter().map(|m| (get(m) - mean).powi(2)).sum::<f64>() / (k - 1.0)).sqrt()
        } else {
            0.0
        };
        (mean, sd)
    };
    let (acc, acc_sd) = field(|m| m.accuracy);
    let (sen, sen_sd) = field(|m| m.sensitivity);
    let (spe, spe_sd) = field(|m| m.specificity);
    let (pre, pre_sd) = field(|m| m.precision);
    let (f1, f1_sd) = field(|m| m.f1);
    let (auc, auc_sd) = field(|m| m.roc_auc);
    let (pr, pr_sd) = field(|m| m.pr_auc);
    let undefined = per_fold.iter().any(|m| m.precision_undefined);
    MetricsSummary {
        mean: Metrics {
            accuracy: acc,
            sensitivity: sen,
            specificity: spe,
            precision: pre,
            f1,
            roc_auc: auc,
            pr_auc: pr,
            precision_undefined: undefined,
        },
        sd: Metrics {
            accuracy: acc_sd,
            sensitivity: sen_sd,
            specificity: spe_sd,
            precision: pre_sd,
            f1: f1_sd,
            roc_auc: auc_sd,
            pr_auc: pr_sd,
            precision_undefined: false,
        },
    }
}

/// Result for one model family.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelOutcome {
    pub family: Family,
    pub selected: HyperPoint,
    pub cv_error: f64,
    pub per_fold: Vec<Metrics>,
    pub summary: MetricsSummary,
}

/// Serializable experiment report.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub mode: SplitMode,
    pub targets: TargetRule,
    pub seed: u64,
    pub standardize: bool,
    /// Elite-set size per fold (cross-validation) or for the final fit
    /// (train/test); empty when no elite-driven family ran.
    pub elite_sizes: Vec<usize>,
    pub outcomes: Vec<ModelOutcome>,
}

/// Report plus the final fitted models (train/test mode re-fits on the whole
/// training part; cross-validation mode returns the last fold's fits).
pub struct ExperimentResult {
    pub report: ExperimentReport,
    pub models: Vec<(Family, TrainedModel)>,
}

const BENCHMARKS: [Family; 3] = [Family::Csvm, Family::Lssvm, Family::LinexSvm];

fn needs_benchmarks(families: &[Family]) -> bool {
    families.iter().any(|f| matches!(f, Family::Cedsvm | Family::Lsedsvm))
}

/// Stratified train/test split: per-class seeded shuffle, first
/// `round(fraction * n_class)` indices go to the training part.
pub fn stratified_train_test_split(
    labels: &[f64],
    train_fraction: f64,
    seed: u64,
) -> (Vec<usize>, Vec<usize>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut train = Vec::new();
    let mut test = Vec::new();
    for class in [1.0, -1.0] {
        let mut idx: Vec<usize> = labels
            .iter()
            .enumerate()
            .filter_map(|(i, &y)| (y == class).then_some(i))
            .collect();
        idx.shuffle(&mut rng);
        let n_train = (train_fraction * idx.len() as f64).round() as usize;
        let n_train = n_train.clamp(1, idx.len().saturating_sub(1));
        train.extend_from_slice(&idx[..n_train]);
        test.extend_from_slice(&idx[n_train..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    (train, test)
}

struct TunedBenchmarks {
    search: Vec<(Family, GridSearchResult)>,
}

impl TunedBenchmarks {
    fn best(&self, family: Family) -> &GridSearchResult {
        &self.search.iter().find(|(f, _)| *f == family).unwrap().1
    }
}

/// Which benchmark families actually need tuning: all three when any
/// elite-driven family is requested (they feed the guides), otherwise only
/// the requested baselines.
fn benchmarks_to_tune(families: &[Family]) -> Vec<Family> {
    if needs_benchmarks(families) {
        BENCHMARKS.to_vec()
    } else {
        BENCHMARKS.iter().copied().filter(|f| families.contains(f)).collect()
    }
}

fn tune_benchmarks(
    folds: &[FoldContext],
    grid: &GridSpec,
    kernel: KernelChoice,
    opts: FitOptions,
    which: &[Family],
) -> Result<TunedBenchmarks, CvError> {
    let mut search = Vec::new();
    for &family in which {
        search.push((family, grid_search(family, folds, grid, kernel, opts)?));
    }
    Ok(TunedBenchmarks { search })
}

/// Fits the three tuned benchmarks on one fold and assembles the guide.
fn guide_for_fold(
    fold: &FoldContext,
    tuned: &TunedBenchmarks,
    kernel: KernelChoice,
    rule: &AggregationRule,
    eps: f64,
    opts: FitOptions,
) -> Result<EliteGuide, CvError> {
    let mut fitted = Vec::new();
    for family in BENCHMARKS {
        let best = &tuned.best(family).best;
        let k = best.kernel(kernel);
        fitted.push(fit_family(family, best, &k, fold, None, opts)?);
    }
    let refs: Vec<&TrainedModel> = fitted.iter().collect();
    Ok(build_guide(&refs, rule, eps)?)
}

type EvaluatedPoint = (Vec<Metrics>, Vec<(Family, TrainedModel)>);

fn evaluate_point(
    family: Family,
    point: &HyperPoint,
    kernel: KernelChoice,
    folds: &[FoldContext],
    opts: FitOptions,
) -> Result<EvaluatedPoint, CvError> {
    let k = point.kernel(kernel);
    let mut per_fold = Vec::with_capacity(folds.len());
    let mut last_model = None;
    for fold in folds {
        let model = fit_family(family, point, &k, fold, None, opts)?;
        let scores = model.decision_values(&fold.test_features).map_err(CvError::Fit)?;
        let metrics = compute_metrics(&scores, &fold.test_labels, 0.0)
            .map_err(|e| CvError::BadGrid(e.to_string()))?;
        per_fold.push(metrics);
        last_model = Some(model);
    }
    Ok((per_fold, vec![(family, last_model.unwrap())]))
}

/// Runs the configured protocol on a dataset.
pub fn run_experiment(data: &Dataset, protocol: &Protocol) -> Result<ExperimentResult, CvError> {
    protocol.validate()?;
    match protocol.mode {
        SplitMode::CrossValidation => run_cv(data, protocol),
        SplitMode::TrainTest { train_fraction } => run_train_test(data, protocol, train_fraction),
    }
}

fn run_cv(data: &Dataset, protocol: &Protocol) -> Result<ExperimentResult, CvError> {
    let assignment = stratified_kfold(data.labels(), protocol.grid.folds, protocol.seed)?;
    let splits = fold_splits(&assignment, protocol.grid.folds);
    let base_folds: Vec<FoldContext> = splits
        .iter()
        .map(|(tr, te)| FoldContext::build(data, tr, te, protocol.standardize))
        .collect::<Result<_, _>>()?;

    let to_tune = benchmarks_to_tune(&protocol.families);
    let tuned = if to_tune.is_empty() {
        None
    } else {
        Some(tune_benchmarks(&base_folds, &protocol.grid, protocol.kernel, FitOptions::default(), &to_tune)?)
    };

    let mut outcomes = Vec::new();
    let mut models = Vec::new();
    let mut elite_sizes = Vec::new();

    for &family in &protocol.families {
        let opts = FitOptions::default();
        match family {
            Family::Csvm | Family::Lssvm | Family::LinexSvm => {
                let search = tuned.as_ref().unwrap().best(family);
                let (per_fold, mut fitted) =
                    evaluate_point(family, &search.best, protocol.kernel, &base_folds, opts)?;
                outcomes.push(ModelOutcome {
                    family,
                    selected: search.best,
                    cv_error: search.best_cv_error,
                    summary: summarize(&per_fold),
                    per_fold,
                });
                models.append(&mut fitted);
            }
            Family::Cedsvm | Family::Lsedsvm => {
                let tuned = tuned.as_ref().unwrap();
                let rule = protocol.targets.aggregation_for(family);
                let mut folds: Vec<FoldContext> = splits
                    .iter()
                    .map(|(tr, te)| FoldContext::build(data, tr, te, protocol.standardize))
                    .collect::<Result<_, _>>()?;
                for fold in &mut folds {
                    fold.guide = guide_for_fold(
                        fold,
                        tuned,
                        protocol.kernel,
                        &rule,
                        protocol.elite_eps,
                        opts,
                    )?;
                }
                elite_sizes.extend(folds.iter().map(|f| f.guide.len()));
                let search = grid_search(family, &folds, &protocol.grid, protocol.kernel, opts)?;
                let (per_fold, mut fitted) =
                    evaluate_point(family, &search.best, protocol.kernel, &folds, opts)?;
                outcomes.push(ModelOutcome {
                    family,
                    selected: search.best,
                    cv_error: search.best_cv_error,
                    summary: summarize(&per_fold),
                    per_fold,
                });
                models.append(&mut fitted);
            }
        }
    }

    Ok(ExperimentResult {
        report: ExperimentReport {
            mode: protocol.mode,
            targets: protocol.targets,
            seed: protocol.seed,
            standardize: protocol.standardize,
            elite_sizes,
            outcomes,
        },
        models,
    })
}

fn run_train_test(
    data: &Dataset,
    protocol: &Protocol,
    train_fraction: f64,
) -> Result<ExperimentResult, CvError> {
    let (train_idx, test_idx) = stratified_train_test_split(data.labels(), train_fraction, protocol.seed);
    // One shared "fold" carrying the final train/test split; hyperparameters
    // are chosen by cross-validation inside the training part.
    let final_fold = FoldContext::build(data, &train_idx, &test_idx, protocol.standardize)?;
    let train_data: Arc<Dataset> = Arc::clone(&final_fold.train);

    let inner_assignment = stratified_kfold(train_data.labels(), protocol.grid.folds, protocol.seed ^ 0x5eed)?;
    let inner_splits = fold_splits(&inner_assignment, protocol.grid.folds);
    let inner_folds: Vec<FoldContext> = inner_splits
        .iter()
        .map(|(tr, te)| FoldContext::build(&train_data, tr, te, false))
        .collect::<Result<_, _>>()?;

    let tuned = tune_benchmarks(
        &inner_folds,
        &protocol.grid,
        protocol.kernel,
        FitOptions::default(),
        &benchmarks_to_tune(&protocol.families),
    )?;

    let mut outcomes = Vec::new();
    let mut models = Vec::new();
    let mut elite_sizes = Vec::new();
    let opts = FitOptions::default();

    for &family in &protocol.families {
        match family {
            Family::Csvm | Family::Lssvm | Family::LinexSvm => {
                let search = tuned.best(family);
                let (per_fold, mut fitted) =
                    evaluate_point(family, &search.best, protocol.kernel, std::slice::from_ref(&final_fold), opts)?;
                outcomes.push(ModelOutcome {
                    family,
                    selected: search.best,
                    cv_error: search.best_cv_error,
                    summary: summarize(&per_fold),
                    per_fold,
                });
                models.append(&mut fitted);
            }
            Family::Cedsvm | Family::Lsedsvm => {
                let rule = protocol.targets.aggregation_for(family);
                // Inner folds with guides for tuning.
                let mut guided_inner: Vec<FoldContext> = inner_splits
                    .iter()
                    .map(|(tr, te)| FoldContext::build(&train_data, tr, te, false))
                    .collect::<Result<_, _>>()?;
                for fold in &mut guided_inner {
                    fold.guide =
                        guide_for_fold(fold, &tuned, protocol.kernel, &rule, protocol.elite_eps, opts)?;
                }
                let search = grid_search(family, &guided_inner, &protocol.grid, protocol.kernel, opts)?;
                // Final fit on the whole training part with its own guide.
                let mut guided_final = FoldContext::build(data, &train_idx, &test_idx, protocol.standardize)?;
                guided_final.guide = guide_for_fold(
                    &guided_final,
                    &tuned,
                    protocol.kernel,
                    &rule,
                    protocol.elite_eps,
                    opts,
                )?;
                elite_sizes.push(guided_final.guide.len());
                let (per_fold, mut fitted) = evaluate_point(
                    family,
                    &search.best,
                    protocol.kernel,
                    std::slice::from_ref(&guided_final),
                    opts,
                )?;
                outcomes.push(ModelOutcome {
                    family,
                    selected: search.best,
                    cv_error: search.best_cv_error,
                    summary: summarize(&per_fold),
                    per_fold,
                });
                models.append(&mut fitted);
            }
        }
    }

    Ok(ExperimentResult {
        report: ExperimentReport {
            mode: protocol.mode,
            targets: protocol.targets,
            seed: protocol.seed,
            standardize: protocol.standardize,
            elite_sizes,
            outcomes,
        },
        models,
    })
}

/// One elite-driven block of the simulation study: every requested
/// elite-driven family evaluated under one target-slack rule.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TargetBlock {
    pub targets: TargetRule,
    pub elite_sizes: Vec<usize>,
    pub outcomes: Vec<ModelOutcome>,
}

/// Simulation-study report: baselines once, then one block per target rule.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SimulationReport {
    pub mode: SplitMode,
    pub seed: u64,
    pub standardize: bool,
    pub baselines: Vec<ModelOutcome>,
    pub blocks: Vec<TargetBlock>,
}

pub struct SimulationResult {
    pub report: SimulationReport,
    /// Fitted models keyed "family" for baselines and "family@rule" for the
    /// elite-driven fits.
    pub models: Vec<(String, TrainedModel)>,
}

/// Train/test protocol over several target-slack rules, tuning the three
/// benchmarks once and reusing them for every block.
pub fn run_simulation_blocks(
    data: &Dataset,
    protocol: &Protocol,
    rules: &[TargetRule],
) -> Result<SimulationResult, CvError> {
    protocol.validate()?;
    let train_fraction = match protocol.mode {
        SplitMode::TrainTest { train_fraction } => train_fraction,
        SplitMode::CrossValidation => {
            return Err(CvError::BadGrid("simulation blocks need a train/test split".into()))
        }
    };
    let (train_idx, test_idx) =
        stratified_train_test_split(data.labels(), train_fraction, protocol.seed);
    let final_fold = FoldContext::build(data, &train_idx, &test_idx, protocol.standardize)?;
    let train_data: Arc<Dataset> = Arc::clone(&final_fold.train);

    let inner_assignment =
        stratified_kfold(train_data.labels(), protocol.grid.folds, protocol.seed ^ 0x5eed)?;
    let inner_splits = fold_splits(&inner_assignment, protocol.grid.folds);
    let inner_folds: Vec<FoldContext> = inner_splits
        .iter()
        .map(|(tr, te)| FoldContext::build(&train_data, tr, te, false))
        .collect::<Result<_, _>>()?;

    let baseline_families: Vec<Family> = protocol
        .families
        .iter()
        .copied()
        .filter(|f| BENCHMARKS.contains(f))
        .collect();
    let edsvm_families: Vec<Family> = protocol
        .families
        .iter()
        .copied()
        .filter(|f| matches!(f, Family::Cedsvm | Family::Lsedsvm))
        .collect();

    let opts = FitOptions::default();
    let tuned = tune_benchmarks(
        &inner_folds,
        &protocol.grid,
        protocol.kernel,
        opts,
        &benchmarks_to_tune(&protocol.families),
    )?;

    let mut models = Vec::new();
    let mut baselines = Vec::new();
    for &family in &baseline_families {
        let search = tuned.best(family);
        let (per_fold, fitted) =
            evaluate_point(family, &search.best, protocol.kernel, std::slice::from_ref(&final_fold), opts)?;
        baselines.push(ModelOutcome {
            family,
            selected: search.best,
            cv_error: search.best_cv_error,
            summary: summarize(&per_fold),
            per_fold,
        });
        for (f, m) in fitted {
            models.push((f.name().to_string(), m));
        }
    }

    let mut blocks = Vec::new();
    for &rule in rules {
        if edsvm_families.is_empty() {
            break;
        }
        let mut outcomes = Vec::new();
        let mut elite_sizes = Vec::new();
        for &family in &edsvm_families {
            let agg = rule.aggregation_for(family);
            let mut guided_inner: Vec<FoldContext> = inner_splits
                .iter()
                .map(|(tr, te)| FoldContext::build(&train_data, tr, te, false))
                .collect::<Result<_, _>>()?;
            for fold in &mut guided_inner {
                fold.guide =
                    guide_for_fold(fold, &tuned, protocol.kernel, &agg, protocol.elite_eps, opts)?;
            }
            let search = grid_search(family, &guided_inner, &protocol.grid, protocol.kernel, opts)?;
            let mut guided_final =
                FoldContext::build(data, &train_idx, &test_idx, protocol.standardize)?;
            guided_final.guide =
                guide_for_fold(&guided_final, &tuned, protocol.kernel, &agg, protocol.elite_eps, opts)?;
            elite_sizes.push(guided_final.guide.len());
            let (per_fold, fitted) = evaluate_point(
                family,
                &search.best,
                protocol.kernel,
                std::slice::from_ref(&guided_final),
                opts,
            )?;
            outcomes.push(ModelOutcome {
                family,
                selected: search.best,
                cv_error: search.best_cv_error,
                summary: summarize(&per_fold),
                per_fold,
            });
            for (f, m) in fitted {
                models.push((format!("{}@{}", f.name(), rule.name()), m));
            }
        }
        blocks.push(TargetBlock { targets: rule, elite_sizes, outcomes });
    }

    Ok(SimulationResult {
        report: SimulationReport {
            mode: protocol.mode,
            seed: protocol.seed,
            standardize: protocol.standardize,
            baselines,
            blocks,
        },
        models,
    })
}

fn table_header() -> String {
    format!(
        "{:<12} {:<12} {:>16} {:>16} {:>16} {:>16}\n",
        "target", "model", "accuracy", "auc", "f1", "pr-auc"
    )
}

fn table_row(target: &str, o: &ModelOutcome) -> String {
    let cell = |mean: f64, sd: f64| format!("{:.2} +/- {:.2}", 100.0 * mean, 100.0 * sd);
    format!(
        "{:<12} {:<12} {:>16} {:>16} {:>16} {:>16}\n",
        target,
        o.family.name(),
        cell(o.summary.mean.accuracy, o.summary.sd.accuracy),
        cell(o.summary.mean.roc_auc, o.summary.sd.roc_auc),
        cell(o.summary.mean.f1, o.summary.sd.f1),
        cell(o.summary.mean.pr_auc, o.summary.sd.pr_auc),
    )
}

/// Aligned-text rendering of the block layout: baselines first, then one
/// block per target-slack rule.
pub fn render_blocks_table(report: &SimulationReport) -> String {
    let mut out = table_header();
    for o in &report.baselines {
        out.push_str(&table_row("-", o));
    }
    for block in &report.blocks {
        for o in &block.outcomes {
            out.push_str(&table_row(block.targets.name(), o));
        }
    }
    out
}

/// Renders the report as an aligned text table (one row per family/metric,
/// mean +/- sd in percent).
pub fn render_table(report: &ExperimentReport) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "{:<12} {:>16} {:>16} {:>16} {:>16}\n",
        "model", "accuracy", "auc", "f1", "pr-auc"
    ));
    for o in &report.outcomes {
        let cell = |mean: f64, sd: f64| format!("{:.2} +/- {:.2}", 100.0 * mean, 100.0 * sd);
        out.push_str(&format!(
            "{:<12} {:>16} {:>16} {:>16} {:>16}\n",
            o.family.name(),
            cell(o.summary.mean.accuracy, o.summary.sd.accuracy),
            cell(o.summary.mean.roc_auc, o.summary.sd.roc_auc),
            cell(o.summary.mean.f1, o.summary.sd.f1),
            cell(o.summary.mean.pr_auc, o.summary.sd.pr_auc),
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simgen;
    use edsvm_core::kernel::KernelSpec;

    fn small_grid() -> GridSpec {
        GridSpec {
            c_values: vec![0.5, 2.0],
            omega_values: vec![0.4, 0.8],
            a_values: vec![-1.0, -2.0],
            gamma_values: vec![0.5],
            folds: 3,
            seed: 0,
        }
    }

    #[test]
    fn split_is_stratified_and_deterministic() {
        let labels: Vec<f64> = (0..50).map(|i| if i % 5 == 0 { 1.0 } else { -1.0 }).collect();
        let (tr1, te1) = stratified_train_test_split(&labels, 0.7, 9);
        let (tr2, te2) = stratified_train_test_split(&labels, 0.7, 9);
        assert_eq!(tr1, tr2);
        assert_eq!(te1, te2);
        assert_eq!(tr1.len() + te1.len(), 50);
        let pos_train = tr1.iter().filter(|&&i| labels[i] > 0.0).count();
        assert_eq!(pos_train, 7); // 0.7 * 10 positives
    }

    #[test]
    fn cv_experiment_runs_all_families() {
        let spec = simgen::draw_centers(2);
        let data = simgen::sample_dataset(&spec, 3).unwrap();
        let protocol = Protocol {
            families: vec![Family::Csvm, Family::Lssvm, Family::LinexSvm, Family::Cedsvm, Family::Lsedsvm],
            kernel: KernelChoice::Fixed(KernelSpec::Rbf { gamma: 0.5 }),
            grid: small_grid(),
            targets: TargetRule::Max,
            elite_eps: 1e-8,
            standardize: false,
            mode: SplitMode::CrossValidation,
            seed: 7,
        };
        let result = run_experiment(&data, &protocol).unwrap();
        assert_eq!(result.report.outcomes.len(), 5);
        for o in &result.report.outcomes {
            assert!(o.summary.mean.accuracy > 0.5, "{}: {}", o.family.name(), o.summary.mean.accuracy);
        }
        // Elite sets recorded per fold for both elite-driven families.
        assert_eq!(result.report.elite_sizes.len(), 2 * protocol.grid.folds);
        for &m in &result.report.elite_sizes {
            assert!(m > 0 && m < 200, "elite size {m} out of range");
        }
    }

    #[test]
    fn train_test_experiment_is_deterministic() {
        let spec = simgen::draw_centers(4);
        let data = simgen::sample_dataset(&spec, 5).unwrap();
        let protocol = Protocol {
            families: vec![Family::Csvm, Family::Cedsvm],
            kernel: KernelChoice::Fixed(KernelSpec::Rbf { gamma: 0.5 }),
            grid: small_grid(),
            targets: TargetRule::Min,
            elite_eps: 1e-8,
            standardize: false,
            mode: SplitMode::TrainTest { train_fraction: 0.7 },
            seed: 13,
        };
        let r1 = run_experiment(&data, &protocol).unwrap();
        let r2 = run_experiment(&data, &protocol).unwrap();
        assert_eq!(
            serde_json::to_string(&r1.report).unwrap(),
            serde_json::to_string(&r2.report).unwrap()
        );
    }
}
