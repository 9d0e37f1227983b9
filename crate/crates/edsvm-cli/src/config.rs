//! Run configuration: a JSON document merged with command-line overrides.
//! Unknown keys are rejected.

use serde::{Deserialize, Serialize};

use edsvm_core::kernel::KernelSpec;
use edsvm_harness::cv::{Family, GridSpec, KernelChoice};
use edsvm_harness::experiment::{SplitMode, TargetRule};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct RunConfig {
    /// Input dataset CSV; omitted when the command generates its own data.
    #[serde(default)]
    pub dataset: Option<String>,
    /// Model families to run (defaults to all five).
    #[serde(default = "default_models")]
    pub models: Vec<String>,
    /// Kernel: "linear", "rbf" (gamma tuned on the grid), or fixed settings.
    #[serde(default = "default_kernel")]
    pub kernel: String,
    #[serde(default)]
    pub gamma: Option<f64>,
    #[serde(default)]
    pub degree: Option<u32>,
    #[serde(default)]
    pub coef0: Option<f64>,
    /// Fixed hyperparameters for single fits.
    #[serde(default)]
    pub c: Option<f64>,
    #[serde(default)]
    pub omega: Option<f64>,
    #[serde(default)]
    pub a: Option<f64>,
    /// Hyperparameter grids for cross-validation commands.
    #[serde(default)]
    pub grid: Option<GridSpec>,
    /// Elite target-slack rule. When omitted, `simulate` runs all four
    /// single-rule blocks (min, mean, max, linex); `fit` defaults to mean
    /// and `cv`/`diagnose` to the per-variant tabular recipe.
    #[serde(default)]
    pub targets: Option<TargetRule>,
    #[serde(default = "default_elite_eps")]
    pub elite_eps: f64,
    /// Z-score features with training statistics (default: on for CSV data,
    /// off for the simulation).
    #[serde(default)]
    pub standardize: Option<bool>,
    #[serde(default)]
    pub seed: Option<u64>,
    /// Train fraction for single-split mode; cross-validation otherwise.
    #[serde(default)]
    pub train_fraction: Option<f64>,
    /// Output directory.
    #[serde(default)]
    pub out: Option<String>,
    /// Accept {0,1} labels and map them to {-1,+1}.
    #[serde(default)]
    pub map01: bool,
    /// Simulation: seed for the fixed center draw (sampling uses `seed`).
    #[serde(default)]
    pub center_seed: Option<u64>,
    /// Simulation: Monte Carlo sample count for the Bayes accuracy.
    #[serde(default = "default_mc")]
    pub bayes_mc_samples: usize,
    /// Simulation: boundary lattice resolution per axis.
    #[serde(default = "default_resolution")]
    pub grid_resolution: usize,
}

fn default_models() -> Vec<String> {
    ["c-svm", "linex-svm", "ls-svm", "c-edsvm", "ls-edsvm"]
        .iter()
        .map(|s| s.to_string())
        .collect()
}

fn default_kernel() -> String {
    "rbf".into()
}

fn default_elite_eps() -> f64 {
    1e-8
}

fn default_mc() -> usize {
    100_000
}

fn default_resolution() -> usize {
    200
}

impl Default for RunConfig {
    fn default() -> Self {
        serde_json::from_str("{}").expect("empty config is valid")
    }
}

impl RunConfig {
    pub fn families(&self) -> anyhow::Result<Vec<Family>> {
        self.models.iter().map(|m| parse_family(m)).collect()
    }

    /// Kernel treatment for grid-search commands: "rbf" without an explicit
    /// gamma tunes it on the grid.
    pub fn kernel_choice(&self) -> anyhow::Result<KernelChoice> {
        match self.kernel.as_str() {
            "linear" => Ok(KernelChoice::Fixed(KernelSpec::Linear)),
            "rbf" => match self.gamma {
                Some(g) => Ok(KernelChoice::Fixed(KernelSpec::Rbf { gamma: g })),
                None => Ok(KernelChoice::RbfTuned),
            },
            "polynomial" | "poly" => Ok(KernelChoice::Fixed(KernelSpec::Polynomial {
                degree: self.degree.unwrap_or(3),
                coef0: self.coef0.unwrap_or(1.0),
            })),
            other => anyhow::bail!("unknown kernel {other:?} (use linear, rbf, or polynomial)"),
        }
    }

    /// Fixed kernel for single-fit commands; RBF requires an explicit gamma.
    pub fn kernel_fixed(&self) -> anyhow::Result<KernelSpec> {
        match self.kernel_choice()? {
            KernelChoice::Fixed(k) => Ok(k),
            KernelChoice::RbfTuned => {
                anyhow::bail!("this command needs a fixed kernel; pass --gamma for rbf")
            }
        }
    }

    pub fn split_mode(&self) -> SplitMode {
        match self.train_fraction {
            Some(f) => SplitMode::TrainTest { train_fraction: f },
            None => SplitMode::CrossValidation,
        }
    }

    pub fn grid_or_default(&self) -> GridSpec {
        let mut grid = self.grid.clone().unwrap_or_default();
        grid.seed = self.seed.unwrap_or(grid.seed);
        grid
    }
}

pub fn parse_family(name: &str) -> anyhow::Result<Family> {
    Ok(match name {
        "c-svm" | "csvm" => Family::Csvm,
        "ls-svm" | "lssvm" => Family::Lssvm,
        "linex-svm" | "linexsvm" | "linex" => Family::LinexSvm,
        "c-edsvm" | "cedsvm" => Family::Cedsvm,
        "ls-edsvm" | "lsedsvm" => Family::Lsedsvm,
        other => anyhow::bail!("unknown model {other:?}"),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_keys_rejected() {
        let err = serde_json::from_str::<RunConfig>(r#"{"no-such-key": 1}"#);
        assert!(err.is_err());
    }

    #[test]
    fn defaults_cover_all_models() {
        let cfg = RunConfig::default();
        assert_eq!(cfg.families().unwrap().len(), 5);
        assert!(matches!(cfg.kernel_choice().unwrap(), KernelChoice::RbfTuned));
    }

    #[test]
    fn explicit_gamma_fixes_the_kernel() {
        let cfg: RunConfig = serde_json::from_str(r#"{"kernel": "rbf", "gamma": 0.5}"#).unwrap();
        assert!(matches!(
            cfg.kernel_choice().unwrap(),
            KernelChoice::Fixed(KernelSpec::Rbf { gamma }) if gamma == 0.5
        ));
    }
}
