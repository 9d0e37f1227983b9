//! Experiment command line: simulation, fitting, prediction,
//! cross-validation, and pre-training diagnostics.

mod commands;
mod config;
mod csvio;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::RunConfig;

#[derive(Parser)]
#[command(name = "edsvm", version, about = "Kernel SVMs with benchmark-guided slack regularization")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Flags shared by every command; they override values from `--config`.
#[derive(Args, Clone, Default)]
struct CommonFlags {
    /// JSON configuration file (flags override its values).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Random seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Guidance weight in (0, 1].
    #[arg(long)]
    omega: Option<f64>,
    /// Cost parameter.
    #[arg(long = "C", value_name = "C")]
    c: Option<f64>,
    /// LINEX asymmetry parameter.
    #[arg(long)]
    a: Option<f64>,
    /// Kernel: linear, rbf, or polynomial.
    #[arg(long)]
    kernel: Option<String>,
    /// RBF bandwidth; omit to tune it on the grid where applicable.
    #[arg(long)]
    gamma: Option<f64>,
    /// Model name (fit) or comma-separated list (simulate/cv).
    #[arg(long)]
    model: Option<String>,
    /// Elite target-slack rule: min|mean|max|linex|uci-cedsvm|uci-lsedsvm.
    #[arg(long)]
    targets: Option<String>,
    /// Output file or directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Accept {0,1} labels and map them to {-1,+1}.
    #[arg(long)]
    map01: bool,
    /// Z-score features using training statistics (on by default for CSV
    /// data, off for the simulation).
    #[arg(long)]
    standardize: Option<bool>,
}

#[derive(Subcommand)]
enum Command {
    /// Generate the Gaussian-mixture benchmark, run every model, and export
    /// datasets, decision boundaries, and metrics.
    Simulate {
        #[command(flatten)]
        common: CommonFlags,
    },
    /// Fit one model on a CSV dataset and write the model JSON.
    Fit {
        /// Input dataset CSV (header row; label column named `label`).
        #[arg(long)]
        data: PathBuf,
        #[command(flatten)]
        common: CommonFlags,
    },
    /// Score a CSV with a fitted model JSON.
    Predict {
        /// Fitted model JSON produced by `fit`.
        #[arg(long)]
        model_file: PathBuf,
        #[arg(long)]
        data: PathBuf,
        #[command(flatten)]
        common: CommonFlags,
    },
    /// Cross-validated comparison of the requested models with grid search.
    Cv {
        #[arg(long)]
        data: PathBuf,
        #[command(flatten)]
        common: CommonFlags,
    },
    /// Pre-training diagnostics: benchmark quality, empirical radii, the
    /// usefulness ratio, and calibration checks.
    Diagnose {
        #[arg(long)]
        data: PathBuf,
        #[command(flatten)]
        common: CommonFlags,
    },
}

fn load_config(flags: &CommonFlags) -> anyhow::Result<RunConfig> {
    let mut cfg: RunConfig = match &flags.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| anyhow::anyhow!("reading config {}: {e}", path.display()))?;
            serde_json::from_str(&text)
                .map_err(|e| anyhow::anyhow!("parsing config {}: {e}", path.display()))?
        }
        None => RunConfig::default(),
    };
    if let Some(seed) = flags.seed {
        cfg.seed = Some(seed);
    }
    if let Some(omega) = flags.omega {
        cfg.omega = Some(omega);
    }
    if let Some(c) = flags.c {
        cfg.c = Some(c);
    }
    if let Some(a) = flags.a {
        cfg.a = Some(a);
    }
    if let Some(kernel) = &flags.kernel {
        cfg.kernel = kernel.clone();
    }
    if let Some(gamma) = flags.gamma {
        cfg.gamma = Some(gamma);
    }
    if let Some(model) = &flags.model {
        cfg.models = model.split(',').map(|s| s.trim().to_string()).collect();
    }
    if let Some(targets) = &flags.targets {
        cfg.targets = Some(
            serde_json::from_value(serde_json::Value::String(targets.clone()))
                .map_err(|_| anyhow::anyhow!("unknown --targets value {targets:?}"))?,
        );
    }
    if let Some(out) = &flags.out {
        cfg.out = Some(out.display().to_string());
    }
    if flags.map01 {
        cfg.map01 = true;
    }
    if let Some(s) = flags.standardize {
        cfg.standardize = Some(s);
    }
    Ok(cfg)
}

/// Exit codes: 0 success, 1 I/O or internal failure, 2 configuration or
/// input-schema error, 3 solver failure.
fn classify(err: &anyhow::Error) -> u8 {
    use edsvm_core::EdsvmError;
    use edsvm_harness::cv::CvError;
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<EdsvmError>() {
            return match e {
                EdsvmError::NonConvergence(_) => 3,
                EdsvmError::Infeasible(_) => 3,
                _ => 2,
            };
        }
        if let Some(e) = cause.downcast_ref::<CvError>() {
            return match e {
                CvError::AllPointsFailed(_) | CvError::Fit(EdsvmError::NonConvergence(_)) => 3,
                _ => 2,
            };
        }
        if cause.downcast_ref::<serde_json::Error>().is_some() {
            return 2;
        }
        if cause.downcast_ref::<std::io::Error>().is_some() {
            return 1;
        }
    }
    2
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let run = || -> anyhow::Result<()> {
        match cli.command {
            Command::Simulate { ref common } => commands::simulate(&load_config(common)?),
            Command::Fit { ref data, ref common } => commands::fit(data, &load_config(common)?),
            Command::Predict { ref model_file, ref data, ref common } => {
                commands::predict(model_file, data, &load_config(common)?)
            }
            Command::Cv { ref data, ref common } => commands::cv(data, &load_config(common)?),
            Command::Diagnose { ref data, ref common } => {
                commands::diagnose(data, &load_config(common)?)
            }
        }
    };
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(classify(&err))
        }
    }
}
