//! Dataset CSV reading and deterministic CSV/JSON writing.
//!
//! Input schema: header row required; the label column is named `label` and
//! holds only -1/+1 (or 0/1 when the caller enables the mapping); all other
//! columns are features, kept in header order. Output files use '.' decimals,
//! comma separators, a header row, and LF line endings.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};

use edsvm_core::kernel::Dataset;
use edsvm_core::matrix::Matrix;

pub struct LoadedCsv {
    pub dataset: Dataset,
    #[allow(dead_code)]
    pub feature_names: Vec<String>,
}

pub fn read_dataset(path: &Path, map01: bool) -> Result<LoadedCsv> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut lines = text.lines();
    let header = lines.next().context("empty CSV: missing header row")?;
    let columns: Vec<&str> = header.split(',').map(str::trim).collect();
    let label_col = columns
        .iter()
        .position(|c| *c == "label")
        .context("CSV must contain a column named `label`")?;
    let feature_names: Vec<String> = columns
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != label_col)
        .map(|(_, c)| c.to_string())
        .collect();

    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for (lineno, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != columns.len() {
            bail!(
                "line {}: {} fields but header has {} columns",
                lineno + 2,
                fields.len(),
                columns.len()
            );
        }
        let mut row = Vec::with_capacity(columns.len() - 1);
        for (i, field) in fields.iter().enumerate() {
            let value: f64 = field
                .parse()
                .with_context(|| format!("line {}: bad number {field:?}", lineno + 2))?;
            if i == label_col {
                let mapped = if map01 {
                    if value == 0.0 {
                        -1.0
                    } else if value == 1.0 {
                        1.0
                    } else {
                        bail!("line {}: label {value} not in {{0, 1}}", lineno + 2)
                    }
                } else if value == 1.0 || value == -1.0 {
                    value
                } else {
                    bail!(
                        "line {}: label {value} not in {{-1, +1}} (pass --map01 for 0/1 labels)",
                        lineno + 2
                    )
                };
                labels.push(mapped);
            } else {
                row.push(value);
            }
        }
        rows.push(row);
    }
    let dataset = Dataset::new(Matrix::from_rows(&rows)?, labels)?;
    Ok(LoadedCsv { dataset, feature_names })
}

/// Feature rows for scoring: the `label` column is optional and ignored
/// when present, and no class-balance checks apply.
pub fn read_features(path: &Path) -> Result<Matrix> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut lines = text.lines();
    let header = lines.next().context("empty CSV: missing header row")?;
    let columns: Vec<&str> = header.split(',').map(str::trim).collect();
    let label_col = columns.iter().position(|c| *c == "label");
    let mut rows = Vec::new();
    for (lineno, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != columns.len() {
            bail!(
                "line {}: {} fields but header has {} columns",
                lineno + 2,
                fields.len(),
                columns.len()
            );
        }
        let mut row = Vec::with_capacity(columns.len());
        for (i, field) in fields.iter().enumerate() {
            if Some(i) == label_col {
                continue;
            }
            let value: f64 = field
                .parse()
                .with_context(|| format!("line {}: bad number {field:?}", lineno + 2))?;
            row.push(value);
        }
        rows.push(row);
    }
    Ok(Matrix::from_rows(&rows)?)
}

/// Formats a float with the shortest round-trip representation; stable
/// across runs, '.' decimal separator.
pub fn fmt_f64(v: f64) -> String {
    format!("{v}")
}

pub fn write_csv(path: &Path, header: &[&str], rows: impl Iterator<Item = Vec<f64>>) -> Result<()> {
    let mut out = String::new();
    out.push_str(&header.join(","));
    out.push('\n');
    for row in rows {
        let mut first = true;
        for v in row {
            if !first {
                out.push(',');
            }
            let _ = write!(out, "{}", fmt_f64(v));
            first = false;
        }
        out.push('\n');
    }
    fs::write(path, out).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

pub fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips_a_tiny_dataset() {
        let dir = std::env::temp_dir().join("edsvm-csv-test");
        fs::create_dir_all(&dir).unwrap();
        let path = dir.join("tiny.csv");
        fs::write(&path, "x1,x2,label\n1.5,2,1\n-0.5,3,-1\n").unwrap();
        let loaded = read_dataset(&path, false).unwrap();
        assert_eq!(loaded.feature_names, vec!["x1", "x2"]);
        assert_eq!(loaded.dataset.labels(), &[1.0, -1.0]);
        assert_eq!(loaded.dataset.features().get(1, 0), -0.5);
    }

    #[test]
    fn zero_one_labels_need_the_flag() {
        let dir = std::env::temp_dir().join("edsvm-csv-test");
        fs::create_dir_all(&dir).unwrap();
        let path = dir.join("zeroone.csv");
        fs::write(&path, "x,label\n1,1\n2,0\n").unwrap();
        assert!(read_dataset(&path, false).is_err());
        let loaded = read_dataset(&path, true).unwrap();
        assert_eq!(loaded.dataset.labels(), &[1.0, -1.0]);
    }

    #[test]
    fn missing_label_column_rejected() {
        let dir = std::env::temp_dir().join("edsvm-csv-test");
        fs::create_dir_all(&dir).unwrap();
        let path = dir.join("nolabel.csv");
        fs::write(&path, "x,y\n1,2\n").unwrap();
        assert!(read_dataset(&path, false).is_err());
    }
}
