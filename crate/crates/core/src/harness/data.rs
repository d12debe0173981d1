//! CSV ingestion and the bundled datasets.

use super::HarnessError;
use crate::dataset::Dataset;
use crate::matrix::Matrix;
use std::path::{Path, PathBuf};

/// Which column holds the label.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LabelColumn {
    Last,
    Index(usize),
    Name(String),
}

impl std::str::FromStr for LabelColumn {
    type Err = std::convert::Infallible;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "last" => LabelColumn::Last,
            _ => match s.parse::<usize>() {
                Ok(i) => LabelColumn::Index(i),
                Err(_) => LabelColumn::Name(s.to_string()),
            },
        })
    }
}

/// How raw label strings become {-1, +1}. With `positive` unset the file
/// must already use -1/+1 (or 0/1, where 0 maps to -1).
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LabelMapping {
    pub positive: Option<String>,
}

impl LabelMapping {
    pub fn positive(p: impl Into<String>) -> Self {
        Self {
            positive: Some(p.into()),
        }
    }
}

/// Reads a CSV with a header row. Every non-label column must be numeric.
/// Rows and columns in errors are 1-based as a spreadsheet shows them.
pub fn load_csv(
    path: &Path,
    label: &LabelColumn,
    mapping: &LabelMapping,
) -> Result<Dataset, HarnessError> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| HarnessError::Io(format!("{}: {e}", path.display())))?;
    let header: Vec<String> = rdr
        .headers()
        .map_err(|e| HarnessError::Io(e.to_string()))?
        .iter()
        .map(str::to_string)
        .collect();
    let width = header.len();
    let lc = match label {
        LabelColumn::Last => width.checked_sub(1),
        LabelColumn::Index(i) => (*i < width).then_some(*i),
        LabelColumn::Name(n) => header.iter().position(|h| h == n),
    }
    .ok_or_else(|| HarnessError::Config(format!("label column {label:?} not in header")))?;

    let mut rows = Vec::new();
    let mut raw_labels = Vec::new();
    for (r, rec) in rdr.records().enumerate() {
        // Header is row 1.
        let row = r + 2;
        let rec = rec.map_err(|e| HarnessError::Parse {
            row,
            column: 0,
            message: e.to_string(),
        })?;
        if rec.len() != width {
            return Err(HarnessError::Parse {
                row,
                column: rec.len().min(width) + 1,
                message: format!("expected {width} fields, found {}", rec.len()),
            });
        }
        let mut feats = Vec::with_capacity(width - 1);
        for (c, cell) in rec.iter().enumerate() {
            if c == lc {
                raw_labels.push(cell.to_string());
                continue;
            }
            let v: f64 = cell.parse().map_err(|_| HarnessError::Parse {
                row,
                column: c + 1,
                message: format!("not a number: {cell:?}"),
            })?;
            if !v.is_finite() {
                return Err(HarnessError::Parse {
                    row,
                    column: c + 1,
                    message: format!("not finite: {cell:?}"),
                });
            }
            feats.push(v);
        }
        rows.push(feats);
    }
    if rows.is_empty() {
        return Err(HarnessError::Config(format!("{} has no records", path.display())));
    }
    let labels = map_labels(&raw_labels, mapping)?;
    let features = Matrix::from_rows(rows).expect("widths checked");
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let mut d = Dataset::new(name, features, labels).expect("labels mapped to +-1");
    d.feature_names = header
        .into_iter()
        .enumerate()
        .filter(|(c, _)| *c != lc)
        .map(|(_, h)| h)
        .collect();
    Ok(d)
}

fn map_labels(raw: &[String], mapping: &LabelMapping) -> Result<Vec<i8>, HarnessError> {
    let mut distinct: Vec<&str> = raw.iter().map(String::as_str).collect();
    distinct.sort_unstable();
    distinct.dedup();
    if distinct.len() > 2 {
        return Err(HarnessError::NonBinaryLabels {
            found: distinct.iter().map(|s| s.to_string()).collect(),
        });
    }
    match &mapping.positive {
        Some(p) => Ok(raw.iter().map(|l| if l == p { 1 } else { -1 }).collect()),
        None => raw
            .iter()
            .map(|l| match l.parse::<f64>() {
                Ok(1.0) => Ok(1),
                Ok(-1.0 | 0.0) => Ok(-1),
                _ => Err(HarnessError::NonBinaryLabels {
                    found: distinct.iter().map(|s| s.to_string()).collect(),
                }),
            })
            .collect(),
    }
}

/// Directory holding the bundled CSVs: `CONFBOOST_DATA` if set, else the
/// repository's `data/`.
pub fn data_dir() -> PathBuf {
    std::env::var_os("CONFBOOST_DATA")
        .map(PathBuf::from)
        .unwrap_or_else(|| Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data"))
}

pub const BUILTIN: [&str; 2] = ["ionosphere", "credit"];

/// Loads a bundled dataset by name ("g" is the positive ionosphere class,
/// "1" the good credit class).
pub fn builtin(name: &str) -> Result<Dataset, HarnessError> {
    let positive = match name {
        "ionosphere" => "g",
        "credit" => "1",
        _ => {
            return Err(HarnessError::Config(format!(
                "unknown dataset {name:?}; bundled: {BUILTIN:?}"
            )))
        }
    };
    load_csv(
        &data_dir().join(format!("{name}.csv")),
        &LabelColumn::Last,
        &LabelMapping::positive(positive),
    )
}
