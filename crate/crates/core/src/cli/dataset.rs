//! CSV ingestion.

use std::collections::BTreeSet;
use std::path::Path;

use crate::distance::{ColumnKind, DataMatrix};
use crate::error::{Error, Result};
use crate::partition::Partition;

pub const MISSING_TOKENS: [&str; 3] = ["", "?", "NA"];

fn is_missing(cell: &str) -> bool {
    MISSING_TOKENS.contains(&cell.trim())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Encoding {
    /// Every feature column must parse as a number.
    #[default]
    Numeric,
    /// 0/1 columns are kept, every other column is one-hot encoded.
    Binary,
}

#[derive(Debug, Clone, Default)]
pub struct IngestOptions {
    pub label_column: Option<String>,
    pub drop_missing: bool,
    pub encoding: Encoding,
}

#[derive(Debug, Clone)]
pub struct Dataset {
    pub data: DataMatrix,
    pub feature_names: Vec<String>,
    pub truth: Option<Partition>,
    /// Rows skipped because of missing cells.
    pub dropped_rows: usize,
}

impl Dataset {
    pub fn n_items(&self) -> usize {
        self.data.n_rows()
    }
}

pub fn ingest(path: &Path, options: &IngestOptions) -> Result<Dataset> {
    let file = std::fs::File::open(path).map_err(|e| Error::Data(format!("cannot open {}: {e}", path.display())))?;
    ingest_reader(file, options)
}

pub fn ingest_reader<R: std::io::Read>(input: R, options: &IngestOptions) -> Result<Dataset> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(input);
    let header: Vec<String> = reader
        .headers()
        .map_err(|e| Error::Data(format!("cannot read header: {e}")))?
        .iter()
        .map(str::to_owned)
        .collect();
    let label_index = match &options.label_column {
        Some(name) => Some(
            header
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| Error::Data(format!("label column '{name}' not found")))?,
        ),
        None => None,
    };

    let mut cells: Vec<Vec<String>> = Vec::new();
    let mut dropped_rows = 0;
    for (r, record) in reader.records().enumerate() {
        let line = r + 2;
        let record = record.map_err(|e| Error::Data(format!("row {line}: {e}")))?;
        if record.len() != header.len() {
            return Err(Error::Data(format!(
                "row {line}: {} fields, header has {}",
                record.len(),
                header.len()
            )));
        }
        if options.drop_missing && record.iter().any(is_missing) {
            dropped_rows += 1;
            continue;
        }
        if let Some(l) = label_index {
            if is_missing(&record[l]) {
                return Err(Error::Data(format!("row {line}: missing label")));
            }
        }
        cells.push(record.iter().map(str::to_owned).collect());
    }
    if cells.is_empty() {
        return Err(Error::Data("no data rows".into()));
    }

    let mut columns: Vec<Vec<f64>> = Vec::new();
    let mut kinds = Vec::new();
    let mut feature_names = Vec::new();
    for (c, name) in header.iter().enumerate() {
        if Some(c) == label_index {
            continue;
        }
        let numeric: Option<Vec<Option<f64>>> = cells
            .iter()
            .map(|row| {
                if is_missing(&row[c]) {
                    Some(None)
                } else {
                    row[c].parse::<f64>().ok().filter(|x| x.is_finite()).map(Some)
                }
            })
            .collect();
        match (options.encoding, numeric) {
            (Encoding::Numeric, Some(values)) => {
                let column = values
                    .iter()
                    .enumerate()
                    .map(|(r, v)| {
                        v.ok_or_else(|| {
                            Error::Data(format!("missing value in column '{name}' (data row {})", r + 1))
                        })
                    })
                    .collect::<Result<Vec<f64>>>()?;
                columns.push(column);
                kinds.push(ColumnKind::Numeric);
                feature_names.push(name.clone());
            }
            (Encoding::Numeric, None) => {
                let (r, bad) = cells
                    .iter()
                    .enumerate()
                    .find(|(_, row)| !is_missing(&row[c]) && row[c].parse::<f64>().is_err())
                    .map(|(r, row)| (r + 1, row[c].clone()))
                    .unwrap_or_default();
                return Err(Error::Data(format!(
                    "column '{name}' is not numeric ('{bad}' in data row {r}); use jaccard distances for categorical data"
                )));
            }
            (Encoding::Binary, Some(values)) if values.iter().all(|v| matches!(v, Some(0.0) | Some(1.0) | None)) => {
                columns.push(values.iter().map(|v| v.unwrap_or(0.0)).collect());
                kinds.push(ColumnKind::Binary);
                feature_names.push(name.clone());
            }
            (Encoding::Binary, _) => {
                // missing cells get no indicator at all
                let levels: BTreeSet<&str> =
                    cells.iter().map(|row| row[c].as_str()).filter(|v| !is_missing(v)).collect();
                for level in levels {
                    columns.push(cells.iter().map(|row| f64::from(u8::from(row[c] == level))).collect());
                    kinds.push(ColumnKind::Binary);
                    feature_names.push(format!("{name}={level}"));
                }
            }
        }
    }
    if columns.is_empty() {
        return Err(Error::Data("no feature columns".into()));
    }
    let rows: Vec<Vec<f64>> = (0..cells.len()).map(|r| columns.iter().map(|col| col[r]).collect()).collect();
    let truth = match label_index {
        Some(l) => Some(Partition::canonicalize(&cells.iter().map(|row| row[l].as_str()).collect::<Vec<_>>())?),
        None => None,
    };
    Ok(Dataset {
        data: DataMatrix::new(rows, kinds)?,
        feature_names,
        truth,
        dropped_rows,
    })
}
