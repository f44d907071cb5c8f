//! Per-method result rows and their CSV / text renderings.

use std::io::Write;

use crate::error::Result;
use crate::loss::{binder_between, vi_between_base, LogBase};
use crate::partition::Partition;

pub const REPORT_HEADER: &str = "method,k,binder,vi_nats,vi_bits,runtime_s,seed";

#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    /// Normalized by the number of item pairs.
    pub binder: f64,
    pub vi_nats: f64,
    pub vi_bits: f64,
}

impl Evaluation {
    pub fn against(estimate: &Partition, truth: &Partition) -> Result<Self> {
        Ok(Self {
            binder: binder_between(estimate, truth)?,
            vi_nats: vi_between_base(estimate, truth, LogBase::Natural)?,
            vi_bits: vi_between_base(estimate, truth, LogBase::Two)?,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub method: String,
    pub k: usize,
    /// Present only when a true partition is known.
    pub evaluation: Option<Evaluation>,
    /// Present only when timing was requested, so reports stay reproducible
    /// by default.
    pub runtime_s: Option<f64>,
    pub seed: u64,
}

impl RunReport {
    pub fn new(method: impl Into<String>, estimate: &Partition, truth: Option<&Partition>, seed: u64) -> Result<Self> {
        Ok(Self {
            method: method.into(),
            k: estimate.n_clusters(),
            evaluation: truth.map(|t| Evaluation::against(estimate, t)).transpose()?,
            runtime_s: None,
            seed,
        })
    }

    fn csv_row(&self) -> String {
        let na = || "NA".to_string();
        let (b, vn, vb) = match &self.evaluation {
            Some(e) => (e.binder.to_string(), e.vi_nats.to_string(), e.vi_bits.to_string()),
            None => (na(), na(), na()),
        };
        let t = self.runtime_s.map_or_else(na, |t| t.to_string());
        format!("{},{},{b},{vn},{vb},{t},{}", self.method, self.k, self.seed)
    }
}

pub fn write_reports_csv<W: Write>(reports: &[RunReport], mut out: W) -> Result<()> {
    writeln!(out, "{REPORT_HEADER}")?;
    for r in reports {
        writeln!(out, "{}", r.csv_row())?;
    }
    Ok(())
}

/// Aligned table with losses to two decimals.
pub fn text_table(reports: &[RunReport]) -> String {
    let two = |x: Option<f64>| x.map_or_else(|| "NA".to_string(), |v| format!("{v:.2}"));
    let rows: Vec<[String; 5]> = reports
        .iter()
        .map(|r| {
            let e = r.evaluation.as_ref();
            [
                r.method.clone(),
                r.k.to_string(),
                two(e.map(|e| e.binder)),
                two(e.map(|e| e.vi_nats)),
                two(e.map(|e| e.vi_bits)),
            ]
        })
        .collect();
    let header = ["Method", "K", "Binder", "VI (nats)", "VI (bits)"];
    let mut widths = header.map(str::len);
    for row in &rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.len());
        }
    }
    let line = |cells: [&str; 5]| {
        let mut s = format!("{:<w$}", cells[0], w = widths[0]);
        for (cell, w) in cells[1..].iter().zip(&widths[1..]) {
            s.push_str(&format!("  {cell:>w$}"));
        }
        s.trim_end().to_string() + "\n"
    };
    let mut out = line(header);
    for row in &rows {
        out.push_str(&line([&row[0], &row[1], &row[2], &row[3], &row[4]]));
    }
    out
}
