// SPDX-License-Identifier: MIT OR Apache-2.0

//! CSV input and JSON output.

use std::fs::File;
use std::io::{self, Read, Write};
use std::path::Path;

use serde::Serialize;
use trendseg_core::postprocess::SegmentFit;
use trendseg_core::DetectionResult;

use crate::error::{Result, TrendsegError};

/// Which CSV column to read: a header name, or a 0-based index.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ColumnSelector {
    Index(usize),
    Name(String),
}

impl ColumnSelector {
    pub fn parse(s: &str) -> Self {
        match s.parse() {
            Ok(i) => ColumnSelector::Index(i),
            Err(_) => ColumnSelector::Name(s.to_string()),
        }
    }
}

impl Default for ColumnSelector {
    fn default() -> Self {
        ColumnSelector::Index(0)
    }
}

fn parse_error(err: csv::Error) -> TrendsegError {
    let line = err.position().map_or(0, |p| p.line());
    TrendsegError::Parse { line, message: err.to_string() }
}

/// Reads one numeric column. A header name wins over an index with the same
/// spelling. Empty or non-numeric cells are errors, never skipped.
pub fn read_column<R: Read>(input: R, column: &ColumnSelector, has_header: bool) -> Result<Vec<f64>> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(has_header).trim(csv::Trim::All).from_reader(input);
    let idx = if has_header {
        let headers = rdr.headers().map_err(parse_error)?.clone();
        let by_name = |name: &str| headers.iter().position(|h| h == name);
        match column {
            ColumnSelector::Name(n) => by_name(n).ok_or_else(|| TrendsegError::MissingColumn(n.clone()))?,
            ColumnSelector::Index(i) => by_name(&i.to_string()).unwrap_or(*i),
        }
    } else {
        match column {
            ColumnSelector::Index(i) => *i,
            ColumnSelector::Name(n) => return Err(TrendsegError::MissingColumn(n.clone())),
        }
    };
    let mut values = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(parse_error)?;
        let line = rec.position().map_or(0, |p| p.line());
        let cell = rec.get(idx).ok_or_else(|| TrendsegError::Parse {
            line,
            message: format!("row has {} fields, column {idx} requested", rec.len()),
        })?;
        let v = cell
            .parse::<f64>()
            .map_err(|_| TrendsegError::Parse { line, message: format!("{cell:?} is not a number") })?;
        values.push(v);
    }
    Ok(values)
}

/// [`read_column`] on a file, or stdin when `path` is `-`.
pub fn read_column_from(path: &Path, column: &ColumnSelector, has_header: bool) -> Result<Vec<f64>> {
    if path == Path::new("-") {
        return read_column(io::stdin().lock(), column, has_header);
    }
    let file = File::open(path).map_err(|source| TrendsegError::Io { path: path.to_path_buf(), source })?;
    read_column(io::BufReader::new(file), column, has_header)
}

#[derive(Clone, Debug, PartialEq, Serialize, serde::Deserialize)]
pub struct SegmentOut {
    pub start: usize,
    pub end: usize,
    pub intercept: f64,
    pub slope: f64,
    pub is_anomaly: bool,
}

impl From<&SegmentFit> for SegmentOut {
    fn from(s: &SegmentFit) -> Self {
        Self { start: s.start, end: s.end, intercept: s.intercept, slope: s.slope, is_anomaly: s.is_anomaly }
    }
}

/// The `detect` JSON document. Indices are 1-based.
#[derive(Clone, Debug, PartialEq, Serialize, serde::Deserialize)]
pub struct DetectionOutput {
    pub n_hat: usize,
    pub changepoints: Vec<usize>,
    pub sigma_hat: f64,
    pub lambda: f64,
    pub segments: Vec<SegmentOut>,
    pub fitted: Vec<f64>,
}

impl From<&DetectionResult> for DetectionOutput {
    fn from(r: &DetectionResult) -> Self {
        Self {
            n_hat: r.n_hat,
            changepoints: r.changepoints.clone(),
            sigma_hat: r.sigma_hat,
            lambda: r.lambda,
            segments: r.segments.iter().map(SegmentOut::from).collect(),
            fitted: r.fitted.to_vec(),
        }
    }
}

pub fn write_json<W: Write, T: Serialize>(mut out: W, value: &T) -> Result<()> {
    serde_json::to_writer_pretty(&mut out, value).map_err(|e| TrendsegError::Output(e.to_string()))?;
    writeln!(out).map_err(|e| TrendsegError::Output(e.to_string()))
}
