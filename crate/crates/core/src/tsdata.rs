//! Time-series container, CSV ingestion and the usual pre-processing.

use std::fs::File;
use std::io::Read;
use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// `K` series observed over `N` time steps, stored as a `K x N` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    values: DMatrix<f64>,
    labels: Option<Vec<String>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Orientation {
    RowsAreSeries,
    ColumnsAreSeries,
}

impl TimeSeries {
    pub fn new(values: DMatrix<f64>, labels: Option<Vec<String>>) -> Result<Self> {
        let (k, n) = values.shape();
        if k < 1 {
            return Err(Error::Shape("need at least one series".into()));
        }
        if n < 2 {
            return Err(Error::Shape(format!("need at least two time steps, got {n}")));
        }
        for j in 0..n {
            for i in 0..k {
                if !values[(i, j)].is_finite() {
                    return Err(Error::NonFinite { row: i + 1, col: j + 1 });
                }
            }
        }
        if let Some(l) = &labels {
            if l.len() != k {
                return Err(Error::Shape(format!("{} labels for {k} series", l.len())));
            }
        }
        Ok(Self { values, labels })
    }

    /// Number of series.
    pub fn k(&self) -> usize {
        self.values.nrows()
    }

    /// Number of time steps.
    pub fn n(&self) -> usize {
        self.values.ncols()
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn into_values(self) -> DMatrix<f64> {
        self.values
    }

    /// Columns `start..end` as a new series, labels preserved.
    pub fn slice_time(&self, start: usize, end: usize) -> Result<Self> {
        if start >= end || end > self.n() {
            return Err(Error::InvalidArgument(format!(
                "time range {start}..{end} outside 0..{}",
                self.n()
            )));
        }
        let values = self.values.columns(start, end - start).into_owned();
        Self::new(values, self.labels.clone())
    }
}

/// Reads a numeric CSV file into a [`TimeSeries`].
///
/// A first column whose cells are all non-numeric is taken as series labels
/// with `RowsAreSeries` and dropped as time stamps with `ColumnsAreSeries`.
/// With `ColumnsAreSeries`, the header row (when present) supplies the labels.
pub fn load_csv(path: impl AsRef<Path>, orientation: Orientation, has_header: bool) -> Result<TimeSeries> {
    let path = path.as_ref();
    let mut text = String::new();
    File::open(path)
        .and_then(|mut f| f.read_to_string(&mut text))
        .map_err(|source| Error::Io { path: path.to_path_buf(), source })?;
    parse_csv(&text, orientation, has_header)
}

pub fn parse_csv(text: &str, orientation: Orientation, has_header: bool) -> Result<TimeSeries> {
    let rows = read_records(text)?;
    let (header, body) = match (has_header, rows.split_first()) {
        (true, Some((h, rest))) => (Some(h), rest),
        _ => (None, &rows[..]),
    };
    if body.is_empty() {
        return Err(Error::Shape("no data rows".into()));
    }

    // series labels for rows, time stamps for columns
    let label_column = body.iter().all(|r| r.cells.first().is_some_and(|c| c.parse::<f64>().is_err()));
    let skip = usize::from(label_column);

    let width = body[0].cells.len();
    let mut numbers = Vec::with_capacity(body.len());
    for rec in body {
        if rec.cells.len() != width {
            return Err(Error::Ragged { row: rec.line, expected: width, found: rec.cells.len() });
        }
        let mut row = Vec::with_capacity(width - skip);
        for (c, cell) in rec.cells.iter().enumerate().skip(skip) {
            let v = parse_cell(cell, rec.line, c + 1)?;
            row.push(v);
        }
        numbers.push(row);
    }

    let nrows = numbers.len();
    let ncols = width - skip;
    if ncols == 0 {
        return Err(Error::Shape("no numeric columns".into()));
    }
    let m = DMatrix::from_fn(nrows, ncols, |i, j| numbers[i][j]);
    match orientation {
        Orientation::RowsAreSeries => {
            let labels = label_column.then(|| body.iter().map(|r| r.cells[0].clone()).collect());
            TimeSeries::new(m, labels)
        }
        Orientation::ColumnsAreSeries => {
            let labels = match header {
                Some(h) if h.cells.len() == ncols => Some(h.cells.clone()),
                Some(h) if label_column && h.cells.len() == width => Some(h.cells[1..].to_vec()),
                Some(h) => {
                    return Err(Error::Ragged { row: h.line, expected: ncols, found: h.cells.len() });
                }
                None => None,
            };
            TimeSeries::new(m.transpose(), labels)
        }
    }
}

/// Reads a plain numeric matrix (no header, rows are matrix rows).
pub fn load_matrix_csv(path: impl AsRef<Path>) -> Result<DMatrix<f64>> {
    let path = path.as_ref();
    let mut text = String::new();
    File::open(path)
        .and_then(|mut f| f.read_to_string(&mut text))
        .map_err(|source| Error::Io { path: path.to_path_buf(), source })?;
    parse_matrix_csv(&text)
}

pub fn parse_matrix_csv(text: &str) -> Result<DMatrix<f64>> {
    let rows = read_records(text)?;
    let Some(first) = rows.first() else {
        return Err(Error::Shape("empty matrix file".into()));
    };
    let width = first.cells.len();
    let mut data = Vec::with_capacity(rows.len() * width);
    for rec in &rows {
        if rec.cells.len() != width {
            return Err(Error::Ragged { row: rec.line, expected: width, found: rec.cells.len() });
        }
        for (c, cell) in rec.cells.iter().enumerate() {
            data.push(parse_cell(cell, rec.line, c + 1)?);
        }
    }
    Ok(DMatrix::from_row_slice(rows.len(), width, &data))
}

struct Record {
    line: usize,
    cells: Vec<String>,
}

fn read_records(text: &str) -> Result<Vec<Record>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut out = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            Error::Parse { row: line, col: 0, text: e.to_string() }
        })?;
        if rec.len() == 1 && rec[0].is_empty() {
            continue;
        }
        let line = rec.position().map_or(out.len() + 1, |p| p.line() as usize);
        out.push(Record { line, cells: rec.iter().map(str::to_owned).collect() });
    }
    Ok(out)
}

fn parse_cell(cell: &str, row: usize, col: usize) -> Result<f64> {
    // Empty cells are missing values; those are refused rather than imputed.
    let v: f64 = cell.parse().map_err(|_| Error::Parse { row, col, text: cell.to_owned() })?;
    if !v.is_finite() {
        return Err(Error::NonFinite { row, col });
    }
    Ok(v)
}

/// Seventeen significant digits, enough to round-trip any `f64`.
pub fn format_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        format!("{x}")
    }
}

/// Plain numeric CSV, one matrix row per line, readable by [`parse_matrix_csv`].
pub fn matrix_to_csv(m: &DMatrix<f64>) -> String {
    let mut out = String::new();
    for row in m.row_iter() {
        let cells: Vec<String> = row.iter().map(|&v| format_f64(v)).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

/// Subtracts each series' full-sample mean.
pub fn demean(ts: &TimeSeries) -> TimeSeries {
    let mut values = ts.values.clone();
    for mut row in values.row_iter_mut() {
        let (lo, hi) = row.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
        if lo == hi {
            // constant rows center to exact zeros; sum/N may not reproduce c exactly
            row.fill(0.0);
            continue;
        }
        let mean = row.mean();
        row.add_scalar_mut(-mean);
    }
    TimeSeries { values, labels: ts.labels.clone() }
}

/// `log P(n+1) - log P(n)` for every series; one fewer column than the input.
pub fn log_returns(prices: &TimeSeries) -> Result<TimeSeries> {
    let (k, n) = prices.values.shape();
    for j in 0..n {
        for i in 0..k {
            let v = prices.values[(i, j)];
            if v <= 0.0 {
                return Err(Error::NonPositivePrice { series: i, time: j, value: v });
            }
        }
    }
    let logs = prices.values.map(f64::ln);
    let returns = DMatrix::from_fn(k, n - 1, |i, j| logs[(i, j + 1)] - logs[(i, j)]);
    TimeSeries::new(returns, prices.labels.clone())
}
