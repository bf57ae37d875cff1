//! Delimited-text ingestion and the log-ratio / detrend / rescale pipeline
//! for positive-valued measurement series.

use std::io::Read;
use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::MultiAttributeSeries;

/// Header labels plus rows of optional values (`None` = missing).
#[derive(Debug, Clone, PartialEq)]
pub struct RawTable {
    pub labels: Vec<String>,
    pub rows: Vec<Vec<Option<f64>>>,
}

impl RawTable {
    pub fn columns(&self) -> usize {
        self.labels.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Layout {
    /// `n1a1, n1a2, .., n2a1, ..`: already in channel order.
    #[default]
    NodeMajor,
    /// `a1n1, a1n2, .., a2n1, ..`.
    AttributeMajor,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MissingPolicy {
    #[default]
    Reject,
    /// Repeat the previous row's value. A missing first row is still an error.
    ForwardFill,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LoadOptions {
    pub layout: Layout,
    pub delimiter: u8,
    pub missing: MissingPolicy,
}

impl Default for LoadOptions {
    fn default() -> Self {
        Self { layout: Layout::NodeMajor, delimiter: b',', missing: MissingPolicy::Reject }
    }
}

fn is_missing(cell: &str) -> bool {
    let t = cell.trim();
    t.is_empty() || t.eq_ignore_ascii_case("na")
}

/// Reads a headed delimited table. Empty cells and `NA` become `None`.
pub fn read_table<R: Read>(reader: R, delimiter: u8) -> Result<RawTable> {
    let mut rdr = csv::ReaderBuilder::new().delimiter(delimiter).has_headers(true).from_reader(reader);
    let labels: Vec<String> = rdr.headers()?.iter().map(|s| s.trim().to_string()).collect();
    for (i, l) in labels.iter().enumerate() {
        if labels[..i].contains(l) {
            return Err(Error::Parse { row: 0, message: format!("duplicate column label {l:?}") });
        }
    }
    let mut rows = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let row_no = i + 1;
        let record = record.map_err(|e| Error::Parse { row: row_no, message: e.to_string() })?;
        if record.len() != labels.len() {
            return Err(Error::Parse {
                row: row_no,
                message: format!("expected {} fields, found {}", labels.len(), record.len()),
            });
        }
        let row = record
            .iter()
            .zip(&labels)
            .map(|(cell, label)| {
                if is_missing(cell) {
                    Ok(None)
                } else {
                    cell.trim().parse::<f64>().map(Some).map_err(|_| Error::Parse {
                        row: row_no,
                        message: format!("column {label}: cannot parse {cell:?}"),
                    })
                }
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    Ok(RawTable { labels, rows })
}

/// Column of the input holding (node, attribute).
fn source_column(layout: Layout, nodes: usize, attributes: usize, node: usize, attribute: usize) -> usize {
    match layout {
        Layout::NodeMajor => node * attributes + attribute,
        Layout::AttributeMajor => attribute * nodes + node,
    }
}

/// Converts a table into a series in channel order (node-major).
pub fn table_to_series(
    table: &RawTable,
    nodes: usize,
    attributes: usize,
    options: &LoadOptions,
) -> Result<MultiAttributeSeries> {
    let dim = nodes * attributes;
    if table.columns() != dim {
        return Err(Error::InvalidInput(format!(
            "table has {} columns, expected m * p = {attributes} * {nodes} = {dim}",
            table.columns()
        )));
    }
    let n = table.rows.len();
    let mut data = DMatrix::zeros(n, dim);
    for node in 0..nodes {
        for attribute in 0..attributes {
            let src = source_column(options.layout, nodes, attributes, node, attribute);
            let dst = node * attributes + attribute;
            let mut last: Option<f64> = None;
            for (t, row) in table.rows.iter().enumerate() {
                let value = match (row[src], options.missing) {
                    (Some(v), _) => v,
                    (None, MissingPolicy::ForwardFill) if last.is_some() => last.unwrap(),
                    (None, _) => {
                        return Err(Error::MissingValue { row: t + 1, column: table.labels[src].clone() });
                    }
                };
                last = Some(value);
                data[(t, dst)] = value;
            }
        }
    }
    MultiAttributeSeries::new(data, nodes, attributes)
}

/// Reads `path` and returns its `nodes * attributes` columns in channel order.
pub fn load_series<P: AsRef<Path>>(
    path: P,
    nodes: usize,
    attributes: usize,
    options: &LoadOptions,
) -> Result<MultiAttributeSeries> {
    let file = std::fs::File::open(path)?;
    let table = read_table(file, options.delimiter)?;
    table_to_series(&table, nodes, attributes, options)
}

/// Writes a series with `n{j}a{u}` headers, one row per time step.
pub fn write_series<W: std::io::Write>(series: &MultiAttributeSeries, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let header: Vec<String> = (0..series.nodes())
        .flat_map(|j| (0..series.attributes()).map(move |u| format!("n{}a{}", j + 1, u + 1)))
        .collect();
    w.write_record(&header)?;
    let data = series.data();
    for t in 0..series.len() {
        w.write_record(data.row(t).iter().map(|x| format!("{x:e}")))?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PreprocessOptions {
    /// Shift added to channels with nonpositive values, as a fraction of the
    /// channel maximum.
    pub shift_fraction: f64,
    /// A detrended channel whose RMS is below this fraction of the raw
    /// log-ratio RMS is treated as identically zero.
    pub zero_tolerance: f64,
}

impl Default for PreprocessOptions {
    fn default() -> Self {
        Self { shift_fraction: 1e-6, zero_tolerance: 1e-10 }
    }
}

/// Least-squares `(intercept, slope)` of `y` against `t = 0, 1, ..`.
pub fn linear_fit(y: &[f64]) -> (f64, f64) {
    let n = y.len() as f64;
    if y.len() < 2 {
        return (y.first().copied().unwrap_or(0.0), 0.0);
    }
    let t_mean = (n - 1.0) / 2.0;
    let y_mean = y.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    for (t, &v) in y.iter().enumerate() {
        let dt = t as f64 - t_mean;
        sxy += dt * (v - y_mean);
        sxx += dt * dt;
    }
    let slope = sxy / sxx;
    (y_mean - slope * t_mean, slope)
}

fn process_channel(x: &[f64], channel: usize, options: &PreprocessOptions) -> Result<Vec<f64>> {
    let mut x = x.to_vec();
    if x.iter().any(|&v| v <= 0.0) {
        let delta = options.shift_fraction * x.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        x.iter_mut().for_each(|v| *v += delta);
        if x.iter().any(|&v| v.is_nan() || v <= 0.0) {
            return Err(Error::InvalidInput(format!(
                "channel {channel} has nonpositive values after a shift of {delta:e}"
            )));
        }
    }
    let ratio: Vec<f64> = x.windows(2).map(|w| (w[1] / w[0]).ln()).collect();
    let (a, b) = linear_fit(&ratio);
    let mut y: Vec<f64> = ratio.iter().enumerate().map(|(t, v)| v - a - b * t as f64).collect();

    let rms = |v: &[f64]| (v.iter().map(|z| z * z).sum::<f64>() / v.len() as f64).sqrt();
    let raw = rms(&ratio);
    let after = rms(&y);
    if after == 0.0 || after <= options.zero_tolerance * raw {
        log::warn!("channel {channel} is zero after detrending; left unscaled");
        y.iter_mut().for_each(|v| *v = 0.0);
    } else {
        y.iter_mut().for_each(|v| *v /= after);
    }
    Ok(y)
}

/// Per channel: positive shift if needed, `ln(x(t) / x(t-1))`, removal of
/// the least-squares line, scaling to unit mean square. The output is one
/// sample shorter.
pub fn preprocess(series: &MultiAttributeSeries, options: &PreprocessOptions) -> Result<MultiAttributeSeries> {
    let n = series.len();
    if n < 3 {
        return Err(Error::InvalidInput(format!("need at least 3 samples, got {n}")));
    }
    let data = series.data();
    let mut out = DMatrix::zeros(n - 1, series.channels());
    for c in 0..series.channels() {
        let col: Vec<f64> = data.column(c).iter().copied().collect();
        let y = process_channel(&col, c, options)?;
        out.column_mut(c).copy_from_slice(&y);
    }
    MultiAttributeSeries::new(out, series.nodes(), series.attributes())
}
