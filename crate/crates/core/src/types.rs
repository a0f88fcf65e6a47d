//! Dense value types shared by every stage of the pipeline, plus the CSV
//! interchange format for data sets.
//!
//! Everything is row-major `f64`. Constructors validate; once built, values
//! are immutable and can be shared freely between worker threads.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

/// Row-major dense matrix of finite reals.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::ShapeMismatch {
                rows,
                cols,
                len: data.len(),
            });
        }
        if let Some(pos) = data.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFiniteEntry(pos / cols, pos % cols));
        }
        Ok(Self { rows, cols, data })
    }

    /// Builds a matrix from nested rows, failing on ragged input.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != cols {
                return Err(Error::RaggedRows(i + 1));
            }
            data.extend_from_slice(row);
        }
        Self::new(rows.len(), cols, data)
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    /// Skips validation. Callers guarantee shape and finiteness.
    pub(crate) fn from_raw(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), rows * cols);
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.cols + col]
    }

    pub fn row(&self, row: usize) -> &[f64] {
        &self.data[row * self.cols..(row + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub(crate) fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    /// Approximate heap footprint, used by the benchmark report.
    pub fn size_bytes(&self) -> usize {
        self.data.len() * std::mem::size_of::<f64>()
    }
}

/// Dense vector of finite reals.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseVector(Vec<f64>);

impl DenseVector {
    pub fn new(data: Vec<f64>) -> Result<Self> {
        if let Some(pos) = data.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFiniteEntry(pos, 0));
        }
        Ok(Self(data))
    }

    pub(crate) fn from_raw(data: Vec<f64>) -> Self {
        Self(data)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn l1_norm(&self) -> f64 {
        self.0.iter().map(|x| x.abs()).sum()
    }
}

impl std::ops::Index<usize> for DenseVector {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

/// `n` points in `m`-dimensional feature space, optionally labelled with
/// ground-truth class ids `0..class_count`.
#[derive(Debug, Clone, PartialEq)]
pub struct DataSet {
    pub name: String,
    points: DenseMatrix,
    labels: Option<Vec<usize>>,
}

impl DataSet {
    pub fn new(
        name: impl Into<String>,
        points: DenseMatrix,
        labels: Option<Vec<usize>>,
    ) -> Result<Self> {
        validate_dataset(Self {
            name: name.into(),
            points,
            labels,
        })
    }

    pub fn from_rows(
        name: impl Into<String>,
        rows: &[Vec<f64>],
        labels: Option<Vec<usize>>,
    ) -> Result<Self> {
        Self::new(name, DenseMatrix::from_rows(rows)?, labels)
    }

    /// Number of points.
    pub fn n(&self) -> usize {
        self.points.rows()
    }

    /// Feature dimension.
    pub fn m(&self) -> usize {
        self.points.cols()
    }

    pub fn points(&self) -> &DenseMatrix {
        &self.points
    }

    pub fn point(&self, i: usize) -> &[f64] {
        self.points.row(i)
    }

    pub fn labels(&self) -> Option<&[usize]> {
        self.labels.as_deref()
    }

    /// Number of distinct ground-truth classes, zero when unlabelled.
    pub fn class_count(&self) -> usize {
        self.labels
            .as_ref()
            .and_then(|l| l.iter().max())
            .map_or(0, |&max| max + 1)
    }

    /// Returns a new data set made of the given rows, in order.
    pub fn select(&self, indices: &[usize]) -> Result<Self> {
        let m = self.m();
        let mut data = Vec::with_capacity(indices.len() * m);
        for &i in indices {
            data.extend_from_slice(self.point(i));
        }
        let labels = self
            .labels
            .as_ref()
            .map(|l| indices.iter().map(|&i| l[i]).collect());
        let points = DenseMatrix::from_raw(indices.len(), m, data);
        Self::new(self.name.clone(), points, labels)
    }
}

/// Checks every data set invariant and hands the value back unchanged.
pub fn validate_dataset(d: DataSet) -> Result<DataSet> {
    let (n, m) = (d.points.rows(), d.points.cols());
    if n == 0 || m == 0 {
        return Err(Error::EmptyDataSet);
    }
    if d.points.data.len() != n * m {
        return Err(Error::ShapeMismatch {
            rows: n,
            cols: m,
            len: d.points.data.len(),
        });
    }
    if let Some(pos) = d.points.data.iter().position(|x| !x.is_finite()) {
        return Err(Error::NonFiniteEntry(pos / m, pos % m));
    }
    if let Some(labels) = &d.labels {
        if labels.len() != n {
            return Err(Error::LabelLengthMismatch {
                points: n,
                labels: labels.len(),
            });
        }
        let classes = labels.iter().max().map_or(0, |&x| x + 1);
        let mut seen = vec![false; classes];
        for &l in labels {
            seen[l] = true;
        }
        if seen.iter().any(|s| !s) {
            return Err(Error::NonContiguousLabels);
        }
    }
    Ok(d)
}

/// Parses CSV text. With `has_labels` the last column is an integer class id;
/// with `header` the first line is skipped. Line numbers in errors are
/// 1-based positions in `text`.
pub fn parse_csv(text: &str, has_labels: bool, header: bool) -> Result<DataSet> {
    let mut data = Vec::new();
    let mut labels = Vec::new();
    let mut width = None;
    let mut n = 0;
    for (idx, line) in text.split('\n').enumerate() {
        let lineno = idx + 1;
        if header && idx == 0 {
            continue;
        }
        let line = line.strip_suffix('\r').unwrap_or(line);
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        match width {
            None => width = Some(fields.len()),
            Some(w) if w != fields.len() => return Err(Error::RaggedRows(lineno)),
            _ => {}
        }
        let feature_count = if has_labels {
            if fields.len() < 2 {
                return Err(Error::ParseError(lineno));
            }
            fields.len() - 1
        } else {
            fields.len()
        };
        for (j, f) in fields[..feature_count].iter().enumerate() {
            let x: f64 = f.parse().map_err(|_| Error::ParseError(lineno))?;
            if !x.is_finite() {
                return Err(Error::NonFiniteEntry(n, j));
            }
            data.push(x);
        }
        if has_labels {
            let l: usize = fields[feature_count]
                .parse()
                .map_err(|_| Error::ParseError(lineno))?;
            labels.push(l);
        }
        n += 1;
    }
    let m = width.map_or(0, |w| if has_labels { w - 1 } else { w });
    let points = DenseMatrix::new(n, m, data)?;
    DataSet::new("csv", points, has_labels.then_some(labels))
}

pub fn load_csv(path: impl AsRef<Path>, has_labels: bool, header: bool) -> Result<DataSet> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    let mut d = parse_csv(&text, has_labels, header)?;
    if let Some(stem) = path.file_stem() {
        d.name = stem.to_string_lossy().into_owned();
    }
    Ok(d)
}

/// Formats a float with 17 significant digits, enough for a bit-exact
/// round trip through `str::parse`.
pub fn format_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Renders a data set as CSV; labels (if any) become the last column.
pub fn to_csv(d: &DataSet) -> String {
    let mut out = String::new();
    for i in 0..d.n() {
        for (j, x) in d.point(i).iter().enumerate() {
            if j > 0 {
                out.push(',');
            }
            out.push_str(&format_f64(*x));
        }
        if let Some(labels) = d.labels() {
            let _ = write!(out, ",{}", labels[i]);
        }
        out.push('\n');
    }
    out
}

pub fn write_csv(path: impl AsRef<Path>, d: &DataSet) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, to_csv(d)).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}
