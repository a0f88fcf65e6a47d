//! Serial construction of the affinity matrix `A`, its degree vector `D`
//! and the row-normalized matrix `W = D⁻¹A`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::{DataSet, DenseMatrix, DenseVector};

/// Pairwise similarity function.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SimilarityKind {
    /// `max(0, x·y / (‖x‖‖y‖))`.
    Cosine,
    /// `exp(-‖x − y‖² / (2σ²))`.
    GaussianRbf { sigma: f64 },
}

impl SimilarityKind {
    pub fn rbf(sigma: f64) -> Result<Self> {
        let s = Self::GaussianRbf { sigma };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Self::GaussianRbf { sigma } if !(sigma > 0.0 && sigma.is_finite()) => {
                Err(Error::InvalidSigma)
            }
            _ => Ok(()),
        }
    }
}

impl std::fmt::Display for SimilarityKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Cosine => f.write_str("cosine"),
            Self::GaussianRbf { sigma } => write!(f, "rbf(sigma={sigma})"),
        }
    }
}

/// Similarity of two points of equal dimension.
pub fn similarity(x: &[f64], y: &[f64], s: SimilarityKind) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            got: y.len(),
        });
    }
    s.validate()?;
    if matches!(s, SimilarityKind::Cosine) {
        if norm2(x) == 0.0 {
            return Err(Error::ZeroVector(0));
        }
        if norm2(y) == 0.0 {
            return Err(Error::ZeroVector(1));
        }
    }
    Ok(pair_similarity(x, y, s))
}

fn norm2(x: &[f64]) -> f64 {
    x.iter().map(|a| a * a).sum::<f64>().sqrt()
}

/// Unchecked similarity. Operand order never changes the result: products
/// commute and every sum runs in index order.
#[inline]
pub(crate) fn pair_similarity(x: &[f64], y: &[f64], s: SimilarityKind) -> f64 {
    match s {
        SimilarityKind::Cosine => {
            let dot: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
            let sq = |v: &[f64]| v.iter().map(|a| a * a).sum::<f64>();
            (dot / (sq(x) * sq(y)).sqrt()).clamp(0.0, 1.0)
        }
        SimilarityKind::GaussianRbf { sigma } => {
            let sq: f64 = x
                .iter()
                .zip(y)
                .map(|(a, b)| (a - b) * (a - b))
                .sum();
            (-sq / (2.0 * sigma * sigma)).exp()
        }
    }
}

/// Fails with the first point that makes `s` undefined.
pub(crate) fn check_points(d: &DataSet, s: SimilarityKind) -> Result<()> {
    s.validate()?;
    if matches!(s, SimilarityKind::Cosine) {
        if let Some(i) = (0..d.n()).find(|&i| norm2(d.point(i)) == 0.0) {
            return Err(Error::ZeroVector(i));
        }
    }
    Ok(())
}

/// Fills one row of `A` (diagonal forced to zero).
#[inline]
pub(crate) fn fill_affinity_row(d: &DataSet, s: SimilarityKind, i: usize, out: &mut [f64]) {
    let xi = d.point(i);
    for (j, slot) in out.iter_mut().enumerate() {
        *slot = if i == j {
            0.0
        } else {
            pair_similarity(xi, d.point(j), s)
        };
    }
}

/// Dense symmetric nonnegative similarity matrix with zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct AffinityMatrix(DenseMatrix);

impl AffinityMatrix {
    /// Wraps a matrix after checking squareness, symmetry (1e-12),
    /// nonnegativity and the zero diagonal.
    pub fn new(a: DenseMatrix) -> Result<Self> {
        let n = a.rows();
        if a.cols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: a.cols(),
            });
        }
        for i in 0..n {
            if a.get(i, i) != 0.0 {
                return Err(Error::InvalidParams(format!("A[{i}][{i}] must be 0")));
            }
            for j in 0..n {
                let x = a.get(i, j);
                if x < 0.0 {
                    return Err(Error::InvalidParams(format!("A[{i}][{j}] is negative")));
                }
                if (x - a.get(j, i)).abs() > 1e-12 {
                    return Err(Error::InvalidParams(format!("A is not symmetric at ({i},{j})")));
                }
            }
        }
        Ok(Self(a))
    }

    pub(crate) fn from_raw(a: DenseMatrix) -> Self {
        Self(a)
    }

    pub fn n(&self) -> usize {
        self.0.rows()
    }

    pub fn matrix(&self) -> &DenseMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> DenseMatrix {
        self.0
    }
}

/// Row sums of `A`, all strictly positive.
#[derive(Debug, Clone, PartialEq)]
pub struct DegreeVector(DenseVector);

impl DegreeVector {
    pub fn new(d: DenseVector) -> Result<Self> {
        if let Some(i) = d.as_slice().iter().position(|&x| x <= 0.0) {
            return Err(Error::ZeroDegree(i));
        }
        Ok(Self(d))
    }

    pub fn as_slice(&self) -> &[f64] {
        self.0.as_slice()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// `W = D⁻¹A`: nonnegative, every row sums to one.
#[derive(Debug, Clone, PartialEq)]
pub struct RowStochasticMatrix(DenseMatrix);

impl RowStochasticMatrix {
    /// Checks entries in `[0, 1]` and row sums within 1e-9 of one.
    pub fn new(w: DenseMatrix) -> Result<Self> {
        let n = w.rows();
        if w.cols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: w.cols(),
            });
        }
        for i in 0..n {
            let row = w.row(i);
            if row.iter().any(|&x| !(0.0..=1.0).contains(&x)) {
                return Err(Error::InvalidParams(format!("W row {i} has entries outside [0,1]")));
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > 1e-9 {
                return Err(Error::InvalidParams(format!("W row {i} sums to {sum}")));
            }
        }
        Ok(Self(w))
    }

    pub(crate) fn from_raw(w: DenseMatrix) -> Self {
        Self(w)
    }

    pub fn n(&self) -> usize {
        self.0.rows()
    }

    pub fn matrix(&self) -> &DenseMatrix {
        &self.0
    }
}

/// Builds `A[i][j] = similarity(p_i, p_j)` with a zero diagonal.
pub fn build_affinity(d: &DataSet, s: SimilarityKind) -> Result<AffinityMatrix> {
    check_points(d, s)?;
    let n = d.n();
    let mut a = DenseMatrix::zeros(n, n);
    for (i, row) in a.as_mut_slice().chunks_mut(n).enumerate() {
        fill_affinity_row(d, s, i, row);
    }
    Ok(AffinityMatrix(a))
}

#[inline]
pub(crate) fn row_sum(row: &[f64]) -> f64 {
    row.iter().sum()
}

/// `d[i] = Σ_j A[i][j]`, summed in index order.
pub fn degree(a: &AffinityMatrix) -> Result<DegreeVector> {
    let d: Vec<f64> = (0..a.n()).map(|i| row_sum(a.0.row(i))).collect();
    DegreeVector::new(DenseVector::from_raw(d))
}

/// `W = D⁻¹A`.
pub fn normalize(a: &AffinityMatrix, d: &DegreeVector) -> Result<RowStochasticMatrix> {
    normalize_owned(a.clone(), d)
}

/// Same as [`normalize`] but reuses the affinity buffer.
pub fn normalize_owned(a: AffinityMatrix, d: &DegreeVector) -> Result<RowStochasticMatrix> {
    let n = a.n();
    if d.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: d.len(),
        });
    }
    if let Some(i) = d.as_slice().iter().position(|&x| x <= 0.0) {
        return Err(Error::ZeroDegree(i));
    }
    let mut w = a.0;
    for (row, &di) in w.as_mut_slice().chunks_mut(n.max(1)).zip(d.as_slice()) {
        normalize_row(row, di);
    }
    Ok(RowStochasticMatrix(w))
}

#[inline]
pub(crate) fn normalize_row(row: &mut [f64], degree: f64) {
    for x in row {
        *x /= degree;
    }
}
