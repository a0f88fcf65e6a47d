//! External cluster-validity indices computed from a contingency table:
//! the Hubert–Arabie Adjusted Rand Index and the pair-counting Jaccard index.
//!
//! Pair counts are exact integers (`u128`); each index is formed as one
//! integer ratio and converted to `f64` at the end.

use crate::error::{Error, Result};

/// `counts[i][j]` = points with true class `i` and predicted cluster `j`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContingencyTable {
    counts: Vec<Vec<u64>>,
    n: u64,
}

impl ContingencyTable {
    pub fn counts(&self) -> &[Vec<u64>] {
        &self.counts
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn row_sums(&self) -> Vec<u64> {
        self.counts.iter().map(|r| r.iter().sum()).collect()
    }

    pub fn col_sums(&self) -> Vec<u64> {
        let cols = self.counts.first().map_or(0, Vec::len);
        (0..cols)
            .map(|j| self.counts.iter().map(|r| r[j]).sum())
            .collect()
    }

    /// `(together in both, together in truth, together in prediction)`.
    pub fn pair_counts(&self) -> PairCounts {
        let both = self.counts.iter().flatten().map(|&c| choose2(c)).sum();
        let truth = self.row_sums().into_iter().map(choose2).sum();
        let pred = self.col_sums().into_iter().map(choose2).sum();
        PairCounts {
            both,
            truth,
            pred,
            total: choose2(self.n),
        }
    }
}

/// Pair tallies underlying both indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PairCounts {
    /// Pairs co-clustered in both partitions.
    pub both: u128,
    /// Pairs co-clustered in the ground truth.
    pub truth: u128,
    /// Pairs co-clustered in the prediction.
    pub pred: u128,
    pub total: u128,
}

fn choose2(x: u64) -> u128 {
    let x = x as u128;
    x * x.saturating_sub(1) / 2
}

pub fn contingency(truth: &[usize], pred: &[usize]) -> Result<ContingencyTable> {
    if truth.len() != pred.len() {
        return Err(Error::LengthMismatch(truth.len(), pred.len()));
    }
    let rows = truth.iter().max().map_or(0, |&m| m + 1);
    let cols = pred.iter().max().map_or(0, |&m| m + 1);
    let mut counts = vec![vec![0u64; cols]; rows];
    for (&t, &p) in truth.iter().zip(pred) {
        counts[t][p] += 1;
    }
    Ok(ContingencyTable {
        counts,
        n: truth.len() as u64,
    })
}

/// Adjusted Rand Index in `[-1, 1]`.
///
/// With `S = Σ C(n_ij,2)`, `a = Σ C(a_i,2)`, `b = Σ C(b_j,2)`, `N = C(n,2)`:
/// `ARI = (S − ab/N) / ((a+b)/2 − ab/N)`, evaluated here as
/// `2(SN − ab) / ((a+b)N − 2ab)`. The denominator vanishes only when both
/// partitions are a single cluster or both are all singletons; those are
/// identical partitions and score 1.
pub fn adjusted_rand_index(t: &ContingencyTable) -> Result<f64> {
    if t.n < 2 {
        return Err(Error::TooFewPoints(t.n as usize));
    }
    let pc = t.pair_counts();
    let (s, a, b, n) = (
        pc.both as i128,
        pc.truth as i128,
        pc.pred as i128,
        pc.total as i128,
    );
    let num = 2 * (s * n - a * b);
    let den = (a + b) * n - 2 * a * b;
    if den == 0 {
        return Ok(1.0);
    }
    Ok(num as f64 / den as f64)
}

/// Pair-counting Jaccard index `SS / (SS + SD + DS)` in `[0, 1]`. When no
/// pair is co-clustered in either partition (both all singletons) the
/// partitions are identical and the index is 1.
pub fn jaccard_index(t: &ContingencyTable) -> Result<f64> {
    if t.n < 2 {
        return Err(Error::TooFewPoints(t.n as usize));
    }
    let pc = t.pair_counts();
    let den = pc.truth + pc.pred - pc.both;
    if den == 0 {
        return Ok(1.0);
    }
    Ok(pc.both as f64 / den as f64)
}

/// Convenience: both indices straight from label vectors.
pub fn ari_and_jaccard(truth: &[usize], pred: &[usize]) -> Result<(f64, f64)> {
    let t = contingency(truth, pred)?;
    Ok((adjusted_rand_index(&t)?, jaccard_index(&t)?))
}
