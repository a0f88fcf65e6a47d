//! k-means over the scalar embedding values.
//!
//! Two methods produce the same canonical output form (contiguous intervals
//! of the sorted values, labelled in ascending centroid order):
//!
//! * [`KMeansMethod::Exact`] solves the 1-D problem to optimality. Optimal
//!   1-D clusters are contiguous runs of the sorted values, so a dynamic
//!   program over split points finds the minimum within-cluster sum of
//!   squares. The row recurrence is solved by divide and conquer over the
//!   monotone split index, `O(k · u log u)` for `u` distinct values.
//! * [`KMeansMethod::Lloyd`] is a single seeded k-means++ start followed by
//!   Lloyd rounds.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KMeansMethod {
    #[default]
    Exact,
    Lloyd,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KMeansParams {
    pub k: usize,
    pub max_rounds: usize,
    pub seed: u64,
    /// Lloyd stops once every centroid moves less than this.
    pub tol: f64,
    pub method: KMeansMethod,
}

impl KMeansParams {
    pub fn new(k: usize, seed: u64) -> Self {
        Self {
            k,
            max_rounds: 100,
            seed,
            tol: 1e-12,
            method: KMeansMethod::Exact,
        }
    }

    pub fn with_method(mut self, method: KMeansMethod) -> Self {
        self.method = method;
        self
    }
}

/// Cluster id per point, ids in `0..k`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ClusterAssignment {
    labels: Vec<usize>,
    k: usize,
}

impl ClusterAssignment {
    pub fn new(labels: Vec<usize>, k: usize) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::EmptyDataSet);
        }
        if let Some(&bad) = labels.iter().find(|&&l| l >= k) {
            return Err(Error::InvalidParams(format!("cluster id {bad} out of range 0..{k}")));
        }
        Ok(Self { labels, k })
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Number of cluster ids actually used.
    pub fn distinct(&self) -> usize {
        let mut seen = vec![false; self.k];
        for &l in &self.labels {
            seen[l] = true;
        }
        seen.into_iter().filter(|&s| s).count()
    }
}

/// Within-cluster sum of squared deviations from each cluster mean.
pub fn within_cluster_ss(values: &[f64], labels: &[usize]) -> f64 {
    let k = labels.iter().max().map_or(0, |&m| m + 1);
    let mut sum = vec![0.0; k];
    let mut count = vec![0usize; k];
    for (&x, &l) in values.iter().zip(labels) {
        sum[l] += x;
        count[l] += 1;
    }
    let means: Vec<f64> = sum
        .iter()
        .zip(&count)
        .map(|(&s, &c)| if c > 0 { s / c as f64 } else { 0.0 })
        .collect();
    values
        .iter()
        .zip(labels)
        .map(|(&x, &l)| (x - means[l]).powi(2))
        .sum()
}

pub fn kmeans_1d(values: &[f64], params: &KMeansParams) -> Result<ClusterAssignment> {
    let n = values.len();
    if params.k < 2 {
        return Err(Error::InvalidParams("k must be at least 2".into()));
    }
    if params.k > n {
        return Err(Error::KTooLarge { k: params.k, n });
    }
    if params.max_rounds == 0 {
        return Err(Error::InvalidParams("max_rounds must be at least 1".into()));
    }
    if let Some(i) = values.iter().position(|x| !x.is_finite()) {
        return Err(Error::NonFiniteEntry(i, 0));
    }
    let labels = match params.method {
        KMeansMethod::Exact => exact(values, params.k),
        KMeansMethod::Lloyd => lloyd(values, params),
    };
    ClusterAssignment::new(labels, params.k)
}

/// Runs of equal values in ascending order.
struct Groups {
    /// Point indices sorted by value.
    order: Vec<usize>,
    /// `starts[g]..starts[g + 1]` indexes `order` for group `g`.
    starts: Vec<usize>,
    values: Vec<f64>,
}

fn group_sorted(values: &[f64]) -> Groups {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut starts = Vec::new();
    let mut distinct = Vec::new();
    for (pos, &i) in order.iter().enumerate() {
        if distinct.last() != Some(&values[i]) {
            starts.push(pos);
            distinct.push(values[i]);
        }
    }
    starts.push(order.len());
    Groups {
        order,
        starts,
        values: distinct,
    }
}

/// Prefix sums over groups of count, sum and sum of squares. Values are
/// centred on the global mean first, which keeps `Σx² − (Σx)²/w` well
/// conditioned for embeddings whose entries differ only in low digits.
struct Prefix {
    w: Vec<f64>,
    s: Vec<f64>,
    q: Vec<f64>,
}

impl Prefix {
    fn new(g: &Groups) -> Self {
        let u = g.values.len();
        let total: f64 = (0..u)
            .map(|i| g.values[i] * (g.starts[i + 1] - g.starts[i]) as f64)
            .sum();
        let mean = total / *g.starts.last().unwrap() as f64;
        let (mut w, mut s, mut q) = (vec![0.0; u + 1], vec![0.0; u + 1], vec![0.0; u + 1]);
        for i in 0..u {
            let c = (g.starts[i + 1] - g.starts[i]) as f64;
            let x = g.values[i] - mean;
            w[i + 1] = w[i] + c;
            s[i + 1] = s[i] + c * x;
            q[i + 1] = q[i] + c * x * x;
        }
        Self { w, s, q }
    }

    /// Cost of putting groups `i..j` in one cluster.
    #[inline]
    fn cost(&self, i: usize, j: usize) -> f64 {
        let w = self.w[j] - self.w[i];
        let s = self.s[j] - self.s[i];
        let q = self.q[j] - self.q[i];
        (q - s * s / w).max(0.0)
    }
}

fn exact(values: &[f64], k: usize) -> Vec<usize> {
    let g = group_sorted(values);
    let u = g.values.len();
    let k = k.min(u);
    let pre = Prefix::new(&g);

    // prev[j]: best cost of covering groups 0..j with the current number of clusters.
    let mut prev: Vec<f64> = (0..=u).map(|j| if j == 0 { 0.0 } else { pre.cost(0, j) }).collect();
    let mut splits: Vec<Vec<usize>> = Vec::with_capacity(k);
    splits.push(vec![0; u + 1]);
    for c in 2..=k {
        let mut cur = vec![f64::INFINITY; u + 1];
        let mut arg = vec![0; u + 1];
        // c clusters need at least c groups.
        solve_row(&pre, &prev, &mut cur, &mut arg, c, u, c - 1, u - 1);
        prev = cur;
        splits.push(arg);
    }

    // Walk split points back from the full range.
    let mut bounds = vec![u];
    let mut j = u;
    for c in (1..k).rev() {
        j = splits[c][j];
        bounds.push(j);
    }
    bounds.push(0);
    bounds.reverse();

    let mut labels = vec![0; values.len()];
    for c in 0..k {
        for grp in bounds[c]..bounds[c + 1] {
            for &i in &g.order[g.starts[grp]..g.starts[grp + 1]] {
                labels[i] = c;
            }
        }
    }
    labels
}

/// Fills `cur[j]` for `j in lo..=hi` given the optimal split for every such
/// `j` lies in `opt_lo..=opt_hi`. Ties go to the smallest split, which keeps
/// the leftmost argmin monotone in `j`.
#[allow(clippy::too_many_arguments)]
fn solve_row(
    pre: &Prefix,
    prev: &[f64],
    cur: &mut [f64],
    arg: &mut [usize],
    lo: usize,
    hi: usize,
    opt_lo: usize,
    opt_hi: usize,
) {
    if lo > hi {
        return;
    }
    let mid = (lo + hi) / 2;
    let mut best = f64::INFINITY;
    let mut best_i = opt_lo;
    for (i, &p) in prev.iter().enumerate().take(opt_hi.min(mid - 1) + 1).skip(opt_lo) {
        let cand = p + pre.cost(i, mid);
        if cand < best {
            best = cand;
            best_i = i;
        }
    }
    cur[mid] = best;
    arg[mid] = best_i;
    if mid > lo {
        solve_row(pre, prev, cur, arg, lo, mid - 1, opt_lo, best_i);
    }
    solve_row(pre, prev, cur, arg, mid + 1, hi, best_i, opt_hi);
}

fn nearest(x: f64, centroids: &[f64]) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (c, &m) in centroids.iter().enumerate() {
        let d = (x - m).abs();
        if d < best_d {
            best_d = d;
            best = c;
        }
    }
    best
}

fn kmeans_plus_plus(values: &[f64], k: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let n = values.len();
    let mut centroids = vec![values[rng.gen_range(0..n)]];
    let mut d2: Vec<f64> = values.iter().map(|&x| (x - centroids[0]).powi(2)).collect();
    while centroids.len() < k {
        let total: f64 = d2.iter().sum();
        let next = if total > 0.0 {
            let mut target = rng.gen::<f64>() * total;
            let mut pick = n - 1;
            for (i, &w) in d2.iter().enumerate() {
                if target < w {
                    pick = i;
                    break;
                }
                target -= w;
            }
            values[pick]
        } else {
            // every point coincides with a centroid already
            centroids[0]
        };
        centroids.push(next);
        for (d, &x) in d2.iter_mut().zip(values) {
            *d = d.min((x - next).powi(2));
        }
    }
    centroids
}

fn lloyd(values: &[f64], params: &KMeansParams) -> Vec<usize> {
    let k = params.k;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut centroids = kmeans_plus_plus(values, k, &mut rng);
    let mut labels = vec![0; values.len()];
    for _ in 0..params.max_rounds {
        for (l, &x) in labels.iter_mut().zip(values) {
            *l = nearest(x, &centroids);
        }
        let mut sum = vec![0.0; k];
        let mut count = vec![0usize; k];
        for (&x, &l) in values.iter().zip(&labels) {
            sum[l] += x;
            count[l] += 1;
        }
        let mut next: Vec<f64> = (0..k)
            .map(|c| if count[c] > 0 { sum[c] / count[c] as f64 } else { centroids[c] })
            .collect();
        // Empty clusters are reseeded to the point farthest from its own centroid.
        for c in 0..k {
            if count[c] > 0 {
                continue;
            }
            let far = values
                .iter()
                .zip(&labels)
                .map(|(&x, &l)| (x - next[l]).abs())
                .enumerate()
                .fold((0, 0.0), |acc, (i, d)| if d > acc.1 { (i, d) } else { acc });
            if far.1 > 0.0 {
                next[c] = values[far.0];
                labels[far.0] = c;
            }
        }
        let moved = centroids
            .iter()
            .zip(&next)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        centroids = next;
        if moved < params.tol {
            break;
        }
    }
    for (l, &x) in labels.iter_mut().zip(values) {
        *l = nearest(x, &centroids);
    }
    let labels = canonicalize(values, &labels, k);
    if is_contiguous(values, &labels) {
        labels
    } else {
        split_at_largest_gaps(values, labels.iter().max().map_or(1, |&m| m + 1))
    }
}

/// Relabels clusters by ascending centroid, dropping empty ids.
fn canonicalize(values: &[f64], labels: &[usize], k: usize) -> Vec<usize> {
    let mut sum = vec![0.0; k];
    let mut count = vec![0usize; k];
    for (&x, &l) in values.iter().zip(labels) {
        sum[l] += x;
        count[l] += 1;
    }
    let mut used: Vec<(f64, usize)> = (0..k)
        .filter(|&c| count[c] > 0)
        .map(|c| (sum[c] / count[c] as f64, c))
        .collect();
    used.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let mut map = vec![0; k];
    for (new, &(_, old)) in used.iter().enumerate() {
        map[old] = new;
    }
    labels.iter().map(|&l| map[l]).collect()
}

/// True when, in sorted value order, labels never decrease.
fn is_contiguous(values: &[f64], labels: &[usize]) -> bool {
    let g = group_sorted(values);
    let mut last = 0;
    for grp in 0..g.values.len() {
        let members = &g.order[g.starts[grp]..g.starts[grp + 1]];
        let l = labels[members[0]];
        if members.iter().any(|&i| labels[i] != l) || l < last {
            return false;
        }
        last = l;
    }
    true
}

/// Splits the sorted distinct values at the `k − 1` widest gaps.
fn split_at_largest_gaps(values: &[f64], k: usize) -> Vec<usize> {
    let g = group_sorted(values);
    let u = g.values.len();
    let mut gaps: Vec<(f64, usize)> = (1..u).map(|i| (g.values[i] - g.values[i - 1], i)).collect();
    gaps.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    let mut cuts: Vec<usize> = gaps.iter().take(k.saturating_sub(1)).map(|&(_, i)| i).collect();
    cuts.sort_unstable();
    let mut labels = vec![0; values.len()];
    let mut c = 0;
    for grp in 0..u {
        if c < cuts.len() && cuts[c] == grp {
            c += 1;
        }
        for &i in &g.order[g.starts[grp]..g.starts[grp + 1]] {
            labels[i] = c;
        }
    }
    labels
}
