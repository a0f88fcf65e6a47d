//! Independent oracles and random inputs shared by the integration tests.
//! Nothing here calls into the code paths it is used to check.

#![allow(dead_code, clippy::needless_range_loop)]

use gpic::datasets::{generate, GeneratorKind, GeneratorSpec};
use gpic::{DataSet, DenseMatrix, RowStochasticMatrix, SimilarityKind};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random points with coordinates in `[0.1, 1.1)` (never a zero vector).
pub fn random_points(rng: &mut ChaCha8Rng, n: usize, m: usize) -> DataSet {
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..m).map(|_| 0.1 + rng.gen::<f64>()).collect())
        .collect();
    DataSet::from_rows("random", &rows, None).unwrap()
}

/// A generated, labelled data set of random kind with its natural
/// similarity and class count.
pub fn random_clustering_case(rng: &mut ChaCha8Rng, max_n: usize) -> (DataSet, SimilarityKind, usize) {
    let kinds = [
        GeneratorKind::TwoMoons,
        GeneratorKind::ThreeCircles,
        GeneratorKind::Cassine,
        GeneratorKind::GaussianBlobs { components: 2 },
        GeneratorKind::GaussianBlobs { components: 3 },
        GeneratorKind::GaussianBlobs { components: 4 },
        GeneratorKind::Shapes,
        GeneratorKind::Smiley,
    ];
    let kind = kinds[rng.gen_range(0..kinds.len())];
    let n = rng.gen_range(12..=max_n);
    let d = generate(&GeneratorSpec::new(kind, n, rng.gen())).unwrap();
    let sim = if rng.gen_bool(0.25) {
        SimilarityKind::Cosine
    } else {
        SimilarityKind::GaussianRbf {
            sigma: rng.gen_range(0.3..1.5),
        }
    };
    (d, sim, kind.class_count())
}

/// Plain double loop over pairs, written out from the similarity formulas.
pub fn brute_affinity(d: &DataSet, s: SimilarityKind) -> Vec<Vec<f64>> {
    let n = d.n();
    let mut a = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let (x, y) = (d.point(i), d.point(j));
            a[i][j] = match s {
                SimilarityKind::Cosine => {
                    let mut dot = 0.0;
                    let mut nx = 0.0;
                    let mut ny = 0.0;
                    for k in 0..x.len() {
                        dot += x[k] * y[k];
                        nx += x[k] * x[k];
                        ny += y[k] * y[k];
                    }
                    f64::max(0.0, dot / (nx.sqrt() * ny.sqrt()))
                }
                SimilarityKind::GaussianRbf { sigma } => {
                    let mut sq = 0.0;
                    for k in 0..x.len() {
                        sq += (x[k] - y[k]).powi(2);
                    }
                    (-sq / (2.0 * sigma * sigma)).exp()
                }
            };
        }
    }
    a
}

/// Neumaier-compensated sum.
pub fn compensated_sum(xs: &[f64]) -> f64 {
    let mut sum = 0.0;
    let mut c = 0.0;
    for &x in xs {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            c += (sum - t) + x;
        } else {
            c += (x - t) + sum;
        }
        sum = t;
    }
    sum + c
}

/// Random dense row-stochastic matrix with strictly positive entries.
pub fn random_row_stochastic(rng: &mut ChaCha8Rng, n: usize) -> RowStochasticMatrix {
    let power = rng.gen_range(1.0..4.0);
    let mut data = Vec::with_capacity(n * n);
    for _ in 0..n {
        let row: Vec<f64> = (0..n).map(|_| 1e-3 + rng.gen::<f64>().powf(power)).collect();
        let s: f64 = row.iter().sum();
        data.extend(row.iter().map(|x| x / s));
    }
    RowStochasticMatrix::new(DenseMatrix::new(n, n, data).unwrap()).unwrap()
}

/// Dominant right eigenvector of a dense matrix: the eigenvalue of largest
/// modulus from a Schur-based eigen-solve, then the null vector of
/// `M − λI` from an SVD.
pub fn dominant_right_eigenvector(m: &DenseMatrix) -> (f64, Vec<f64>) {
    let n = m.rows();
    let mat = DMatrix::from_row_slice(n, n, m.as_slice());
    let eig = mat.clone().complex_eigenvalues();
    let lambda = eig
        .iter()
        .max_by(|a, b| a.norm().total_cmp(&b.norm()))
        .copied()
        .unwrap();
    assert!(lambda.im.abs() < 1e-9, "dominant eigenvalue is not real: {lambda}");
    let shifted = mat - DMatrix::identity(n, n) * lambda.re;
    let svd = shifted.svd(false, true);
    let v_t = svd.v_t.unwrap();
    let idx = svd
        .singular_values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .unwrap()
        .0;
    (lambda.re, v_t.row(idx).iter().copied().collect())
}

/// All eigenvalues of a symmetric matrix, ascending.
pub fn symmetric_eigenvalues(m: &DenseMatrix) -> Vec<f64> {
    let n = m.rows();
    let mat = DMatrix::from_row_slice(n, n, m.as_slice());
    let mut ev: Vec<f64> = mat.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

pub fn abs_cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    (dot / (na * nb)).abs()
}

pub fn wcss_of_groups(groups: &[&[f64]]) -> f64 {
    groups
        .iter()
        .map(|g| {
            let mu = g.iter().sum::<f64>() / g.len() as f64;
            g.iter().map(|x| (x - mu).powi(2)).sum::<f64>()
        })
        .sum()
}

/// Optimal 1-D k-means cost by trying every way to cut the sorted values
/// into `k` nonempty contiguous runs.
pub fn exhaustive_1d_kmeans(values: &[f64], k: usize) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let mut best = f64::INFINITY;
    let mut cuts: Vec<usize> = (1..k).collect();
    loop {
        let mut bounds = vec![0];
        bounds.extend(&cuts);
        bounds.push(n);
        let groups: Vec<&[f64]> = bounds.windows(2).map(|w| &sorted[w[0]..w[1]]).collect();
        best = best.min(wcss_of_groups(&groups));
        // next combination of k-1 cut positions from 1..n
        let mut i = k - 1;
        loop {
            if i == 0 {
                return best;
            }
            i -= 1;
            if cuts[i] < n - (k - 1 - i) {
                cuts[i] += 1;
                for j in i + 1..k - 1 {
                    cuts[j] = cuts[j - 1] + 1;
                }
                break;
            }
        }
        if k == 1 {
            return best;
        }
    }
}

/// Pair tallies by enumerating every unordered pair:
/// (together in both, only in a, only in b, in neither).
pub fn brute_pairs(a: &[usize], b: &[usize]) -> (u64, u64, u64, u64) {
    let (mut ss, mut sd, mut ds, mut dd) = (0, 0, 0, 0);
    for i in 0..a.len() {
        for j in i + 1..a.len() {
            match (a[i] == a[j], b[i] == b[j]) {
                (true, true) => ss += 1,
                (true, false) => sd += 1,
                (false, true) => ds += 1,
                (false, false) => dd += 1,
            }
        }
    }
    (ss, sd, ds, dd)
}

/// ARI from the pair-confusion counts.
pub fn brute_ari(a: &[usize], b: &[usize]) -> f64 {
    let (ss, sd, ds, dd) = brute_pairs(a, b);
    let (ss, sd, ds, dd) = (ss as i128, sd as i128, ds as i128, dd as i128);
    let num = 2 * (ss * dd - sd * ds);
    let den = (ss + sd) * (sd + dd) + (ss + ds) * (ds + dd);
    if den == 0 {
        1.0
    } else {
        num as f64 / den as f64
    }
}

pub fn brute_jaccard(a: &[usize], b: &[usize]) -> f64 {
    let (ss, sd, ds, _) = brute_pairs(a, b);
    if ss + sd + ds == 0 {
        1.0
    } else {
        ss as f64 / (ss + sd + ds) as f64
    }
}

/// Every partition of `n` points into at most `max_blocks` blocks, as
/// restricted growth strings.
pub fn partitions(n: usize, max_blocks: usize) -> Vec<Vec<usize>> {
    fn rec(cur: &mut Vec<usize>, n: usize, max_blocks: usize, out: &mut Vec<Vec<usize>>) {
        if cur.len() == n {
            out.push(cur.clone());
            return;
        }
        let next_new = cur.iter().max().map_or(0, |&m| m + 1);
        for b in 0..=next_new.min(max_blocks - 1) {
            cur.push(b);
            rec(cur, n, max_blocks, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::with_capacity(n), n, max_blocks, &mut out);
    out
}

/// Six points in two far-apart, non-congruent triangles.
pub fn two_triangles() -> (DataSet, Vec<usize>) {
    let rows = vec![
        vec![0.0, 0.0],
        vec![0.5, 0.0],
        vec![0.0, 0.5],
        vec![40.0, 40.0],
        vec![41.0, 40.0],
        vec![40.0, 41.5],
    ];
    let labels = vec![0, 0, 0, 1, 1, 1];
    (DataSet::from_rows("triangles", &rows, Some(labels.clone())).unwrap(), labels)
}

pub fn linf(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}
