//! Data-parallel kernel pipeline.
//!
//! Six kernels, each fanning out over at most `p` workers and joining before
//! it returns:
//!
//! | kernel        | work                         | cost            |
//! |---------------|------------------------------|-----------------|
//! | `affinity`    | rows of `A`, in row chunks   | `O(n²/p)`       |
//! | `rowsum`      | `D = A·1`                    | `O(n²/p)`       |
//! | `normalize`   | `W = D⁻¹A`                   | `O(n²/p)`       |
//! | `reduce`      | `Σ v` by binary tree         | `O(n/p + log n)`|
//! | `norm`        | `v / τ`                      | `O(n/p)`        |
//! | `multiply`    | `Wv`                         | `O(n²/p)`       |
//!
//! Every output element is produced by exactly one worker with a fixed
//! accumulation order, so results do not depend on `p`. The reduction tree
//! pads to a power of two and halves its stride each round, making its
//! rounding a function of the length alone.

use std::ops::Range;
use std::thread;

use crate::affinity::{
    self, AffinityMatrix, DegreeVector, RowStochasticMatrix, SimilarityKind,
};
use crate::error::{Error, Result};
use crate::kmeans::kmeans_1d;
use crate::pic::{
    dot, linf_distance, EmbeddingVector, InitialVector, PhaseClock, PhaseTimings, PicParams,
    PicResult, StopMonitor,
};
use crate::types::{DataSet, DenseMatrix, DenseVector};

/// Worker count, row-chunk height and the memory cap for one chunk buffer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KernelConfig {
    pub workers: usize,
    pub chunk_rows: usize,
    pub memory_budget_bytes: usize,
}

impl KernelConfig {
    /// `workers` threads, whole-matrix chunks, unlimited budget.
    pub fn new(workers: usize) -> Self {
        Self {
            workers,
            chunk_rows: usize::MAX,
            memory_budget_bytes: usize::MAX,
        }
    }

    pub fn with_chunk_rows(mut self, chunk_rows: usize) -> Self {
        self.chunk_rows = chunk_rows;
        self
    }

    pub fn with_memory_budget(mut self, bytes: usize) -> Self {
        self.memory_budget_bytes = bytes;
        self
    }

    /// Largest chunk height that fits `budget` for an `n`-column matrix.
    pub fn chunk_rows_for_budget(n: usize, budget: usize) -> usize {
        (budget / (n.max(1) * std::mem::size_of::<f64>())).max(1)
    }

    /// Checks the config against an `n`-row problem.
    pub fn validate(&self, n: usize) -> Result<()> {
        if self.workers == 0 {
            return Err(Error::InvalidKernelConfig("worker count must be at least 1".into()));
        }
        if self.chunk_rows == 0 {
            return Err(Error::InvalidKernelConfig("chunk_rows must be at least 1".into()));
        }
        let chunk_bytes = self
            .effective_chunk_rows(n)
            .saturating_mul(n)
            .saturating_mul(std::mem::size_of::<f64>());
        if chunk_bytes > self.memory_budget_bytes {
            return Err(Error::InvalidKernelConfig(format!(
                "chunk of {} rows needs {chunk_bytes} bytes, budget is {}",
                self.effective_chunk_rows(n),
                self.memory_budget_bytes
            )));
        }
        Ok(())
    }

    pub fn effective_chunk_rows(&self, n: usize) -> usize {
        self.chunk_rows.min(n.max(1))
    }
}

impl Default for KernelConfig {
    fn default() -> Self {
        let workers = thread::available_parallelism().map_or(1, usize::from);
        Self::new(workers)
    }
}

/// Contiguous half-open row ranges, one per worker, covering `0..n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartitionPlan {
    ranges: Vec<Range<usize>>,
}

impl PartitionPlan {
    /// Ranges of `⌈n/p⌉` rows; the last may be short and trailing empty
    /// ranges are dropped, so there are at most `p`.
    pub fn new(n: usize, workers: usize) -> Self {
        let workers = workers.max(1);
        let step = n.div_ceil(workers).max(1);
        let ranges = (0..n)
            .step_by(step)
            .map(|start| start..(start + step).min(n))
            .collect();
        Self { ranges }
    }

    pub fn ranges(&self) -> &[Range<usize>] {
        &self.ranges
    }

    pub fn len(&self) -> usize {
        self.ranges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ranges.is_empty()
    }
}

/// Splits `out` (rows of `row_len` elements) along `plan` and runs `f` on
/// each piece, one scoped thread per range. `f` receives the first row
/// index of its piece.
fn fan_out<F>(out: &mut [f64], row_len: usize, plan: &PartitionPlan, f: F)
where
    F: Fn(usize, &mut [f64]) + Sync,
{
    if plan.len() <= 1 {
        if let Some(r) = plan.ranges().first() {
            f(r.start, out);
        }
        return;
    }
    thread::scope(|scope| {
        let mut rest = out;
        let mut pieces = Vec::with_capacity(plan.len());
        for r in plan.ranges() {
            let (head, tail) = rest.split_at_mut(r.len() * row_len);
            pieces.push((r.start, head));
            rest = tail;
        }
        let mut pieces = pieces.into_iter();
        let first = pieces.next();
        let f = &f;
        for (start, piece) in pieces {
            scope.spawn(move || f(start, piece));
        }
        // the calling thread takes the first range
        if let Some((start, piece)) = first {
            f(start, piece);
        }
    });
}

/// The six kernels of the pipeline. A GPU or other backend slots in by
/// implementing this trait; [`gpic_cluster_with`] is generic over it.
pub trait KernelBackend {
    fn affinity(&self, d: &DataSet, s: SimilarityKind) -> Result<AffinityMatrix>;
    fn rowsum(&self, a: &AffinityMatrix) -> Result<DegreeVector>;
    /// Consumes `A` so its buffer can become `W`.
    fn normalize(&self, a: AffinityMatrix, d: &DegreeVector) -> Result<RowStochasticMatrix>;
    fn reduce(&self, v: &[f64]) -> Result<f64>;
    fn norm(&self, v: &[f64], tau: f64) -> Result<Vec<f64>>;
    fn multiply(&self, w: &RowStochasticMatrix, v: &[f64]) -> Result<Vec<f64>>;
}

/// Shared-memory backend running on `config.workers` OS threads.
#[derive(Debug, Clone, Copy)]
pub struct CpuKernels {
    pub config: KernelConfig,
}

impl CpuKernels {
    pub fn new(config: KernelConfig) -> Self {
        Self { config }
    }

    fn plan(&self, n: usize) -> PartitionPlan {
        PartitionPlan::new(n, self.config.workers)
    }
}

/// Rounds whose active half is shorter than this stay on one thread.
const REDUCE_PARALLEL_MIN: usize = 1 << 14;

impl KernelBackend for CpuKernels {
    fn affinity(&self, d: &DataSet, s: SimilarityKind) -> Result<AffinityMatrix> {
        affinity::check_points(d, s)?;
        let n = d.n();
        self.config.validate(n)?;
        let chunk = self.config.effective_chunk_rows(n);
        let mut a = DenseMatrix::zeros(n, n);
        if chunk >= n {
            fan_out(a.as_mut_slice(), n, &self.plan(n), |first, rows| {
                for (off, row) in rows.chunks_mut(n).enumerate() {
                    affinity::fill_affinity_row(d, s, first + off, row);
                }
            });
        } else {
            // Row blocks are built in a bounded staging buffer, then copied
            // into place one block at a time.
            let mut staging = vec![0.0; chunk * n];
            for block_start in (0..n).step_by(chunk) {
                let rows_here = chunk.min(n - block_start);
                let buf = &mut staging[..rows_here * n];
                fan_out(buf, n, &self.plan(rows_here), |first, rows| {
                    for (off, row) in rows.chunks_mut(n).enumerate() {
                        affinity::fill_affinity_row(d, s, block_start + first + off, row);
                    }
                });
                a.as_mut_slice()[block_start * n..(block_start + rows_here) * n]
                    .copy_from_slice(buf);
            }
        }
        Ok(AffinityMatrix::from_raw(a))
    }

    fn rowsum(&self, a: &AffinityMatrix) -> Result<DegreeVector> {
        let n = a.n();
        let m = a.matrix();
        let mut d = vec![0.0; n];
        fan_out(&mut d, 1, &self.plan(n), |first, out| {
            for (off, slot) in out.iter_mut().enumerate() {
                *slot = affinity::row_sum(m.row(first + off));
            }
        });
        DegreeVector::new(DenseVector::from_raw(d))
    }

    fn normalize(&self, a: AffinityMatrix, d: &DegreeVector) -> Result<RowStochasticMatrix> {
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
        let mut w = a.into_matrix();
        let deg = d.as_slice();
        fan_out(w.as_mut_slice(), n, &self.plan(n), |first, rows| {
            for (off, row) in rows.chunks_mut(n).enumerate() {
                affinity::normalize_row(row, deg[first + off]);
            }
        });
        Ok(RowStochasticMatrix::from_raw(w))
    }

    fn reduce(&self, v: &[f64]) -> Result<f64> {
        if v.is_empty() {
            return Err(Error::EmptyVector);
        }
        let mut buf = v.to_vec();
        buf.resize(v.len().next_power_of_two(), 0.0);
        let mut stride = buf.len() / 2;
        while stride > 0 {
            let (lo, hi) = buf.split_at_mut(stride);
            let hi = &hi[..stride];
            if stride >= REDUCE_PARALLEL_MIN && self.config.workers > 1 {
                fan_out(lo, 1, &self.plan(stride), |first, out| {
                    for (off, x) in out.iter_mut().enumerate() {
                        *x += hi[first + off];
                    }
                });
            } else {
                for (x, y) in lo.iter_mut().zip(hi) {
                    *x += y;
                }
            }
            stride /= 2;
        }
        Ok(buf[0])
    }

    fn norm(&self, v: &[f64], tau: f64) -> Result<Vec<f64>> {
        if !(tau > 0.0 && tau.is_finite()) {
            return Err(Error::NonPositiveTau(tau));
        }
        let mut out = v.to_vec();
        fan_out(&mut out, 1, &self.plan(v.len()), |_, piece| {
            for x in piece {
                *x /= tau;
            }
        });
        Ok(out)
    }

    fn multiply(&self, w: &RowStochasticMatrix, v: &[f64]) -> Result<Vec<f64>> {
        let n = w.n();
        if v.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: v.len(),
            });
        }
        let m = w.matrix();
        let mut out = vec![0.0; n];
        fan_out(&mut out, 1, &self.plan(n), |first, piece| {
            for (off, y) in piece.iter_mut().enumerate() {
                *y = dot(m.row(first + off), v);
            }
        });
        Ok(out)
    }
}

pub fn k_affinity(d: &DataSet, s: SimilarityKind, c: &KernelConfig) -> Result<AffinityMatrix> {
    c.validate(d.n())?;
    CpuKernels::new(*c).affinity(d, s)
}

pub fn k_rowsum(a: &AffinityMatrix, c: &KernelConfig) -> Result<DegreeVector> {
    c.validate(a.n())?;
    CpuKernels::new(*c).rowsum(a)
}

pub fn k_normalize(
    a: &AffinityMatrix,
    d: &DegreeVector,
    c: &KernelConfig,
) -> Result<RowStochasticMatrix> {
    c.validate(a.n())?;
    CpuKernels::new(*c).normalize(a.clone(), d)
}

pub fn k_reduce(v: &DenseVector, c: &KernelConfig) -> Result<f64> {
    c.validate(v.len())?;
    CpuKernels::new(*c).reduce(v.as_slice())
}

/// `v / τ`. Fails with `InvalidInitialVector` if the result is not a valid
/// embedding (negative entries or a normalizer that is not `Σv`).
pub fn k_norm(v: &DenseVector, tau: f64, c: &KernelConfig) -> Result<EmbeddingVector> {
    c.validate(v.len())?;
    let out = CpuKernels::new(*c).norm(v.as_slice(), tau)?;
    EmbeddingVector::new(DenseVector::from_raw(out))
}

pub fn k_multiply(
    w: &RowStochasticMatrix,
    v: &EmbeddingVector,
    c: &KernelConfig,
) -> Result<DenseVector> {
    c.validate(w.n())?;
    CpuKernels::new(*c)
        .multiply(w, v.as_slice())
        .map(DenseVector::from_raw)
}

/// Full pipeline on the CPU backend.
pub fn gpic_cluster(
    d: &DataSet,
    s: SimilarityKind,
    params: &PicParams,
    config: &KernelConfig,
) -> Result<PicResult> {
    config.validate(d.n())?;
    gpic_cluster_with(&CpuKernels::new(*config), d, s, params)
}

/// Full pipeline on any backend.
pub fn gpic_cluster_with<B: KernelBackend>(
    backend: &B,
    d: &DataSet,
    s: SimilarityKind,
    params: &PicParams,
) -> Result<PicResult> {
    let n = d.n();
    params.validate(n)?;
    let mut clock = PhaseClock::start();
    let mut timings = PhaseTimings::default();

    let a = backend.affinity(d, s)?;
    timings.affinity = clock.lap();
    let deg = backend.rowsum(&a)?;
    timings.rowsum = clock.lap();
    let w = backend.normalize(a, &deg)?;
    timings.normalize = clock.lap();

    let mut v = match &params.v0 {
        InitialVector::Degree => {
            let total = backend.reduce(deg.as_slice())?;
            backend.norm(deg.as_slice(), total)?
        }
        other => crate::pic::initial_vector(&deg, other)?.into_vec(),
    };
    let mut monitor = StopMonitor::new(params.epsilon_for(n), params.early_stop);
    for _ in 0..params.max_iterations {
        let y = backend.multiply(&w, &v)?;
        let tau = backend.reduce(&y)?;
        let next = backend.norm(&y, tau)?;
        let delta = linf_distance(&next, &v);
        v = next;
        if monitor.record(delta) {
            break;
        }
    }
    let trace = monitor.finish();
    timings.iterate = clock.lap();
    drop(w);

    let assignment = kmeans_1d(&v, &params.kmeans_params())?;
    timings.kmeans = clock.lap();
    timings.total = clock.total();
    Ok(PicResult {
        assignment,
        embedding: EmbeddingVector::from_raw(v),
        trace,
        timings,
    })
}
