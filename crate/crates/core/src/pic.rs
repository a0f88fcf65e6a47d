//! Serial reference pipeline: truncated power iteration on `W` followed by
//! 1-D k-means on the resulting embedding.
//!
//! Each step computes `v ← Wv / ‖Wv‖₁`. The velocity of an iterate is
//! `δ_t = ‖v_t − v_{t−1}‖∞` and iteration stops once the acceleration
//! `|δ_{t+1} − δ_t|` drops to `ε` or below. The first step only produces a
//! velocity, so the stop test first runs after the second step.
//!
//! This path is single-threaded on purpose: it is the oracle the parallel
//! kernel pipeline is checked against.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::affinity::{self, DegreeVector, RowStochasticMatrix, SimilarityKind};
use crate::error::{Error, Result};
use crate::kmeans::{kmeans_1d, ClusterAssignment, KMeansMethod, KMeansParams};
use crate::types::{DataSet, DenseVector};

/// Per-point convergence threshold; the effective `ε` is this over `n`.
pub const DEFAULT_EPSILON_SCALE: f64 = 1e-5;
pub const DEFAULT_MAX_ITERATIONS: usize = 50;
/// Iteration cap used by the timing benchmarks.
pub const BENCHMARK_MAX_ITERATIONS: usize = 3;

/// Choice of starting vector `v_0`.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum InitialVector {
    /// `D / ΣD`.
    #[default]
    Degree,
    /// `1/n` everywhere.
    Uniform,
    Explicit(DenseVector),
}

#[derive(Debug, Clone, PartialEq)]
pub struct PicParams {
    pub k: usize,
    /// `None` selects `1e-5 / n`.
    pub epsilon: Option<f64>,
    pub max_iterations: usize,
    pub v0: InitialVector,
    /// Seed for the final k-means step.
    pub seed: u64,
    pub kmeans: KMeansMethod,
    /// When false, always runs `max_iterations` steps.
    pub early_stop: bool,
}

impl PicParams {
    pub fn new(k: usize) -> Self {
        Self {
            k,
            epsilon: None,
            max_iterations: DEFAULT_MAX_ITERATIONS,
            v0: InitialVector::Degree,
            seed: 0,
            kmeans: KMeansMethod::Exact,
            early_stop: true,
        }
    }

    /// Three iterations, as used for the runtime comparison tables.
    pub fn benchmark_preset(k: usize) -> Self {
        Self {
            max_iterations: BENCHMARK_MAX_ITERATIONS,
            ..Self::new(k)
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_max_iterations(mut self, max_iterations: usize) -> Self {
        self.max_iterations = max_iterations;
        self
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Self {
        self.epsilon = Some(epsilon);
        self
    }

    pub fn with_v0(mut self, v0: InitialVector) -> Self {
        self.v0 = v0;
        self
    }

    pub fn without_early_stop(mut self) -> Self {
        self.early_stop = false;
        self
    }

    pub fn epsilon_for(&self, n: usize) -> f64 {
        self.epsilon
            .unwrap_or(DEFAULT_EPSILON_SCALE / n.max(1) as f64)
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        if self.k < 2 {
            return Err(Error::InvalidParams("k must be at least 2".into()));
        }
        if self.k > n {
            return Err(Error::KTooLarge { k: self.k, n });
        }
        let eps = self.epsilon_for(n);
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(Error::InvalidParams(format!("epsilon must be positive, got {eps}")));
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidParams("max_iterations must be at least 1".into()));
        }
        if let InitialVector::Explicit(v) = &self.v0 {
            check_explicit(v, n)?;
        }
        Ok(())
    }

    pub(crate) fn kmeans_params(&self) -> KMeansParams {
        KMeansParams::new(self.k, self.seed).with_method(self.kmeans)
    }
}

fn check_explicit(v: &DenseVector, n: usize) -> Result<()> {
    if v.len() != n {
        return Err(Error::InvalidInitialVector(format!("length {} != {n}", v.len())));
    }
    if v.as_slice().iter().any(|&x| x < 0.0) {
        return Err(Error::InvalidInitialVector("negative entry".into()));
    }
    let l1: f64 = v.as_slice().iter().sum();
    if (l1 - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidInitialVector(format!("L1 norm {l1} != 1")));
    }
    Ok(())
}

/// Nonnegative vector with unit L1 norm: the 1-D spectral embedding.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingVector(DenseVector);

impl EmbeddingVector {
    pub fn new(v: DenseVector) -> Result<Self> {
        if v.as_slice().iter().any(|&x| x < 0.0) {
            return Err(Error::InvalidInitialVector("negative entry".into()));
        }
        let l1: f64 = v.as_slice().iter().sum();
        if (l1 - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidInitialVector(format!("L1 norm {l1} != 1")));
        }
        Ok(Self(v))
    }

    pub(crate) fn from_raw(v: Vec<f64>) -> Self {
        Self(DenseVector::from_raw(v))
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

    pub fn into_vec(self) -> Vec<f64> {
        self.0.into_vec()
    }
}

/// What the iteration did.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PicTrace {
    pub iterations_run: usize,
    /// Velocity `δ_t` after every step; one entry per iteration.
    pub delta_history: Vec<f64>,
    pub converged: bool,
    pub epsilon: f64,
}

impl PicTrace {
    /// `|δ_t − δ_{t−1}|` for the last step, if two velocities exist.
    pub fn last_acceleration(&self) -> Option<f64> {
        match self.delta_history.as_slice() {
            [.., a, b] => Some((b - a).abs()),
            _ => None,
        }
    }
}

/// Shared stop rule for both backends.
pub(crate) struct StopMonitor {
    epsilon: f64,
    early_stop: bool,
    trace: PicTrace,
}

impl StopMonitor {
    pub(crate) fn new(epsilon: f64, early_stop: bool) -> Self {
        Self {
            epsilon,
            early_stop,
            trace: PicTrace {
                iterations_run: 0,
                delta_history: Vec::new(),
                converged: false,
                epsilon,
            },
        }
    }

    /// Records one step's velocity and reports whether to stop.
    pub(crate) fn record(&mut self, delta: f64) -> bool {
        self.trace.iterations_run += 1;
        self.trace.delta_history.push(delta);
        let stop = self.early_stop
            && self
                .trace
                .last_acceleration()
                .is_some_and(|acc| acc <= self.epsilon);
        if stop {
            self.trace.converged = true;
        }
        stop
    }

    pub(crate) fn finish(self) -> PicTrace {
        self.trace
    }
}

pub(crate) fn linf_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

pub(crate) fn dot(row: &[f64], v: &[f64]) -> f64 {
    row.iter().zip(v).map(|(a, b)| a * b).sum()
}

pub fn initial_vector(d: &DegreeVector, choice: &InitialVector) -> Result<EmbeddingVector> {
    let n = d.len();
    if let Some(i) = d.as_slice().iter().position(|&x| x <= 0.0) {
        return Err(Error::ZeroDegree(i));
    }
    match choice {
        InitialVector::Degree => {
            let total: f64 = d.as_slice().iter().sum();
            Ok(EmbeddingVector::from_raw(
                d.as_slice().iter().map(|x| x / total).collect(),
            ))
        }
        InitialVector::Uniform => Ok(EmbeddingVector::from_raw(vec![1.0 / n as f64; n])),
        InitialVector::Explicit(v) => {
            check_explicit(v, n)?;
            Ok(EmbeddingVector(v.clone()))
        }
    }
}

/// Runs the truncated power iteration from `v0`.
pub fn power_iterate(
    w: &RowStochasticMatrix,
    v0: &EmbeddingVector,
    params: &PicParams,
) -> Result<(EmbeddingVector, PicTrace)> {
    let n = w.n();
    if v0.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: v0.len(),
        });
    }
    params.validate(n)?;
    let w = w.matrix();
    let mut monitor = StopMonitor::new(params.epsilon_for(n), params.early_stop);
    let mut v = v0.as_slice().to_vec();
    let mut next = vec![0.0; n];
    for _ in 0..params.max_iterations {
        for (i, y) in next.iter_mut().enumerate() {
            *y = dot(w.row(i), &v);
        }
        let l1: f64 = next.iter().map(|y| y.abs()).sum();
        if l1.is_nan() || l1 <= 0.0 {
            return Err(Error::NonPositiveTau(l1));
        }
        for y in next.iter_mut() {
            *y /= l1;
        }
        let delta = linf_distance(&next, &v);
        std::mem::swap(&mut v, &mut next);
        if monitor.record(delta) {
            break;
        }
    }
    Ok((EmbeddingVector::from_raw(v), monitor.finish()))
}

/// Wall-clock seconds spent in each pipeline phase.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct PhaseTimings {
    pub affinity: f64,
    pub rowsum: f64,
    pub normalize: f64,
    pub iterate: f64,
    pub kmeans: f64,
    pub total: f64,
}

impl PhaseTimings {
    pub fn components_sum(&self) -> f64 {
        self.affinity + self.rowsum + self.normalize + self.iterate + self.kmeans
    }

    pub fn affinity_share(&self) -> f64 {
        if self.total > 0.0 {
            self.affinity / self.total
        } else {
            0.0
        }
    }
}

pub(crate) struct PhaseClock {
    start: Instant,
    mark: Instant,
}

impl PhaseClock {
    pub(crate) fn start() -> Self {
        let now = Instant::now();
        Self { start: now, mark: now }
    }

    /// Seconds since the previous lap.
    pub(crate) fn lap(&mut self) -> f64 {
        let now = Instant::now();
        let s = (now - self.mark).as_secs_f64();
        self.mark = now;
        s
    }

    pub(crate) fn total(&self) -> f64 {
        self.start.elapsed().as_secs_f64()
    }
}

/// Output of a full clustering run, from either backend.
#[derive(Debug, Clone, PartialEq)]
pub struct PicResult {
    pub assignment: ClusterAssignment,
    pub embedding: EmbeddingVector,
    pub trace: PicTrace,
    pub timings: PhaseTimings,
}

/// Affinity → degree → normalize → power iteration → 1-D k-means.
pub fn pic_cluster(d: &DataSet, s: SimilarityKind, params: &PicParams) -> Result<PicResult> {
    params.validate(d.n())?;
    let mut clock = PhaseClock::start();
    let mut timings = PhaseTimings::default();

    let a = affinity::build_affinity(d, s)?;
    timings.affinity = clock.lap();
    let deg = affinity::degree(&a)?;
    timings.rowsum = clock.lap();
    let w = affinity::normalize_owned(a, &deg)?;
    timings.normalize = clock.lap();
    let v0 = initial_vector(&deg, &params.v0)?;
    let (embedding, trace) = power_iterate(&w, &v0, params)?;
    timings.iterate = clock.lap();
    drop(w);
    let assignment = kmeans_1d(embedding.as_slice(), &params.kmeans_params())?;
    timings.kmeans = clock.lap();
    timings.total = clock.total();

    Ok(PicResult {
        assignment,
        embedding,
        trace,
        timings,
    })
}
