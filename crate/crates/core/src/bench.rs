//! Benchmark harness: repeated timed runs, phase profiles, speedup against
//! a baseline configuration and the subsampling quality experiment.
//!
//! Reports serialize to a versioned JSON schema ([`REPORT_SCHEMA`]). Every
//! repetition's phase timings are kept so statistics can be recomputed
//! later; timings come from the monotonic clock.

use serde::{Deserialize, Serialize};

use crate::affinity::SimilarityKind;
use crate::datasets::{subsample_balanced, SubsampleSpec};
use crate::error::{Error, Result};
use crate::kernels::{gpic_cluster, KernelConfig};
use crate::kmeans::KMeansMethod;
use crate::pic::{pic_cluster, InitialVector, PhaseTimings, PicParams, PicResult};
use crate::types::DataSet;
use crate::validation::ari_and_jaccard;

pub const REPORT_SCHEMA: u32 = 1;

/// Subsampling fractions: 0.01%–0.09% and 0.1%–0.9%, eighteen in all.
pub fn default_fractions() -> Vec<f64> {
    let low = (1..=9).map(|i| i as f64 * 1e-4);
    let high = (1..=9).map(|i| i as f64 * 1e-3);
    low.chain(high).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Backend {
    Serial,
    Parallel,
}

impl std::fmt::Display for Backend {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Backend::Serial => "serial",
            Backend::Parallel => "parallel",
        })
    }
}

/// Everything needed to cluster one data set.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub backend: Backend,
    pub kernel: KernelConfig,
    pub similarity: SimilarityKind,
    pub params: PicParams,
}

impl RunConfig {
    /// Worker count as reported; the serial backend always uses one.
    pub fn workers(&self) -> usize {
        match self.backend {
            Backend::Serial => 1,
            Backend::Parallel => self.kernel.workers,
        }
    }

    pub fn label(&self) -> String {
        format!("{}-p{}", self.backend, self.workers())
    }

    pub fn run(&self, d: &DataSet) -> Result<PicResult> {
        match self.backend {
            Backend::Serial => pic_cluster(d, self.similarity, &self.params),
            Backend::Parallel => gpic_cluster(d, self.similarity, &self.params, &self.kernel),
        }
    }
}

/// Echo of the clustering parameters in a report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamsEcho {
    pub k: usize,
    pub epsilon: f64,
    pub max_iterations: usize,
    pub v0: String,
    pub seed: u64,
    pub kmeans: KMeansMethod,
    pub chunk_rows: usize,
}

impl ParamsEcho {
    fn new(cfg: &RunConfig, n: usize) -> Self {
        let p = &cfg.params;
        Self {
            k: p.k,
            epsilon: p.epsilon_for(n),
            max_iterations: p.max_iterations,
            v0: match p.v0 {
                InitialVector::Degree => "degree",
                InitialVector::Uniform => "uniform",
                InitialVector::Explicit(_) => "explicit",
            }
            .into(),
            seed: p.seed,
            kmeans: p.kmeans,
            chunk_rows: cfg.kernel.effective_chunk_rows(n),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineEcho {
    pub name: String,
    pub mean_seconds: f64,
    pub repetitions: Vec<PhaseTimings>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub schema: u32,
    pub dataset: String,
    pub n: usize,
    pub m: usize,
    pub backend: Backend,
    pub p: usize,
    pub similarity: SimilarityKind,
    pub params: ParamsEcho,
    /// Phase timings of every repetition.
    pub repetitions: Vec<PhaseTimings>,
    pub mean_phases: PhaseTimings,
    pub mean_seconds: f64,
    pub stddev_seconds: f64,
    /// Fraction of the mean total spent building the affinity matrix.
    pub affinity_share: f64,
    pub affinity_bytes: usize,
    pub iterations_run: usize,
    pub converged: bool,
    pub ari: Option<f64>,
    pub jaccard: Option<f64>,
    pub baseline: Option<BaselineEcho>,
    /// `baseline.mean_seconds / mean_seconds`.
    pub speedup: Option<f64>,
}

impl BenchReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        0.0
    } else {
        xs.iter().sum::<f64>() / xs.len() as f64
    }
}

/// Sample standard deviation; zero for fewer than two values.
pub fn stddev(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let mu = mean(xs);
    let ss: f64 = xs.iter().map(|x| (x - mu).powi(2)).sum();
    (ss / (xs.len() - 1) as f64).sqrt()
}

fn mean_phases(reps: &[PhaseTimings]) -> PhaseTimings {
    let pick = |f: fn(&PhaseTimings) -> f64| mean(&reps.iter().map(f).collect::<Vec<_>>());
    PhaseTimings {
        affinity: pick(|t| t.affinity),
        rowsum: pick(|t| t.rowsum),
        normalize: pick(|t| t.normalize),
        iterate: pick(|t| t.iterate),
        kmeans: pick(|t| t.kmeans),
        total: pick(|t| t.total),
    }
}

/// Runs `cfg` on `d` `reps` times. The last result is returned with the
/// timings of every repetition.
pub fn timed_runs(d: &DataSet, cfg: &RunConfig, reps: usize) -> Result<(PicResult, Vec<PhaseTimings>)> {
    if reps == 0 {
        return Err(Error::InvalidParams("repetitions must be at least 1".into()));
    }
    let mut timings = Vec::with_capacity(reps);
    let mut last = None;
    for _ in 0..reps {
        let r = cfg.run(d)?;
        timings.push(r.timings);
        last = Some(r);
    }
    Ok((last.expect("reps >= 1"), timings))
}

/// Times `cfg` (and optionally a baseline) and assembles the report.
pub fn profile(
    d: &DataSet,
    cfg: &RunConfig,
    reps: usize,
    baseline: Option<&RunConfig>,
) -> Result<(BenchReport, PicResult)> {
    let baseline = match baseline {
        Some(b) => {
            let (_, t) = timed_runs(d, b, reps)?;
            Some(BaselineEcho {
                name: b.label(),
                mean_seconds: mean(&t.iter().map(|x| x.total).collect::<Vec<_>>()),
                repetitions: t,
            })
        }
        None => None,
    };
    let (result, timings) = timed_runs(d, cfg, reps)?;
    let totals: Vec<f64> = timings.iter().map(|t| t.total).collect();
    let mean_seconds = mean(&totals);
    let phases = mean_phases(&timings);
    let (ari, jaccard) = match d.labels() {
        Some(truth) if d.n() >= 2 => {
            let (a, j) = ari_and_jaccard(truth, result.assignment.labels())?;
            (Some(a), Some(j))
        }
        _ => (None, None),
    };
    let speedup = baseline.as_ref().map(|b| b.mean_seconds / mean_seconds);
    let report = BenchReport {
        schema: REPORT_SCHEMA,
        dataset: d.name.clone(),
        n: d.n(),
        m: d.m(),
        backend: cfg.backend,
        p: cfg.workers(),
        similarity: cfg.similarity,
        params: ParamsEcho::new(cfg, d.n()),
        mean_phases: phases,
        mean_seconds,
        stddev_seconds: stddev(&totals),
        affinity_share: phases.affinity_share(),
        affinity_bytes: d.n() * d.n() * std::mem::size_of::<f64>(),
        iterations_run: result.trace.iterations_run,
        converged: result.trace.converged,
        ari,
        jaccard,
        repetitions: timings,
        baseline,
        speedup,
    };
    Ok((report, result))
}

/// One row of the subsampling experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Experiment2Row {
    pub fraction: f64,
    pub sample_size: usize,
    pub repetitions: usize,
    pub ari_mean: f64,
    pub ari_std: f64,
    pub jaccard_mean: f64,
    pub jaccard_std: f64,
}

/// Seed of the `rep`-th subsample drawn from base seed `seed`.
fn rep_seed(seed: u64, rep: usize) -> u64 {
    seed.wrapping_add((rep as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

/// For every fraction: `reps` seeded subsample → cluster → score rounds.
pub fn run_experiment2(
    d: &DataSet,
    cfg: &RunConfig,
    fractions: &[f64],
    reps: usize,
    seed: u64,
) -> Result<Vec<Experiment2Row>> {
    let truth_classes = d.class_count();
    if truth_classes == 0 {
        return Err(Error::MissingLabels);
    }
    if reps == 0 {
        return Err(Error::InvalidParams("repetitions must be at least 1".into()));
    }
    let mut rows = Vec::with_capacity(fractions.len());
    for &fraction in fractions {
        let mut aris = Vec::with_capacity(reps);
        let mut jaccards = Vec::with_capacity(reps);
        let mut sample_size = 0;
        for rep in 0..reps {
            let sub = subsample_balanced(d, &SubsampleSpec { fraction, seed: rep_seed(seed, rep) })?;
            sample_size = sub.n();
            let mut run = cfg.clone();
            run.params.k = run.params.k.min(sub.n());
            let r = run.run(&sub)?;
            let (a, j) = ari_and_jaccard(sub.labels().expect("subsample keeps labels"), r.assignment.labels())?;
            aris.push(a);
            jaccards.push(j);
        }
        rows.push(Experiment2Row {
            fraction,
            sample_size,
            repetitions: reps,
            ari_mean: mean(&aris),
            ari_std: stddev(&aris),
            jaccard_mean: mean(&jaccards),
            jaccard_std: stddev(&jaccards),
        });
    }
    Ok(rows)
}

pub fn experiment2_csv(rows: &[Experiment2Row]) -> String {
    let mut out = String::from("fraction,ari_mean,ari_std,jaccard_mean,jaccard_std\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            r.fraction, r.ari_mean, r.ari_std, r.jaccard_mean, r.jaccard_std
        ));
    }
    out
}
