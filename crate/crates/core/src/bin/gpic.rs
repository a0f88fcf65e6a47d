//! `gpic` command-line front end.
//!
//! Exit codes: 0 success, 2 invalid flags, 3 data error, 4 numeric error.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use gpic::bench::{self, Backend, RunConfig};
use gpic::datasets::{self, GeneratorKind, GeneratorSpec};
use gpic::kernels::KernelConfig;
use gpic::pic::{PicParams, DEFAULT_MAX_ITERATIONS, BENCHMARK_MAX_ITERATIONS};
use gpic::types::{self, format_f64, DataSet};
use gpic::{Error, SimilarityKind};

#[derive(Parser)]
#[command(name = "gpic", version, about = "Power Iteration Clustering, serial and data-parallel")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Cluster one data set and write assignments, embedding and a report.
    Cluster(ClusterArgs),
    /// Time every pipeline phase over repeated runs.
    Profile(ProfileArgs),
    /// Subsampling study: cluster quality against sample fraction.
    Experiment2(Experiment2Args),
    /// Write a generated data set to CSV (labels in the last column).
    Generate(GenerateArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum BackendArg {
    Serial,
    Parallel,
}

#[derive(Clone, Copy, ValueEnum)]
enum SimilarityArg {
    Cosine,
    Rbf,
}

#[derive(Args)]
struct DataArgs {
    /// CSV file of points.
    #[arg(long, conflicts_with = "generate", required_unless_present = "generate")]
    input: Option<PathBuf>,
    /// Synthetic data set kind (two-moons, three-circles, cassine, gaussian-blobs[-C], shapes, smiley).
    #[arg(long)]
    generate: Option<String>,
    /// Input CSV has a header line.
    #[arg(long)]
    header: bool,
    /// Input CSV carries integer labels in its last column.
    #[arg(long)]
    labels: bool,
    #[arg(long, default_value_t = 1000)]
    n: usize,
    /// Generator noise; defaults depend on the kind.
    #[arg(long)]
    noise: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    data: DataArgs,
    /// Cluster count; defaults to the number of ground-truth classes.
    #[arg(long)]
    k: Option<usize>,
    #[arg(long, value_enum, default_value_t = BackendArg::Serial)]
    backend: BackendArg,
    /// Worker count for the parallel backend.
    #[arg(long, default_value_t = 1)]
    p: usize,
    /// Row-block height for affinity construction; defaults to n.
    #[arg(long)]
    chunk_rows: Option<usize>,
    #[arg(long, value_enum, default_value_t = SimilarityArg::Rbf)]
    similarity: SimilarityArg,
    #[arg(long, default_value_t = 1.0)]
    sigma: f64,
    /// Convergence threshold; defaults to 1e-5/n.
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    max_iters: Option<usize>,
    /// Use the timing-benchmark iteration cap of 3.
    #[arg(long)]
    paper_preset: bool,
}

#[derive(Args)]
struct ClusterArgs {
    #[command(flatten)]
    run: RunArgs,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ProfileArgs {
    #[command(flatten)]
    run: RunArgs,
    #[arg(long, default_value_t = 3)]
    reps: usize,
    /// Also time this backend and report speedup against it.
    #[arg(long, value_enum)]
    baseline_backend: Option<BackendArg>,
    #[arg(long, default_value_t = 1)]
    baseline_p: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct Experiment2Args {
    #[command(flatten)]
    run: RunArgs,
    #[arg(long, default_value_t = 10)]
    reps: usize,
    /// Comma-separated fractions; defaults to 0.0001..0.0009 and 0.001..0.009.
    #[arg(long, value_delimiter = ',')]
    fractions: Option<Vec<f64>>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long)]
    generate: String,
    #[arg(long, default_value_t = 1000)]
    n: usize,
    #[arg(long)]
    noise: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

enum Failure {
    Usage(String),
    Data(String),
    Numeric(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let msg = e.to_string();
        match e {
            _ if e.is_numeric() => Failure::Numeric(msg),
            Error::InvalidParams(_)
            | Error::InvalidKernelConfig(_)
            | Error::InvalidSigma
            | Error::KTooLarge { .. }
            | Error::InvalidInitialVector(_) => Failure::Usage(msg),
            _ => Failure::Data(msg),
        }
    }
}

type CliResult<T> = Result<T, Failure>;

fn io_err(path: &Path, e: std::io::Error) -> Failure {
    Failure::Data(format!("{}: {e}", path.display()))
}

fn generator_spec(kind: &str, n: usize, noise: Option<f64>, seed: u64) -> CliResult<GeneratorSpec> {
    let kind: GeneratorKind = kind.parse().map_err(|e: Error| Failure::Usage(e.to_string()))?;
    let mut spec = GeneratorSpec::new(kind, n, seed);
    if let Some(noise) = noise {
        spec = spec.with_noise(noise);
    }
    Ok(spec)
}

fn load_data(a: &DataArgs) -> CliResult<DataSet> {
    match (&a.input, &a.generate) {
        (Some(path), _) => Ok(types::load_csv(path, a.labels, a.header)?),
        (None, Some(kind)) => Ok(datasets::generate(&generator_spec(kind, a.n, a.noise, a.seed)?)?),
        (None, None) => Err(Failure::Usage("one of --input or --generate is required".into())),
    }
}

fn backend(b: BackendArg) -> Backend {
    match b {
        BackendArg::Serial => Backend::Serial,
        BackendArg::Parallel => Backend::Parallel,
    }
}

fn run_config(a: &RunArgs, d: &DataSet) -> CliResult<RunConfig> {
    let k = match a.k {
        Some(k) => k,
        None if d.class_count() >= 2 => d.class_count(),
        None => return Err(Failure::Usage("--k is required for unlabelled input".into())),
    };
    let max_iters = match (a.max_iters, a.paper_preset) {
        (Some(m), _) => m,
        (None, true) => BENCHMARK_MAX_ITERATIONS,
        (None, false) => DEFAULT_MAX_ITERATIONS,
    };
    let mut params = PicParams::new(k).with_seed(a.data.seed).with_max_iterations(max_iters);
    if let Some(eps) = a.epsilon {
        params = params.with_epsilon(eps);
    }
    let similarity = match a.similarity {
        SimilarityArg::Cosine => SimilarityKind::Cosine,
        SimilarityArg::Rbf => SimilarityKind::rbf(a.sigma)?,
    };
    let mut kernel = KernelConfig::new(a.p);
    if let Some(rows) = a.chunk_rows {
        kernel = kernel.with_chunk_rows(rows);
    }
    kernel.validate(d.n())?;
    params.validate(d.n())?;
    Ok(RunConfig {
        backend: backend(a.backend),
        kernel,
        similarity,
        params,
    })
}

fn write(path: &Path, contents: &str) -> CliResult<()> {
    fs::write(path, contents).map_err(|e| io_err(path, e))
}

fn cluster(a: &ClusterArgs) -> CliResult<()> {
    let d = load_data(&a.run.data)?;
    let cfg = run_config(&a.run, &d)?;
    let (report, result) = bench::profile(&d, &cfg, 1, None)?;
    fs::create_dir_all(&a.out).map_err(|e| io_err(&a.out, e))?;
    let labels: String = result
        .assignment
        .labels()
        .iter()
        .map(|l| format!("{l}\n"))
        .collect();
    write(&a.out.join("assignments.csv"), &labels)?;
    let embedding: String = result
        .embedding
        .as_slice()
        .iter()
        .map(|&x| format_f64(x) + "\n")
        .collect();
    write(&a.out.join("embedding.csv"), &embedding)?;
    write(&a.out.join("report.json"), &report.to_json())?;
    Ok(())
}

fn profile(a: &ProfileArgs) -> CliResult<()> {
    let d = load_data(&a.run.data)?;
    let cfg = run_config(&a.run, &d)?;
    let baseline = a.baseline_backend.map(|b| RunConfig {
        backend: backend(b),
        kernel: KernelConfig { workers: a.baseline_p, ..cfg.kernel },
        ..cfg.clone()
    });
    if let Some(b) = &baseline {
        b.kernel.validate(d.n())?;
    }
    let (report, _) = bench::profile(&d, &cfg, a.reps, baseline.as_ref())?;
    let json = report.to_json();
    if let Some(out) = &a.out {
        fs::create_dir_all(out).map_err(|e| io_err(out, e))?;
        write(&out.join("report.json"), &json)?;
    }
    println!("{json}");
    Ok(())
}

fn experiment2(a: &Experiment2Args) -> CliResult<()> {
    let d = load_data(&a.run.data)?;
    let cfg = run_config(&a.run, &d)?;
    let fractions = a.fractions.clone().unwrap_or_else(bench::default_fractions);
    let rows = bench::run_experiment2(&d, &cfg, &fractions, a.reps, a.run.data.seed)?;
    let csv = bench::experiment2_csv(&rows);
    if let Some(out) = &a.out {
        fs::create_dir_all(out).map_err(|e| io_err(out, e))?;
        write(&out.join("experiment2.csv"), &csv)?;
    }
    print!("{csv}");
    Ok(())
}

fn generate(a: &GenerateArgs) -> CliResult<()> {
    let d = datasets::generate(&generator_spec(&a.generate, a.n, a.noise, a.seed)?)?;
    Ok(types::write_csv(&a.out, &d)?)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Cluster(a) => cluster(a),
        Command::Profile(a) => profile(a),
        Command::Experiment2(a) => experiment2(a),
        Command::Generate(a) => generate(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Data(m)) => {
            eprintln!("data error: {m}");
            ExitCode::from(3)
        }
        Err(Failure::Numeric(m)) => {
            eprintln!("numeric error: {m}");
            ExitCode::from(4)
        }
    }
}
