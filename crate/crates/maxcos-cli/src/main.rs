//! Command-line front end: `bench` runs the one-vs-rest protocol over an
//! image corpus and emits CSV, `verify` replays a training run against its
//! own certificate on synthetic separable data, and `trace` dumps per-trial
//! decisions for one algorithm.
//!
//! Exit codes: 0 success, 1 verification failure, 2 usage or configuration
//! error (including missing input files), 3 malformed data.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context, Result};
use clap::{Args, Parser, Subcommand};

use maxcos::bench::{render_csv, run_experiment, Algorithm, BenchError, ExperimentConfig};
use maxcos::certificate::{verify_run, FrameworkKind};
use maxcos::classifiers::{run_stream, ClassifierError, Label};
use maxcos::data::{load_idx, relabel_one_vs_rest, synthesize_separable, DataError, Dataset};

#[derive(Parser)]
#[command(
    name = "maxcos",
    version,
    about = "Online linear classifiers with built-in certificate verification"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the one-vs-rest benchmark and write a CSV result table.
    Bench(BenchArgs),
    /// Train on synthetic separable data, then replay-verify the run's
    /// certificate and mistake bound.
    Verify(VerifyArgs),
    /// Dump a per-trial CSV trace for a single algorithm.
    Trace(TraceArgs),
}

#[derive(Args)]
struct TrainPaths {
    /// Training images file (plain or gzip).
    #[arg(long)]
    train_images: Option<PathBuf>,
    /// Training labels file (plain or gzip).
    #[arg(long)]
    train_labels: Option<PathBuf>,
}

#[derive(Args)]
struct TestPaths {
    /// Test images file (plain or gzip).
    #[arg(long)]
    test_images: Option<PathBuf>,
    /// Test labels file (plain or gzip).
    #[arg(long)]
    test_labels: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    /// Algorithms to compare (comma separated).
    #[arg(long = "algorithm", value_delimiter = ',', default_values_t = Algorithm::ALL)]
    algorithms: Vec<Algorithm>,
    /// Positive classes for the one-vs-rest tasks (comma separated).
    #[arg(long, value_delimiter = ',', value_parser = clap::value_parser!(u8).range(0..=9), default_values_t = 0..=9)]
    labels: Vec<u8>,
    /// Stream permutations per (algorithm, label) pair.
    #[arg(long, default_value_t = 20)]
    permutations: u32,
    /// Master seed; per-task stream seeds are derived from it.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    train: TrainPaths,
    #[command(flatten)]
    test: TestPaths,
    /// Number of equally sized stream buckets the training set must fill.
    #[arg(long, default_value_t = 60)]
    bucket_count: usize,
    /// Examples per bucket.
    #[arg(long, default_value_t = 1000)]
    bucket_size: usize,
    /// Write the CSV here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (1 = fully serial; default: all cores).
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Args)]
struct SyntheticArgs {
    /// Number of synthetic examples.
    #[arg(long = "synthetic-n", default_value_t = 1000)]
    n: usize,
    /// Feature dimension.
    #[arg(long, default_value_t = 20)]
    dim: usize,
    /// Separation margin enforced by the generator.
    #[arg(long, default_value_t = 0.1)]
    gamma: f64,
    /// Radius of the ball examples are drawn from.
    #[arg(long, default_value_t = 1.0)]
    radius: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct VerifyArgs {
    /// Algorithm whose run gets verified (mcp, cmcp, or naromma).
    #[arg(long, default_value_t = Algorithm::Mcp)]
    algorithm: Algorithm,
    #[command(flatten)]
    synthetic: SyntheticArgs,
    /// Corrupt the recorded certificate at this trial before verification
    /// (exercise the failure path; the report must name the trial).
    #[arg(long, hide = true)]
    inject_ell_fault: Option<usize>,
}

#[derive(Args)]
struct TraceArgs {
    #[arg(long, default_value_t = Algorithm::Mcp)]
    algorithm: Algorithm,
    /// Stop after this many trials.
    #[arg(long, default_value_t = 100, value_parser = clap::value_parser!(u64).range(1..))]
    limit: u64,
    #[command(flatten)]
    synthetic: SyntheticArgs,
    /// Trace the training files instead of synthetic data (requires
    /// --train-images/--train-labels and --label).
    #[command(flatten)]
    data: TrainPaths,
    /// Positive class when tracing an image corpus.
    #[arg(long, value_parser = clap::value_parser!(u8).range(0..=9))]
    label: Option<u8>,
    /// Write the CSV here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Bench(args) => cmd_bench(args),
        Command::Verify(args) => cmd_verify(args),
        Command::Trace(args) => cmd_trace(args),
    };
    match result {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(classify_error(&err))
        }
    }
}

/// 2 for anything the caller can fix on the command line (including files
/// that simply are not there), 3 for files that exist but do not parse.
fn classify_error(err: &anyhow::Error) -> u8 {
    fn data_code(e: &DataError) -> u8 {
        match e {
            DataError::Io(io) if io.kind() == std::io::ErrorKind::NotFound => 2,
            DataError::InvalidParameters { .. }
            | DataError::PlanSizeMismatch { .. }
            | DataError::AlreadyRelabeled { .. }
            | DataError::RawLabelsRequired
            | DataError::BinaryLabelsRequired
            | DataError::RejectionRate { .. } => 2,
            _ => 3,
        }
    }
    if let Some(e) = err.downcast_ref::<DataError>() {
        return data_code(e);
    }
    if let Some(e) = err.downcast_ref::<BenchError>() {
        return match e {
            BenchError::Data(d) => data_code(d),
            BenchError::InvalidConfig { .. } => 2,
            BenchError::Classifier(_) => 3,
        };
    }
    if let Some(e) = err.downcast_ref::<ClassifierError>() {
        return match e {
            // A stream with nothing to learn from is a data problem.
            ClassifierError::NoUsableExamples { .. } => 3,
            ClassifierError::Linalg(_) => 3,
        };
    }
    if let Some(e) = err.downcast_ref::<std::io::Error>() {
        return if e.kind() == std::io::ErrorKind::NotFound { 2 } else { 3 };
    }
    2
}

fn mnist_dir() -> PathBuf {
    std::env::var_os("MNIST_DATA_DIR")
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("data/mnist"))
}

/// Explicit flag wins; otherwise look for the standard file name under the
/// data directory, accepting a `.gz` sibling.
fn resolve_data_path(explicit: Option<PathBuf>, standard_name: &str) -> PathBuf {
    if let Some(path) = explicit {
        return path;
    }
    let plain = mnist_dir().join(standard_name);
    if plain.exists() {
        return plain;
    }
    let gz = mnist_dir().join(format!("{standard_name}.gz"));
    if gz.exists() {
        gz
    } else {
        plain
    }
}

fn load_pair(images: &Path, labels: &Path) -> Result<Dataset<f64>> {
    load_idx::<f64>(images, labels)
        .with_context(|| format!("loading {} / {}", images.display(), labels.display()))
}

fn write_output(out: Option<&Path>, contents: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, contents)
            .with_context(|| format!("writing {}", path.display()))?,
        None => print!("{contents}"),
    }
    Ok(())
}

fn cmd_bench(args: BenchArgs) -> Result<ExitCode> {
    let train = load_pair(
        &resolve_data_path(args.train.train_images, "train-images-idx3-ubyte"),
        &resolve_data_path(args.train.train_labels, "train-labels-idx1-ubyte"),
    )?;
    let test = load_pair(
        &resolve_data_path(args.test.test_images, "t10k-images-idx3-ubyte"),
        &resolve_data_path(args.test.test_labels, "t10k-labels-idx1-ubyte"),
    )?;

    let mut algorithms = args.algorithms;
    algorithms.sort();
    algorithms.dedup();
    let mut labels = args.labels;
    labels.sort_unstable();
    labels.dedup();
    let cfg = ExperimentConfig {
        algorithms,
        labels,
        permutations: args.permutations,
        seed: args.seed,
        bucket_count: args.bucket_count,
        bucket_size: args.bucket_size,
    };

    let parallel = args.jobs != Some(1);
    if let Some(jobs) = args.jobs {
        if jobs == 0 {
            return Err(anyhow!("--jobs must be at least 1"));
        }
        if jobs > 1 {
            // Ignore the error if a pool already exists; thread count is a
            // performance knob, never a correctness one.
            let _ = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global();
        }
    }

    let rows = run_experiment(&cfg, &train, &test, parallel)?;
    write_output(args.out.as_deref(), &render_csv(&rows))?;
    Ok(ExitCode::SUCCESS)
}

fn framework_kind(algorithm: Algorithm) -> Result<FrameworkKind> {
    match algorithm {
        Algorithm::Mcp => Ok(FrameworkKind::Mcp),
        Algorithm::Cmcp => Ok(FrameworkKind::Cmcp),
        Algorithm::Naromma => Ok(FrameworkKind::Naromma),
        other => Err(anyhow!(
            "no certificate replay for '{other}'; choose one of: mcp, cmcp, naromma"
        )),
    }
}

fn cmd_verify(args: VerifyArgs) -> Result<ExitCode> {
    let kind = framework_kind(args.algorithm)?;
    let s = &args.synthetic;
    let (dataset, target) = synthesize_separable::<f64>(s.n, s.dim, s.gamma, s.radius, s.seed)?;

    let mut classifier = args.algorithm.build::<f64>(dataset.dim());
    let summary = run_stream(classifier.as_mut(), dataset.binary_pairs()?, true)?;
    let mut trace = summary.trace.expect("trace was requested");
    if let Some(trial) = args.inject_ell_fault {
        let entry = trace
            .get_mut(trial)
            .ok_or_else(|| anyhow!("--inject-ell-fault {trial} is past the last trial"))?;
        entry.ell_after *= 1.5;
    }

    let labels: Vec<Label> = dataset.binary_labels().expect("generator emits ±1 labels").to_vec();
    let report = verify_run(&target, dataset.examples(), &labels, &trace, kind)
        .context("certificate replay")?;
    print!("{report}");
    println!(
        "{}: {} trials, {} train mistakes, mistake bound {:.3}",
        args.algorithm,
        summary.trials,
        summary.mistakes,
        target.mistake_bound()
    );
    if report.passed() {
        Ok(ExitCode::SUCCESS)
    } else {
        Ok(ExitCode::from(1))
    }
}

const TRACE_HEADER: &str = "trial,margin,update_kind,lambda,ell";

fn cmd_trace(args: TraceArgs) -> Result<ExitCode> {
    let uses_files = args.data.train_images.is_some()
        || args.data.train_labels.is_some()
        || args.label.is_some();
    let dataset = if uses_files {
        let positive = args
            .label
            .ok_or_else(|| anyhow!("--label is required when tracing an image corpus"))?;
        let raw = load_pair(
            &resolve_data_path(args.data.train_images, "train-images-idx3-ubyte"),
            &resolve_data_path(args.data.train_labels, "train-labels-idx1-ubyte"),
        )?;
        relabel_one_vs_rest(&raw, positive)?
    } else {
        let s = &args.synthetic;
        synthesize_separable::<f64>(s.n, s.dim, s.gamma, s.radius, s.seed)?.0
    };

    let mut classifier = args.algorithm.build::<f64>(dataset.dim());
    let limit = usize::try_from(args.limit).unwrap_or(usize::MAX);
    let stream = dataset.binary_pairs()?.take(limit);
    let summary = run_stream(classifier.as_mut(), stream, true)?;

    let mut csv = String::from(TRACE_HEADER);
    csv.push('\n');
    for outcome in summary.trace.expect("trace was requested") {
        let margin = outcome.margin.map(|m| m.to_string()).unwrap_or_default();
        writeln!(
            csv,
            "{},{},{},{},{}",
            outcome.trial,
            margin,
            outcome.update_kind.as_str(),
            outcome.lambda,
            outcome.ell_after
        )
        .expect("string write");
    }
    write_output(args.out.as_deref(), &csv)?;
    Ok(ExitCode::SUCCESS)
}
