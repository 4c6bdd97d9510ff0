//! The one-vs-rest benchmark protocol: for each (algorithm, label,
//! permutation) task, train on a bucket-permuted pass over the training
//! set, then score the frozen hypothesis on the test set.
//!
//! Stream seeds are derived from (master seed, label, permutation) only —
//! never from the algorithm — so every algorithm sees the identical example
//! order for a given task and the comparison isolates the update rule.
//! Tasks are independent, so the parallel and serial drivers produce
//! byte-identical result tables.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use thiserror::Error;

use crate::classifiers::{
    AggressiveRomma, ClassifierError, Cmcp, Mcp, Naromma, OnlineClassifier, Pa, Perceptron,
};
use crate::data::{
    permuted_stream, relabel_one_vs_rest, BucketPermutationPlan, DataError, Dataset,
};
use crate::{cast, Scalar};

#[derive(Debug, Error)]
pub enum BenchError {
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Classifier(#[from] ClassifierError),
    #[error("invalid configuration: {reason}")]
    InvalidConfig { reason: String },
}

/// The update rules under comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Algorithm {
    Perceptron,
    Pa,
    Cmcp,
    Mcp,
    Naromma,
    Aromma,
}

impl Algorithm {
    pub const ALL: [Algorithm; 6] = [
        Algorithm::Perceptron,
        Algorithm::Pa,
        Algorithm::Cmcp,
        Algorithm::Mcp,
        Algorithm::Naromma,
        Algorithm::Aromma,
    ];

    pub fn key(self) -> &'static str {
        match self {
            Algorithm::Perceptron => "perceptron",
            Algorithm::Pa => "pa",
            Algorithm::Cmcp => "cmcp",
            Algorithm::Mcp => "mcp",
            Algorithm::Naromma => "naromma",
            Algorithm::Aromma => "aromma",
        }
    }

    pub fn build<T: Scalar>(self, dim: usize) -> Box<dyn OnlineClassifier<T>> {
        match self {
            Algorithm::Perceptron => Box::new(Perceptron::new(dim)),
            Algorithm::Pa => Box::new(Pa::new(dim)),
            Algorithm::Cmcp => Box::new(Cmcp::new(dim)),
            Algorithm::Mcp => Box::new(Mcp::new(dim)),
            Algorithm::Naromma => Box::new(Naromma::new(dim)),
            Algorithm::Aromma => Box::new(AggressiveRomma::new(dim)),
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

impl FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.key() == s.to_ascii_lowercase())
            .ok_or_else(|| {
                let keys: Vec<_> = Algorithm::ALL.iter().map(|a| a.key()).collect();
                format!("unknown algorithm '{s}' (expected one of: {})", keys.join(", "))
            })
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub algorithms: Vec<Algorithm>,
    /// Positive classes for the one-vs-rest tasks.
    pub labels: Vec<u8>,
    /// Independent stream permutations per (algorithm, label).
    pub permutations: u32,
    pub seed: u64,
    pub bucket_count: usize,
    pub bucket_size: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            algorithms: Algorithm::ALL.to_vec(),
            labels: (0..=9).collect(),
            permutations: 20,
            seed: 0,
            bucket_count: BucketPermutationPlan::MNIST_BUCKET_COUNT,
            bucket_size: BucketPermutationPlan::MNIST_BUCKET_SIZE,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), BenchError> {
        let reason = if self.algorithms.is_empty() {
            Some("no algorithms selected".to_string())
        } else if self.labels.is_empty() {
            Some("no labels selected".to_string())
        } else if let Some(&bad) = self.labels.iter().find(|&&l| l > 9) {
            Some(format!("label {bad} out of range 0–9"))
        } else if self.permutations == 0 {
            Some("need at least one permutation".to_string())
        } else if self.bucket_count == 0 || self.bucket_size == 0 {
            Some(format!(
                "bucket plan {}×{} is empty",
                self.bucket_count, self.bucket_size
            ))
        } else {
            let mut seen = [false; 10];
            self.labels.iter().find_map(|&l| {
                if std::mem::replace(&mut seen[l as usize], true) {
                    Some(format!("label {l} listed twice"))
                } else {
                    None
                }
            })
        };
        match reason {
            Some(reason) => Err(BenchError::InvalidConfig { reason }),
            None => Ok(()),
        }
    }
}

/// One (algorithm, label, permutation) task's measurements.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow<T> {
    pub algorithm: Algorithm,
    pub label: u8,
    pub permutation: u32,
    /// The derived stream seed actually used for this task.
    pub seed: u64,
    pub train_updates: usize,
    pub train_mistakes: usize,
    pub test_mistakes: usize,
    pub test_error_rate: T,
}

fn splitmix64(seed: u64) -> u64 {
    let mut z = seed.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Folds (master, label, permutation) into a stream seed. The algorithm is
/// deliberately absent so rules being compared consume identical streams.
pub fn derive_stream_seed(master: u64, label: u8, permutation: u32) -> u64 {
    splitmix64(splitmix64(master ^ u64::from(label)) ^ u64::from(permutation))
}

fn run_task<T: Scalar>(
    algorithm: Algorithm,
    label: u8,
    permutation: u32,
    stream_seed: u64,
    train: &Dataset<T>,
    test: &Dataset<T>,
    cfg: &ExperimentConfig,
) -> Result<ResultRow<T>, BenchError> {
    let plan = BucketPermutationPlan::new(cfg.bucket_count, cfg.bucket_size, stream_seed);
    let mut classifier = algorithm.build::<T>(train.dim());
    let summary = {
        let stream = permuted_stream(train, &plan)?;
        crate::classifiers::run_stream(classifier.as_mut(), stream, false)?
    };
    // Single online pass, by construction of the plan.
    debug_assert_eq!(summary.trials, train.len());

    let mut test_mistakes = 0usize;
    for (a, y) in test.binary_pairs()? {
        if classifier.predict(a)? != y {
            test_mistakes += 1;
        }
    }
    let test_error_rate = cast::<T>(test_mistakes as f64) / cast::<T>(test.len() as f64);
    Ok(ResultRow {
        algorithm,
        label,
        permutation,
        seed: stream_seed,
        train_updates: summary.updates,
        train_mistakes: summary.mistakes,
        test_mistakes,
        test_error_rate,
    })
}

/// Runs the full task grid. `train` and `test` carry raw 0–9 labels and are
/// relabeled per task label here. Rows come back sorted by
/// (algorithm, label, permutation) regardless of execution order.
pub fn run_experiment<T: Scalar>(
    cfg: &ExperimentConfig,
    train: &Dataset<T>,
    test: &Dataset<T>,
    parallel: bool,
) -> Result<Vec<ResultRow<T>>, BenchError> {
    cfg.validate()?;
    if train.len() != cfg.bucket_count * cfg.bucket_size {
        return Err(BenchError::InvalidConfig {
            reason: format!(
                "training set of {} does not fill {} buckets of {}",
                train.len(),
                cfg.bucket_count,
                cfg.bucket_size
            ),
        });
    }
    if train.dim() != test.dim() {
        return Err(BenchError::InvalidConfig {
            reason: format!(
                "train dimension {} differs from test dimension {}",
                train.dim(),
                test.dim()
            ),
        });
    }

    // Relabel once per label; tasks share the Arc-backed examples.
    let mut per_label = Vec::with_capacity(cfg.labels.len());
    for &label in &cfg.labels {
        per_label.push((
            label,
            relabel_one_vs_rest(train, label)?,
            relabel_one_vs_rest(test, label)?,
        ));
    }

    let mut tasks = Vec::new();
    for &algorithm in &cfg.algorithms {
        for (idx, &(label, _, _)) in per_label.iter().enumerate() {
            for permutation in 0..cfg.permutations {
                tasks.push((algorithm, idx, permutation, derive_stream_seed(cfg.seed, label, permutation)));
            }
        }
    }

    let run_one = |&(algorithm, idx, permutation, stream_seed): &(Algorithm, usize, u32, u64)| {
        let (label, train_bin, test_bin) = &per_label[idx];
        run_task(algorithm, *label, permutation, stream_seed, train_bin, test_bin, cfg)
    };
    let mut rows: Vec<ResultRow<T>> = if parallel {
        tasks.par_iter().map(run_one).collect::<Result<_, _>>()?
    } else {
        tasks.iter().map(run_one).collect::<Result<_, _>>()?
    };
    rows.sort_by_key(|r| (r.algorithm, r.label, r.permutation));
    Ok(rows)
}

pub const CSV_HEADER: &str =
    "algorithm,label,permutation,seed,train_updates,train_mistakes,test_mistakes,test_error_rate";

/// Renders rows as CSV: the header, one line per task, then one `avg` line
/// per (algorithm, label) group with column means. Output is a pure function
/// of the rows, so identical runs serialize byte-identically.
pub fn render_csv<T: Scalar>(rows: &[ResultRow<T>]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    let mut group: Vec<&ResultRow<T>> = Vec::new();
    for (i, row) in rows.iter().enumerate() {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            row.algorithm,
            row.label,
            row.permutation,
            row.seed,
            row.train_updates,
            row.train_mistakes,
            row.test_mistakes,
            row.test_error_rate,
        ));
        group.push(row);
        let group_ends = rows
            .get(i + 1)
            .is_none_or(|next| (next.algorithm, next.label) != (row.algorithm, row.label));
        if group_ends {
            out.push_str(&render_avg_line(&group));
            group.clear();
        }
    }
    out
}

fn render_avg_line<T: Scalar>(group: &[&ResultRow<T>]) -> String {
    let n = group.len() as f64;
    let mean = |f: &dyn Fn(&ResultRow<T>) -> f64| group.iter().map(|r| f(r)).sum::<f64>() / n;
    format!(
        "{},{},avg,,{},{},{},{}\n",
        group[0].algorithm,
        group[0].label,
        mean(&|r| r.train_updates as f64),
        mean(&|r| r.train_mistakes as f64),
        mean(&|r| r.test_mistakes as f64),
        mean(&|r| r.test_error_rate.to_f64().expect("error rate is finite")),
    )
}
