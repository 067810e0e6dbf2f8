//! Finite exams: bundle graphs, simulated graders and aggregation.
//!
//! A run draws student qualities, a bundle graph and every grader's ranking
//! once, then ranks the papers with each ordering under study. All orderings
//! in a run see the same grades and the same tie-break keys.

mod bundle;
mod exam;

use std::io::Write;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

pub use bundle::{generate_bundle_graph, BundleGraph};
pub use exam::{grade_exam, simulate_exam, Exam, ExamConfig, ExamRun};

use crate::error::{Error, Result};
use crate::metrics::recovered_fraction;
use crate::theory::ObjectiveSpec;
use crate::types::{TypeOrdering, TypeSpace};

/// Seed of run `run` in a batch seeded with `seed` (SplitMix64 finaliser).
pub fn derive_seed(seed: u64, run: u64) -> u64 {
    let mut z = seed.wrapping_add(run.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// One value of one metric for one ordering in one run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunRecord {
    pub run_id: usize,
    pub ordering_label: String,
    pub metric: String,
    pub value: f64,
}

/// Mean and sample standard deviation of a metric across runs.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub ordering_label: String,
    pub metric: String,
    pub runs: usize,
    pub mean: f64,
    pub std: f64,
}

impl Summary {
    pub fn standard_error(&self) -> f64 {
        self.std / (self.runs as f64).sqrt()
    }
}

#[derive(Debug, Clone, Default)]
pub struct BatchOptions {
    /// Keep every run as a JSON line (large).
    pub dump_runs: bool,
}

#[derive(Debug, Clone)]
pub struct BatchResult {
    /// Ordered by run, then ordering, then metric.
    pub records: Vec<RunRecord>,
    /// Ordered by ordering, then metric.
    pub summaries: Vec<Summary>,
    /// One JSON object per run when requested.
    pub dumps: Vec<String>,
}

impl BatchResult {
    pub fn summary(&self, ordering_label: &str, metric: &str) -> Option<&Summary> {
        self.summaries
            .iter()
            .find(|s| s.ordering_label == ordering_label && s.metric == metric)
    }

    /// Per-run values for one (ordering, metric) pair in run order.
    pub fn values(&self, ordering_label: &str, metric: &str) -> Vec<f64> {
        self.records
            .iter()
            .filter(|r| r.ordering_label == ordering_label && r.metric == metric)
            .map(|r| r.value)
            .collect()
    }

    /// `run_id,ordering_label,metric,value`.
    pub fn write_records_csv<W: Write>(&self, out: W) -> Result<()> {
        write_csv(out, &self.records)
    }

    pub fn write_summaries_csv<W: Write>(&self, out: W) -> Result<()> {
        write_csv(out, &self.summaries)
    }

    pub fn write_dumps<W: Write>(&self, mut out: W) -> Result<()> {
        for line in &self.dumps {
            writeln!(out, "{line}").map_err(|e| Error::io("<run dump>", e))?;
        }
        Ok(())
    }
}

fn write_csv<W: Write, T: Serialize>(out: W, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row).map_err(|e| Error::Format {
            path: "<batch output>".into(),
            detail: e.to_string(),
        })?;
    }
    w.flush().map_err(|e| Error::io("<csv>", e))
}

#[derive(Serialize)]
struct RunDump<'a> {
    run_id: usize,
    seed: u64,
    #[serde(flatten)]
    exam: &'a Exam,
    final_rankings: Vec<(&'a str, &'a [usize])>,
}

/// Runs `config.runs` exams in parallel and scores every ordering on every
/// metric. Results do not depend on the number of threads.
pub fn run_batch(
    config: &ExamConfig,
    orderings: &[(String, TypeOrdering)],
    metrics: &[ObjectiveSpec],
    options: &BatchOptions,
) -> Result<BatchResult> {
    config.validate()?;
    let space = TypeSpace::new(config.k)?;
    let levels = orderings
        .iter()
        .map(|(label, o)| {
            if o.k() != config.k {
                return Err(Error::Ordering(format!(
                    "ordering `{label}` is for k = {}, exam has k = {}",
                    o.k(),
                    config.k
                )));
            }
            o.type_levels(&space)
        })
        .collect::<Result<Vec<_>>>()?;

    let per_run = (0..config.runs)
        .into_par_iter()
        .map(|run| {
            let seed = derive_seed(config.seed, run as u64);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let exam = grade_exam(config.n, &space, &config.grader_model, &mut rng)?;
            let mut records = Vec::with_capacity(orderings.len() * metrics.len());
            let mut rankings = Vec::with_capacity(orderings.len());
            for ((label, _), lv) in orderings.iter().zip(&levels) {
                let ranking = exam.rank_by_levels(lv);
                for spec in metrics {
                    records.push(RunRecord {
                        run_id: run,
                        ordering_label: label.clone(),
                        metric: spec.name().to_string(),
                        value: recovered_fraction(&ranking, &exam.ground_truth, spec)?,
                    });
                }
                rankings.push(ranking);
            }
            let dump = if options.dump_runs {
                let d = RunDump {
                    run_id: run,
                    seed,
                    exam: &exam,
                    final_rankings: orderings
                        .iter()
                        .zip(&rankings)
                        .map(|((l, _), r)| (l.as_str(), r.as_slice()))
                        .collect(),
                };
                Some(serde_json::to_string(&d).map_err(|e| Error::json("run dump", e))?)
            } else {
                None
            };
            Ok((records, dump))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut records = Vec::new();
    let mut dumps = Vec::new();
    for (r, d) in per_run {
        records.extend(r);
        dumps.extend(d);
    }
    let mut summaries = Vec::new();
    let stride = metrics.len();
    for (oi, (label, _)) in orderings.iter().enumerate() {
        for (mi, spec) in metrics.iter().enumerate() {
            let values: Vec<f64> = records
                .iter()
                .skip(oi * stride + mi)
                .step_by(orderings.len() * stride)
                .map(|r| r.value)
                .collect();
            summaries.push(summarize(label, spec.name(), &values));
        }
    }
    Ok(BatchResult {
        records,
        summaries,
        dumps,
    })
}

fn summarize(label: &str, metric: &str, values: &[f64]) -> Summary {
    let runs = values.len();
    let mean = values.iter().sum::<f64>() / runs as f64;
    let std = if runs > 1 {
        (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (runs - 1) as f64).sqrt()
    } else {
        0.0
    };
    Summary {
        ordering_label: label.to_string(),
        metric: metric.to_string(),
        runs,
        mean,
        std,
    }
}
