use std::io::Write;
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::reproduce::{reproduce, SimParams};
use super::{Command, Context, PipelineConfig};
use crate::error::{Error, Result};
use crate::io::write_atomic;
use crate::noise::estimate_matrix;
use crate::optimizer::{PlanReport, SizeHistogram};
use crate::rational::to_f64;
use crate::simulator::{run_batch, BatchOptions, ExamConfig};
use crate::theory::{objective_mass, predicted_performance, CacheStatus, ObjectiveSpec};
use crate::types::{borda_ordering, TieBreak, TypeOrdering};

/// Default weight directory of `weights` when neither `--cache-dir` nor
/// `--out` is given.
pub const DEFAULT_WEIGHT_DIR: &str = "peergrade-cache";

/// How a command ended when it did not fail outright.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Success,
    /// A comparison against reference values failed.
    ChecksFailed,
}

impl Outcome {
    pub fn exit_code(self) -> i32 {
        match self {
            Outcome::Success => 0,
            Outcome::ChecksFailed => 2,
        }
    }
}

/// Validates `config` and runs its command, on `threads` workers when set.
pub fn run(config: &PipelineConfig, out: &mut (dyn Write + Send)) -> Result<Outcome> {
    let command = config
        .command
        .ok_or_else(|| Error::Range("no command given".into()))?;
    config.validate(command)?;
    let go = |out: &mut (dyn Write + Send)| match command {
        Command::Weights => cmd_weights(config, out),
        Command::Optimize => cmd_optimize(config, out),
        Command::Simulate => cmd_simulate(config, out),
        Command::EstimateNoise => cmd_estimate_noise(config, out),
        Command::Reproduce => cmd_reproduce(config, out),
    };
    match config.threads {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| Error::Range(format!("cannot start {t} worker threads: {e}")))?
            .install(|| go(out)),
        None => go(out),
    }
}

fn emit(out: &mut (dyn Write + Send), text: &str) -> Result<()> {
    out.write_all(text.as_bytes())
        .map_err(|e| Error::io("<stdout>", e))
}

fn file_stem(label: &str) -> String {
    label
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' })
        .collect()
}

fn status_name(s: CacheStatus) -> &'static str {
    match s {
        CacheStatus::Hit => "cached",
        CacheStatus::Miss => "computed",
        CacheStatus::Stale => "recomputed",
        CacheStatus::Disabled => "uncached",
    }
}

/// Computes (or loads) weight matrices into the cache directory and checks
/// that each sums to its objective mass.
pub fn cmd_weights(config: &PipelineConfig, out: &mut (dyn Write + Send)) -> Result<Outcome> {
    let dir = config
        .cache_dir
        .clone()
        .or_else(|| config.out.clone())
        .unwrap_or_else(|| PathBuf::from(DEFAULT_WEIGHT_DIR));
    let ctx = Context::new(Some(dir.clone()), config.threshold());
    let k = config.k();
    let matrix = config.load_matrix()?;
    let mut outcome = Outcome::Success;
    for spec in config.objectives()? {
        let (w, status) = ctx.weights_with_status(k, &matrix, &spec)?;
        let mass = objective_mass(&spec)?;
        let total = w.total();
        let ok = total == mass;
        if !ok {
            outcome = Outcome::ChecksFailed;
        }
        emit(
            out,
            &format!(
                "{:<8} {}x{} {:<10} total {} mass {} {}  {}\n",
                spec.name(),
                w.len(),
                w.len(),
                status_name(status),
                total,
                mass,
                if ok { "ok" } else { "MISMATCH" },
                crate::theory::cache_path(&dir, k, &matrix, &spec).display()
            ),
        )?;
    }
    Ok(outcome)
}

#[derive(Serialize)]
struct OptimizeEntry {
    objective: String,
    predicted_optimal: f64,
    predicted_borda: f64,
    plan: PlanReport,
    ordering_file: Option<PathBuf>,
}

type Column = (&'static str, fn(&SizeHistogram) -> usize);

fn histogram_table(rows: &[(String, SizeHistogram)]) -> String {
    let mut s = format!("{:<22}", "component size");
    for (name, _) in rows {
        s.push_str(&format!("{name:>9}"));
    }
    s.push('\n');
    let lines: [Column; 6] = [
        ("1", |h| h.singletons),
        ("1 (contracted count)", |h| h.contracted_singletons),
        ("3-7", |h| h.small),
        ("8-11", |h| h.medium),
        (">=12", |h| h.large),
        ("max", |h| h.max),
    ];
    for (label, get) in lines {
        s.push_str(&format!("{label:<22}"));
        for (_, h) in rows {
            s.push_str(&format!("{:>9}", get(h)));
        }
        s.push('\n');
    }
    s
}

/// Optimal ordering per objective, with predicted performance and the
/// component-size histogram. Orderings and a JSON report go to `--out`.
pub fn cmd_optimize(config: &PipelineConfig, out: &mut (dyn Write + Send)) -> Result<Outcome> {
    let ctx = Context::new(config.cache_dir.clone(), config.threshold());
    let k = config.k();
    let matrix = config.load_matrix()?;
    let borda = borda_ordering(k, TieBreak::Tied)?;
    let mut entries = Vec::new();
    let mut hist = Vec::new();
    emit(
        out,
        &format!("{:<8} {:>10} {:>10} {:>9}\n", "objective", "optimal %", "borda %", "fallback"),
    )?;
    for spec in config.objectives()? {
        let w = ctx.weights(k, &matrix, &spec)?;
        let rule = crate::optimizer::optimize_weights(&w, ctx.threshold())?;
        let borda_c = predicted_performance(&borda, &w)?;
        let plan = rule.report();
        emit(
            out,
            &format!(
                "{:<9} {:>10.4} {:>10.4} {:>9}\n",
                spec.name(),
                100.0 * to_f64(&rule.predicted),
                100.0 * to_f64(&borda_c),
                plan.fallback_components
            ),
        )?;
        let ordering_file = match &config.out {
            Some(dir) => {
                let path = dir.join(format!(
                    "ordering-{}-{}.json",
                    file_stem(matrix.label()),
                    spec.cache_key()
                ));
                write_atomic(&path, rule.ordering.to_json()?.as_bytes())?;
                Some(path)
            }
            None => None,
        };
        hist.push((spec.name().to_string(), plan.histogram));
        entries.push(OptimizeEntry {
            objective: spec.name().to_string(),
            predicted_optimal: to_f64(&rule.predicted),
            predicted_borda: to_f64(&borda_c),
            plan,
            ordering_file,
        });
    }
    emit(out, "\n")?;
    emit(out, &histogram_table(&hist))?;
    if let Some(dir) = &config.out {
        let json = serde_json::to_string_pretty(&entries).map_err(|e| Error::json("optimize report", e))?;
        let path = dir.join("optimize-report.json");
        write_atomic(&path, json.as_bytes())?;
        emit(out, &format!("\nwrote {}\n", path.display()))?;
    }
    Ok(Outcome::Success)
}

fn resolve_rule(
    name: &str,
    config: &PipelineConfig,
    ctx: &Context,
    objectives: &[ObjectiveSpec],
) -> Result<TypeOrdering> {
    let k = config.k();
    if name == "borda" {
        return borda_ordering(k, TieBreak::Tied);
    }
    if name == "opt" || name.starts_with("opt:") {
        let spec = match name.strip_prefix("opt:") {
            Some(obj) => ObjectiveSpec::parse(obj)?,
            None => objectives[0].clone(),
        };
        return Ok(ctx.optimize(k, &config.load_matrix()?, &spec)?.ordering);
    }
    TypeOrdering::load(Path::new(name))
}

fn with_suffix(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

/// Runs a batch of simulated exams. Per-run records go to `--out` as CSV
/// (with `.summary.csv` and, when dumping, `.jsonl` siblings); without
/// `--out` the records are written to standard output.
pub fn cmd_simulate(config: &PipelineConfig, out: &mut (dyn Write + Send)) -> Result<Outcome> {
    let ctx = Context::new(config.cache_dir.clone(), config.threshold());
    let objectives = config.objectives()?;
    let rules = config
        .rule_names()
        .into_iter()
        .map(|name| {
            let ordering = resolve_rule(&name, config, &ctx, &objectives)?;
            let label = if Path::new(&name).exists() {
                Path::new(&name)
                    .file_stem()
                    .map(|s| s.to_string_lossy().into_owned())
                    .unwrap_or(name)
            } else {
                name
            };
            Ok((label, ordering))
        })
        .collect::<Result<Vec<_>>>()?;
    let exam = ExamConfig::new(config.n(), config.k(), config.grader_model()?, config.seed(), config.runs())?;
    let res = run_batch(
        &exam,
        &rules,
        &objectives,
        &BatchOptions {
            dump_runs: config.dump(),
        },
    )?;

    let mut table = format!(
        "{} runs, n = {}, k = {}, {} graders, seed {}\n{:<16} {:<8} {:>9} {:>8}\n",
        config.runs(),
        config.n(),
        config.k(),
        exam.grader_model.name(),
        config.seed(),
        "rule",
        "metric",
        "mean %",
        "std %"
    );
    for s in &res.summaries {
        table.push_str(&format!(
            "{:<16} {:<8} {:>9.4} {:>8.4}\n",
            s.ordering_label,
            s.metric,
            100.0 * s.mean,
            100.0 * s.std
        ));
    }
    match &config.out {
        Some(path) => {
            let mut buf = Vec::new();
            res.write_records_csv(&mut buf)?;
            write_atomic(path, &buf)?;
            let mut buf = Vec::new();
            res.write_summaries_csv(&mut buf)?;
            write_atomic(&with_suffix(path, ".summary.csv"), &buf)?;
            if config.dump() {
                let mut buf = Vec::new();
                res.write_dumps(&mut buf)?;
                write_atomic(&with_suffix(path, ".jsonl"), &buf)?;
            }
            emit(out, &table)?;
            emit(out, &format!("wrote {}\n", path.display()))?;
        }
        None => {
            eprint!("{table}");
            let mut buf = Vec::new();
            res.write_records_csv(&mut buf)?;
            out.write_all(&buf).map_err(|e| Error::io("<stdout>", e))?;
        }
    }
    Ok(Outcome::Success)
}

/// Estimates a noise matrix by sampling graders. The JSON matrix goes to
/// `--out`, or to standard output.
pub fn cmd_estimate_noise(config: &PipelineConfig, out: &mut (dyn Write + Send)) -> Result<Outcome> {
    let model = config.grader_model()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed());
    let matrix = estimate_matrix(&model, config.k(), config.samples(), &mut rng)?;
    match &config.out {
        Some(path) => {
            matrix.save(path)?;
            let mut text = format!("{} ({} samples, seed {})\n", matrix.label(), config.samples(), config.seed());
            for row in matrix.to_f64() {
                let cells: Vec<String> = row.iter().map(|v| format!("{v:.4}")).collect();
                text.push_str(&cells.join("  "));
                text.push('\n');
            }
            text.push_str(&format!("wrote {}\n", path.display()));
            emit(out, &text)?;
        }
        None => emit(out, &format!("{}\n", matrix.to_json()?))?,
    }
    Ok(Outcome::Success)
}

/// Recomputes a published table or figure and compares it with the printed
/// values. With `--out` (a directory) the report is also saved as JSON.
pub fn cmd_reproduce(config: &PipelineConfig, out: &mut (dyn Write + Send)) -> Result<Outcome> {
    let target = config
        .target
        .ok_or_else(|| Error::Range("reproduce needs a target".into()))?;
    let ctx = Context::new(config.cache_dir.clone(), config.threshold());
    let sim = SimParams {
        n: config.n(),
        runs: config.runs(),
        seed: config.seed(),
    };
    let report = reproduce(&ctx, target, sim, config.out.as_deref())?;
    emit(out, &report.render())?;
    if let Some(dir) = &config.out {
        let json = serde_json::to_string_pretty(&report).map_err(|e| Error::json("reproduce report", e))?;
        write_atomic(&dir.join(format!("{target}-report.json")), json.as_bytes())?;
    }
    Ok(if report.passed() {
        Outcome::Success
    } else {
        Outcome::ChecksFailed
    })
}
