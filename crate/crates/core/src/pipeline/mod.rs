//! Reproducible command pipelines behind the `peergrade` binary.
//!
//! Every command reads a [`PipelineConfig`]: a JSON config file may set any
//! field and command-line flags override it. Unset fields fall back to the
//! defaults listed on the accessor methods.

mod commands;
pub mod reference;
pub mod reproduce;

use std::collections::HashMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};

pub use commands::{cmd_estimate_noise, cmd_optimize, cmd_reproduce, cmd_simulate, cmd_weights, run, Outcome};

use crate::error::{Error, Result};
use crate::noise::{default_tolerance, EmpiricalGraderTable, GraderModel, NoiseMatrix};
use crate::optimizer::{optimize_weights, OptimizedRule, DEFAULT_THRESHOLD};
use crate::theory::{cached_weight_matrix, parse_objectives, CacheStatus, ObjectiveSpec, WeightMatrix};

pub const DEFAULT_K: usize = 6;
pub const DEFAULT_MATRIX: &str = "mallows6";
pub const DEFAULT_SEED: u64 = 1;
pub const DEFAULT_RUNS: usize = 100;
pub const DEFAULT_N: usize = 10_000;
pub const DEFAULT_SAMPLES: u64 = 1000;
/// Largest exact-solve threshold accepted; the subset DP needs `2^t` states.
pub const MAX_THRESHOLD: usize = 28;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Weights,
    Optimize,
    Simulate,
    EstimateNoise,
    Reproduce,
}

/// What `reproduce` recomputes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Target {
    Table1,
    Table2Theory,
    Table2Sim,
    Table4,
    Table5,
    Fig5,
}

impl Target {
    pub const ALL: [Target; 6] = [
        Target::Table1,
        Target::Table2Theory,
        Target::Table2Sim,
        Target::Table4,
        Target::Table5,
        Target::Fig5,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Target::Table1 => "table1",
            Target::Table2Theory => "table2-theory",
            Target::Table2Sim => "table2-sim",
            Target::Table4 => "table4",
            Target::Table5 => "table5",
            Target::Fig5 => "fig5",
        }
    }
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Target {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Target::ALL
            .into_iter()
            .find(|t| t.name() == s)
            .ok_or_else(|| {
                let names: Vec<_> = Target::ALL.iter().map(|t| t.name()).collect();
                Error::Range(format!("unknown target `{s}` (available: {})", names.join(", ")))
            })
    }
}

/// All settings of one invocation. Field names match the long flags.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct PipelineConfig {
    pub command: Option<Command>,
    pub k: Option<usize>,
    /// Builtin matrix name or path to a matrix JSON file.
    pub matrix: Option<String>,
    /// `all` or a comma-separated list of objective names.
    pub objective: Option<String>,
    pub seed: Option<u64>,
    pub runs: Option<usize>,
    pub n: Option<usize>,
    pub threshold: Option<usize>,
    pub threads: Option<usize>,
    pub cache_dir: Option<PathBuf>,
    pub out: Option<PathBuf>,
    /// Grader model: `perfect`, `mallows`, `marginal` (follows `matrix`) or
    /// `empirical:<csv path>`.
    pub model: Option<String>,
    /// Comma-separated rules: `borda`, `opt`, `opt:<objective>` or a path
    /// to an ordering JSON file.
    pub rules: Option<String>,
    pub samples: Option<u64>,
    pub dump: Option<bool>,
    pub target: Option<Target>,
}

impl PipelineConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::json(path.display().to_string(), e))
    }

    /// `self` with every unset field taken from `base`.
    pub fn or(self, base: PipelineConfig) -> PipelineConfig {
        PipelineConfig {
            command: self.command.or(base.command),
            k: self.k.or(base.k),
            matrix: self.matrix.or(base.matrix),
            objective: self.objective.or(base.objective),
            seed: self.seed.or(base.seed),
            runs: self.runs.or(base.runs),
            n: self.n.or(base.n),
            threshold: self.threshold.or(base.threshold),
            threads: self.threads.or(base.threads),
            cache_dir: self.cache_dir.or(base.cache_dir),
            out: self.out.or(base.out),
            model: self.model.or(base.model),
            rules: self.rules.or(base.rules),
            samples: self.samples.or(base.samples),
            dump: self.dump.or(base.dump),
            target: self.target.or(base.target),
        }
    }

    /// Default 6.
    pub fn k(&self) -> usize {
        self.k.unwrap_or(DEFAULT_K)
    }

    /// Default `mallows6`.
    pub fn matrix_source(&self) -> &str {
        self.matrix.as_deref().unwrap_or(DEFAULT_MATRIX)
    }

    /// Default all five built-in objectives.
    pub fn objectives(&self) -> Result<Vec<ObjectiveSpec>> {
        parse_objectives(self.objective.as_deref().unwrap_or("all"))
    }

    /// Default 1.
    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(DEFAULT_SEED)
    }

    /// Default 100.
    pub fn runs(&self) -> usize {
        self.runs.unwrap_or(DEFAULT_RUNS)
    }

    /// Default 10 000.
    pub fn n(&self) -> usize {
        self.n.unwrap_or(DEFAULT_N)
    }

    /// Default 22.
    pub fn threshold(&self) -> usize {
        self.threshold.unwrap_or(DEFAULT_THRESHOLD)
    }

    /// Default 1000.
    pub fn samples(&self) -> u64 {
        self.samples.unwrap_or(DEFAULT_SAMPLES)
    }

    pub fn dump(&self) -> bool {
        self.dump.unwrap_or(false)
    }

    /// Default `mallows`.
    pub fn model_name(&self) -> &str {
        self.model.as_deref().unwrap_or("mallows")
    }

    /// Default `borda,opt`.
    pub fn rule_names(&self) -> Vec<String> {
        self.rules
            .as_deref()
            .unwrap_or("borda,opt")
            .split(',')
            .map(|s| s.trim().to_string())
            .filter(|s| !s.is_empty())
            .collect()
    }

    /// The noise matrix, validated and balanced.
    pub fn load_matrix(&self) -> Result<NoiseMatrix> {
        load_matrix(self.matrix_source())
    }

    pub fn grader_model(&self) -> Result<GraderModel> {
        let name = self.model_name();
        if let Some(path) = name.strip_prefix("empirical:") {
            return GraderModel::empirical(EmpiricalGraderTable::load(Path::new(path))?);
        }
        match name {
            "perfect" => Ok(GraderModel::Perfect),
            "mallows" => Ok(GraderModel::MallowsQuality),
            "marginal" => GraderModel::marginal(self.load_matrix()?),
            other => Err(Error::Range(format!(
                "unknown grader model `{other}` (available: perfect, mallows, marginal, empirical:<path>)"
            ))),
        }
    }

    /// Checks every setting the given command will use.
    pub fn validate(&self, command: Command) -> Result<()> {
        let k = self.k();
        crate::types::check_k(k)?;
        if let Some(t) = self.threads {
            if t == 0 {
                return Err(Error::Range("--threads must be at least 1".into()));
            }
        }
        let threshold = self.threshold();
        if !(1..=MAX_THRESHOLD).contains(&threshold) {
            return Err(Error::Range(format!(
                "--threshold must lie in 1..={MAX_THRESHOLD} (got {threshold})"
            )));
        }
        self.objectives()?;
        match command {
            Command::Weights | Command::Optimize => {
                check_matrix_k(&self.load_matrix()?, k)?;
            }
            Command::Simulate => {
                if self.n() <= k {
                    return Err(Error::Range(format!("--n must exceed k = {k}")));
                }
                if self.runs() == 0 {
                    return Err(Error::Range("--runs must be at least 1".into()));
                }
                self.grader_model()?.check_k(k)?;
                for rule in self.rule_names() {
                    if rule != "borda" && !rule.starts_with("opt") && !Path::new(&rule).exists() {
                        return Err(Error::Range(format!("rule `{rule}` is neither borda, opt nor an existing file")));
                    }
                }
                if self.rule_names().iter().any(|r| r.starts_with("opt")) {
                    check_matrix_k(&self.load_matrix()?, k)?;
                }
            }
            Command::EstimateNoise => {
                if self.samples() == 0 {
                    return Err(Error::Range("--samples must be at least 1".into()));
                }
                self.grader_model()?.check_k(k)?;
            }
            Command::Reproduce => {
                if self.target.is_none() {
                    return Err(Error::Range("reproduce needs a target".into()));
                }
                if self.runs() == 0 || self.n() <= 6 {
                    return Err(Error::Range("reproduce needs runs >= 1 and n > 6".into()));
                }
            }
        }
        Ok(())
    }
}

fn check_matrix_k(matrix: &NoiseMatrix, k: usize) -> Result<()> {
    if matrix.k() != k {
        return Err(Error::Dimension(format!(
            "matrix `{}` is {}x{}, but k = {k}",
            matrix.label(),
            matrix.k(),
            matrix.k()
        )));
    }
    Ok(())
}

/// A builtin or file matrix, validated with the default tolerance and
/// balanced to be exactly doubly stochastic.
pub fn load_matrix(source: &str) -> Result<NoiseMatrix> {
    NoiseMatrix::resolve(source)?.validate_and_balance(&default_tolerance(), true)
}

/// Shared state for a pipeline: weight cache directory, exact-solve
/// threshold and an in-memory memo of weight matrices.
#[derive(Debug)]
pub struct Context {
    cache_dir: Option<PathBuf>,
    threshold: usize,
    memo: Mutex<HashMap<String, Arc<WeightMatrix>>>,
}

impl Context {
    pub fn new(cache_dir: Option<PathBuf>, threshold: usize) -> Self {
        Context {
            cache_dir,
            threshold,
            memo: Mutex::new(HashMap::new()),
        }
    }

    pub fn threshold(&self) -> usize {
        self.threshold
    }

    pub fn weights(&self, k: usize, matrix: &NoiseMatrix, spec: &ObjectiveSpec) -> Result<Arc<WeightMatrix>> {
        Ok(self.weights_with_status(k, matrix, spec)?.0)
    }

    pub fn weights_with_status(
        &self,
        k: usize,
        matrix: &NoiseMatrix,
        spec: &ObjectiveSpec,
    ) -> Result<(Arc<WeightMatrix>, CacheStatus)> {
        let key = format!("{k}/{}/{}", matrix.content_hash(), spec.cache_key());
        if let Some(w) = self.memo.lock().expect("memo lock").get(&key) {
            return Ok((Arc::clone(w), CacheStatus::Hit));
        }
        let (w, status) = cached_weight_matrix(self.cache_dir.as_deref(), k, matrix, spec)?;
        let w = Arc::new(w);
        self.memo
            .lock()
            .expect("memo lock")
            .insert(key, Arc::clone(&w));
        Ok((w, status))
    }

    pub fn optimize(&self, k: usize, matrix: &NoiseMatrix, spec: &ObjectiveSpec) -> Result<OptimizedRule> {
        optimize_weights(&*self.weights(k, matrix, spec)?, self.threshold)
    }
}

/// One comparison of a computed value with a reference value.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub label: String,
    pub expected: String,
    pub computed: String,
    pub tolerance: String,
    pub pass: bool,
}

impl Check {
    /// Numbers agreeing within `tolerance` (both in the same unit).
    pub fn close(label: impl Into<String>, expected: f64, computed: f64, tolerance: f64) -> Self {
        Check {
            label: label.into(),
            expected: format!("{expected:.2}"),
            computed: format!("{computed:.4}"),
            tolerance: format!("±{tolerance}"),
            pass: (computed - expected).abs() <= tolerance + 1e-9,
        }
    }

    pub fn equal<T: PartialEq + fmt::Debug>(label: impl Into<String>, expected: T, computed: T) -> Self {
        Check {
            label: label.into(),
            pass: expected == computed,
            expected: format!("{expected:?}"),
            computed: format!("{computed:?}"),
            tolerance: "exact".into(),
        }
    }

    pub fn holds(label: impl Into<String>, pass: bool, detail: impl Into<String>) -> Self {
        Check {
            label: label.into(),
            expected: "true".into(),
            computed: detail.into(),
            tolerance: "-".into(),
            pass,
        }
    }
}

/// Checks for one reproduction target.
#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub target: String,
    pub checks: Vec<Check>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass)
    }

    /// Aligned text table with a final tally.
    pub fn render(&self) -> String {
        let width = |f: fn(&Check) -> usize, min: usize| self.checks.iter().map(f).max().unwrap_or(0).max(min);
        let w = width(|c| c.label.chars().count(), 5);
        let we = width(|c| c.expected.chars().count(), 8);
        let wc = width(|c| c.computed.chars().count(), 8);
        let mut out = format!(
            "{:<w$}  {:>we$}  {:>wc$}  {:>8}  result\n",
            "check", "expected", "computed", "tol"
        );
        for c in &self.checks {
            out.push_str(&format!(
                "{:<w$}  {:>we$}  {:>wc$}  {:>8}  {}\n",
                c.label,
                c.expected,
                c.computed,
                c.tolerance,
                if c.pass { "PASS" } else { "FAIL" }
            ));
        }
        let failed = self.failures().count();
        out.push_str(&format!(
            "{}: {} of {} checks passed\n",
            self.target,
            self.checks.len() - failed,
            self.checks.len()
        ));
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_config_file() {
        let file: PipelineConfig = serde_json::from_str(r#"{"k": 4, "seed": 9, "matrix": "identity(4)", "target": "table2-theory"}"#).unwrap();
        let flags = PipelineConfig {
            seed: Some(3),
            ..Default::default()
        };
        let c = flags.or(file);
        assert_eq!(c.k(), 4);
        assert_eq!(c.seed(), 3);
        assert_eq!(c.matrix_source(), "identity(4)");
        assert_eq!(c.target, Some(Target::Table2Theory));
        assert_eq!(c.runs(), DEFAULT_RUNS);
    }

    #[test]
    fn unknown_config_fields_are_rejected() {
        assert!(serde_json::from_str::<PipelineConfig>(r#"{"kk": 4}"#).is_err());
    }

    #[test]
    fn validation() {
        let ok = PipelineConfig {
            k: Some(3),
            matrix: Some("identity(3)".into()),
            ..Default::default()
        };
        ok.validate(Command::Optimize).unwrap();
        let wrong_k = PipelineConfig {
            k: Some(4),
            ..ok.clone()
        };
        assert!(wrong_k.validate(Command::Optimize).is_err());
        let bad_threshold = PipelineConfig {
            threshold: Some(40),
            ..ok.clone()
        };
        assert!(bad_threshold.validate(Command::Optimize).is_err());
        let bad_model = PipelineConfig {
            model: Some("psychic".into()),
            ..ok.clone()
        };
        assert!(bad_model.validate(Command::Simulate).is_err());
        let no_target = ok.clone();
        assert!(no_target.validate(Command::Reproduce).is_err());
        assert_eq!("table5".parse::<Target>().unwrap(), Target::Table5);
        assert!("table3".parse::<Target>().is_err());
    }

    #[test]
    fn report_rendering() {
        let r = Report {
            target: "demo".into(),
            checks: vec![
                Check::close("a", 85.15, 85.1586, 0.02),
                Check::close("b", 80.01, 80.0869, 0.02),
                Check::equal("c", [1, 2], [1, 2]),
            ],
        };
        assert!(!r.passed());
        assert_eq!(r.failures().count(), 1);
        let text = r.render();
        assert!(text.contains("FAIL"));
        assert!(text.ends_with("demo: 2 of 3 checks passed\n"));
    }
}
