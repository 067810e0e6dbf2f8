//! Command-line front end. Exit status: 0 success, 1 invalid input or
//! failure, 2 a reproduction check failed.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use peergrade::pipeline::{run, Command, PipelineConfig, Target};

#[derive(Parser)]
#[command(name = "peergrade", version, about = "Type-ordering aggregation rules for ordinal peer grading")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
    #[command(flatten)]
    flags: Flags,
}

#[derive(Subcommand)]
enum Cmd {
    /// Compute and cache weight matrices
    Weights,
    /// Find optimal type orderings
    Optimize,
    /// Simulate exams and score rules
    Simulate,
    /// Estimate a noise matrix from sampled graders
    EstimateNoise,
    /// Recompute a published table or figure (table1, table2-theory,
    /// table2-sim, table4, table5, fig5)
    Reproduce { target: Target },
}

#[derive(Args)]
struct Flags {
    /// JSON file with defaults for any of the flags below
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Bundle size [default: 6]
    #[arg(long, global = true)]
    k: Option<usize>,
    /// Builtin matrix (mallows6, real6, p100, p1000, identity(k)) or JSON file [default: mallows6]
    #[arg(long, global = true)]
    matrix: Option<String>,
    /// `all` or comma-separated objectives, e.g. all2all,th-10%,acc-5% [default: all]
    #[arg(long, global = true)]
    objective: Option<String>,
    /// [default: 1]
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Simulated exams [default: 100]
    #[arg(long, global = true)]
    runs: Option<usize>,
    /// Students per exam [default: 10000]
    #[arg(long, global = true)]
    n: Option<usize>,
    /// Largest component solved exactly [default: 22]
    #[arg(long, global = true)]
    threshold: Option<usize>,
    /// Worker threads [default: all cores]
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Directory for cached weight matrices
    #[arg(long, global = true)]
    cache_dir: Option<PathBuf>,
    /// Output file or directory (depends on the command)
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Grader model: perfect, mallows, marginal or empirical:<csv> [default: mallows]
    #[arg(long, global = true)]
    model: Option<String>,
    /// Rules to simulate: borda, opt, opt:<objective> or ordering files [default: borda,opt]
    #[arg(long, global = true)]
    rules: Option<String>,
    /// Graders sampled by estimate-noise [default: 1000]
    #[arg(long, global = true)]
    samples: Option<u64>,
    /// Also write every simulated exam as JSON lines
    #[arg(long, global = true)]
    dump: bool,
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    let (command, target) = match cli.command {
        Cmd::Weights => (Command::Weights, None),
        Cmd::Optimize => (Command::Optimize, None),
        Cmd::Simulate => (Command::Simulate, None),
        Cmd::EstimateNoise => (Command::EstimateNoise, None),
        Cmd::Reproduce { target } => (Command::Reproduce, Some(target)),
    };
    let f = cli.flags;
    let flags = PipelineConfig {
        command: Some(command),
        k: f.k,
        matrix: f.matrix,
        objective: f.objective,
        seed: f.seed,
        runs: f.runs,
        n: f.n,
        threshold: f.threshold,
        threads: f.threads,
        cache_dir: f.cache_dir,
        out: f.out,
        model: f.model,
        rules: f.rules,
        samples: f.samples,
        dump: f.dump.then_some(true),
        target,
    };
    let result = match &f.config {
        Some(path) => PipelineConfig::load(path).map(|file| flags.or(file)),
        None => Ok(flags),
    }
    .and_then(|config| run(&config, &mut std::io::stdout()));
    match result {
        Ok(outcome) => std::process::exit(outcome.exit_code()),
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(1);
        }
    }
}
