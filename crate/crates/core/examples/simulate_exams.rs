//! Simulated exams with Mallows-quality graders: Borda against the rule
//! optimised for all2all, plus Borda under perfect grading.
//!
//! cargo run --release --example simulate_exams -- [n] [runs] [seed]

use std::time::Instant;

use peergrade::noise::{default_tolerance, GraderModel, NoiseMatrix};
use peergrade::optimizer::{optimize, DEFAULT_THRESHOLD};
use peergrade::simulator::{run_batch, BatchOptions, ExamConfig};
use peergrade::theory::ObjectiveSpec;
use peergrade::types::{borda_ordering, TieBreak};

fn arg<T: std::str::FromStr>(i: usize, default: T) -> T {
    std::env::args().nth(i).and_then(|s| s.parse().ok()).unwrap_or(default)
}

fn main() -> peergrade::Result<()> {
    let (n, runs, seed) = (arg(1, 2000usize), arg(2, 100usize), arg(3, 2024u64));
    let k = 6;
    let matrix = NoiseMatrix::builtin("mallows6")?.validate_and_balance(&default_tolerance(), true)?;
    let start = Instant::now();
    let opt = optimize(k, &matrix, &ObjectiveSpec::all2all(), DEFAULT_THRESHOLD)?;
    println!("optimised all2all rule in {:.1?}", start.elapsed());
    let borda = borda_ordering(k, TieBreak::Tied)?;
    let metrics = ObjectiveSpec::builtins();

    let start = Instant::now();
    let mallows = ExamConfig::new(n, k, GraderModel::MallowsQuality, seed, runs)?;
    let rules = vec![("borda".to_string(), borda.clone()), ("opt".to_string(), opt.ordering)];
    let res = run_batch(&mallows, &rules, &metrics, &BatchOptions::default())?;
    let perfect = ExamConfig::new(n, k, GraderModel::Perfect, seed, runs)?;
    let res_perfect = run_batch(&perfect, &[("borda".to_string(), borda)], &metrics, &BatchOptions::default())?;
    println!("{runs} runs of n = {n} in {:.1?}\n", start.elapsed());

    println!("{:<10} {:>18} {:>18} {:>18}", "objective", "perfect borda", "mallows borda", "mallows opt");
    for spec in &metrics {
        let cell = |r: &peergrade::simulator::BatchResult, label: &str| {
            let s = r.summary(label, spec.name()).expect("summary");
            format!("{:.2} +- {:.2}", 100.0 * s.mean, 100.0 * s.standard_error())
        };
        println!(
            "{:<10} {:>18} {:>18} {:>18}",
            spec.name(),
            cell(&res_perfect, "borda"),
            cell(&res, "borda"),
            cell(&res, "opt")
        );
    }
    let wins = res
        .values("opt", "all2all")
        .iter()
        .zip(res.values("borda", "all2all"))
        .filter(|(o, b)| **o > *b)
        .count();
    println!("\noptimal rule beats Borda on all2all in {wins} of {runs} paired runs");
    Ok(())
}
