//! One simulated exam scored every way the toolkit knows: recovered pairs
//! per objective, Kendall tau, displacement curves and where the true top
//! 20% ended up. Writes the curves as CSV when given a path.
//!
//! cargo run --release --example ranking_metrics -- [n] [curves.csv]

use std::fs::File;

use peergrade::metrics::{metric_report, write_curves_csv};
use peergrade::noise::GraderModel;
use peergrade::simulator::grade_exam;
use peergrade::theory::ObjectiveSpec;
use peergrade::types::{borda_ordering, TieBreak, TypeSpace};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> peergrade::Result<()> {
    let n: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(5000);
    let csv_path = std::env::args().nth(2);
    let space = TypeSpace::new(6)?;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let exam = grade_exam(n, &space, &GraderModel::MallowsQuality, &mut rng)?;
    let ranking = exam.final_ranking(&borda_ordering(6, TieBreak::Tied)?, &space)?;
    let report = metric_report(&ranking, &exam.ground_truth, &ObjectiveSpec::builtins())?;

    for (name, value) in &report.objectives {
        println!("{name:<8} {:.2}%", 100.0 * value);
    }
    let pairs = (n * (n - 1) / 2) as f64;
    println!("kendall tau {} ({:.2}% of pairs)", report.kendall_tau, 100.0 * report.kendall_tau as f64 / pairs);
    for x in [1, 5, 10, 25] {
        println!("displaced by >= {x}% of the class: {:.2}%", report.displacement[x].1);
    }
    for x in [10, 20, 50] {
        println!("true top {x}% kept in the final top {x}%: {:.2}%", report.interval_displacement[x - 1].1);
    }
    let slices: Vec<String> = report.top_quantile.iter().map(|v| format!("{v:.1}")).collect();
    println!("true top 20% by final 5% slice: {}", slices.join(" "));

    if let Some(path) = csv_path {
        let file = File::create(&path).map_err(|source| peergrade::Error::Io { path: path.clone().into(), source })?;
        write_curves_csv(
            file,
            &[
                ("displacement".to_string(), report.displacement),
                ("interval".to_string(), report.interval_displacement),
            ],
        )?;
        println!("curves written to {path}");
    }
    Ok(())
}
