//! Optimal type ordering for one noise matrix and objective, with the
//! component structure the optimiser worked through. Weight matrices are
//! cached under the system temp dir, so a second run is fast.
//!
//! cargo run --release --example optimize_rule -- [matrix] [objective]

use std::time::Instant;

use peergrade::noise::{default_tolerance, NoiseMatrix};
use peergrade::optimizer::{optimize_weights, SolveMethod, DEFAULT_THRESHOLD};
use peergrade::rational::to_f64;
use peergrade::theory::{cached_weight_matrix, predicted_performance, ObjectiveSpec};
use peergrade::types::{borda_ordering, TieBreak};

fn main() -> peergrade::Result<()> {
    let mut args = std::env::args().skip(1);
    let name = args.next().unwrap_or_else(|| "mallows6".into());
    let spec = ObjectiveSpec::parse(&args.next().unwrap_or_else(|| "all2all".into()))?;
    let matrix = NoiseMatrix::resolve(&name)?.validate_and_balance(&default_tolerance(), true)?;
    let k = matrix.k();
    let cache = std::env::temp_dir().join("peergrade-cache");

    let start = Instant::now();
    let (weights, status) = cached_weight_matrix(Some(&cache), k, &matrix, &spec)?;
    println!("weights for {name} / {}: {status:?} in {:.1?}", spec.name(), start.elapsed());

    let start = Instant::now();
    let rule = optimize_weights(&weights, DEFAULT_THRESHOLD)?;
    let borda = predicted_performance(&borda_ordering(k, TieBreak::Tied)?, &weights)?;
    println!("optimised in {:.1?}", start.elapsed());
    println!("predicted: opt {:.4}%  borda {:.4}%", 100.0 * to_f64(&rule.predicted), 100.0 * to_f64(&borda));

    let report = rule.report();
    let h = report.histogram;
    println!(
        "components: {} singletons, {} of size 3-7, {} of 8-11, {} of 12+, largest {}",
        h.singletons, h.small, h.medium, h.large, h.max
    );
    let fallback = rule.methods.iter().filter(|m| **m == SolveMethod::BordaFallback).count();
    if fallback > 0 {
        println!("{fallback} components above the threshold were ordered by Borda score");
    }

    println!("\nbest 14 types:");
    for (i, t) in rule.ordering.types().iter().take(14).enumerate() {
        println!("{:>3}  {t}  borda {}", i + 1, t.borda_score());
    }
    Ok(())
}
