//! Predicted performance of the Borda rule for k = 6 under a noise matrix.
//!
//! cargo run --release --example borda_theory -- mallows6

use std::time::Instant;

use peergrade::noise::{default_tolerance, NoiseMatrix};
use peergrade::rational::to_f64;
use peergrade::theory::{predicted_performance, weight_matrix, ObjectiveSpec};
use peergrade::types::{borda_ordering, TieBreak};

fn main() -> peergrade::Result<()> {
    let name = std::env::args().nth(1).unwrap_or_else(|| "mallows6".into());
    let matrix = NoiseMatrix::resolve(&name)?.validate_and_balance(&default_tolerance(), true)?;
    let k = matrix.k();
    let borda = borda_ordering(k, TieBreak::Tied)?;
    for spec in ObjectiveSpec::builtins() {
        let start = Instant::now();
        let w = weight_matrix(k, &matrix, &spec)?;
        let c = predicted_performance(&borda, &w)?;
        println!(
            "{:<8} borda {:.4}%   ({} weights in {:.2?})",
            spec.name(),
            100.0 * to_f64(&c),
            w.len() * w.len(),
            start.elapsed()
        );
    }
    Ok(())
}
