//! Estimates the noise matrix of Mallows-quality graders from a finite
//! number of sampled bundles, then checks how well a rule optimised on the
//! estimate does under the true matrix.
//!
//! cargo run --release --example estimate_noise -- [samples] [seed]

use peergrade::noise::{default_tolerance, estimate_matrix, GraderModel, NoiseMatrix};
use peergrade::optimizer::{optimize, DEFAULT_THRESHOLD};
use peergrade::rational::to_f64;
use peergrade::theory::{predicted_performance, weight_matrix, ObjectiveSpec};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn arg<T: std::str::FromStr>(i: usize, default: T) -> T {
    std::env::args().nth(i).and_then(|s| s.parse().ok()).unwrap_or(default)
}

fn main() -> peergrade::Result<()> {
    let (samples, seed) = (arg(1, 1000u64), arg(2, 7u64));
    let k = 6;
    let truth = NoiseMatrix::builtin("mallows6")?.validate_and_balance(&default_tolerance(), true)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let estimate = estimate_matrix(&GraderModel::MallowsQuality, k, samples, &mut rng)?;

    println!("estimated from {samples} graders (true value in brackets):");
    let (est, tru) = (estimate.to_f64(), truth.to_f64());
    for (e, t) in est.iter().zip(&tru) {
        let cells: Vec<String> = e.iter().zip(t).map(|(a, b)| format!("{a:.3} [{b:.3}]")).collect();
        println!("  {}", cells.join("  "));
    }

    let spec = ObjectiveSpec::all2all();
    let on_estimate = optimize(k, &estimate, &spec, DEFAULT_THRESHOLD)?;
    let on_truth = optimize(k, &truth, &spec, DEFAULT_THRESHOLD)?;
    let weights = weight_matrix(k, &truth, &spec)?;
    let scored = predicted_performance(&on_estimate.ordering, &weights)?;
    println!(
        "\nall2all under the true matrix: rule from estimate {:.4}%, optimal rule {:.4}%",
        100.0 * to_f64(&scored),
        100.0 * to_f64(&on_truth.predicted)
    );
    Ok(())
}
