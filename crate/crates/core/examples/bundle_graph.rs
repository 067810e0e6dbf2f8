//! Draws a peer-grading assignment: every student grades `k` papers and
//! every paper is graded by `k` students, never by its author.
//!
//! cargo run --release --example bundle_graph -- [n] [k] [seed]

use peergrade::simulator::generate_bundle_graph;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn arg<T: std::str::FromStr>(i: usize, default: T) -> T {
    std::env::args().nth(i).and_then(|s| s.parse().ok()).unwrap_or(default)
}

fn main() -> peergrade::Result<()> {
    let (n, k, seed) = (arg(1, 12usize), arg(2, 3usize), arg(3, 1u64));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let graph = generate_bundle_graph(n, k, &mut rng)?;
    graph.check()?;
    for g in 0..graph.n().min(20) {
        let graders: Vec<String> = graph.graders_of(g).iter().map(|x| x.to_string()).collect();
        println!(
            "student {g:>3} grades {:?}; paper {g} is graded by {}",
            graph.bundle(g),
            graders.join(", ")
        );
    }
    if graph.n() > 20 {
        println!("... {} more", graph.n() - 20);
    }
    Ok(())
}
