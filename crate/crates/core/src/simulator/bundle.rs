use rand::seq::SliceRandom;
use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};

/// Attempts at one matching round before giving up on the whole graph.
const ROUND_RETRIES: usize = 10;

/// Who grades what: grader `g` receives `bundles[g]`, and paper `p` is graded
/// by everyone in `graders[p]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BundleGraph {
    k: usize,
    bundles: Vec<Vec<u32>>,
    #[serde(skip)]
    graders: Vec<Vec<u32>>,
}

impl BundleGraph {
    /// Builds a graph from explicit bundles, checking regularity.
    pub fn from_bundles(k: usize, bundles: Vec<Vec<u32>>) -> Result<Self> {
        let n = bundles.len();
        let mut graders = vec![Vec::with_capacity(k); n];
        for (g, bundle) in bundles.iter().enumerate() {
            for &p in bundle {
                if p as usize >= n {
                    return Err(Error::Range(format!("paper {p} in a graph of {n} students")));
                }
                graders[p as usize].push(g as u32);
            }
        }
        let graph = BundleGraph { k, bundles, graders };
        graph.check()?;
        Ok(graph)
    }

    pub fn n(&self) -> usize {
        self.bundles.len()
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn bundle(&self, grader: usize) -> &[u32] {
        &self.bundles[grader]
    }

    pub fn bundles(&self) -> &[Vec<u32>] {
        &self.bundles
    }

    pub fn graders_of(&self, paper: usize) -> &[u32] {
        &self.graders[paper]
    }

    /// Regularity on both sides, distinct papers per bundle, no self-grading.
    pub fn check(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Sampling(format!("bundle graph: {msg}")));
        for (g, bundle) in self.bundles.iter().enumerate() {
            if bundle.len() != self.k {
                return bad(format!("grader {g} has {} papers", bundle.len()));
            }
            if bundle.contains(&(g as u32)) {
                return bad(format!("grader {g} grades their own paper"));
            }
            let mut sorted = bundle.clone();
            sorted.sort_unstable();
            if sorted.windows(2).any(|w| w[0] == w[1]) {
                return bad(format!("grader {g} received a paper twice"));
            }
        }
        for (p, graders) in self.graders.iter().enumerate() {
            if graders.len() != self.k {
                return bad(format!("paper {p} has {} graders", graders.len()));
            }
        }
        Ok(())
    }
}

/// Draws a `k`-regular bundle graph over `n` students as the union of `k`
/// perfect matchings between graders and papers.
///
/// Each round starts from a uniformly random assignment and repairs
/// forbidden entries (own paper, or a paper already in the bundle) by random
/// transpositions. This is close to, but not exactly, a uniform draw over
/// valid matchings.
pub fn generate_bundle_graph<R: Rng + ?Sized>(n: usize, k: usize, rng: &mut R) -> Result<BundleGraph> {
    if k == 0 || n < k + 1 {
        return Err(Error::Range(format!(
            "a bundle graph needs n > k >= 1 (got n = {n}, k = {k})"
        )));
    }
    let mut bundles: Vec<Vec<u32>> = vec![Vec::with_capacity(k); n];
    for round in 0..k {
        let mut done = false;
        for _ in 0..ROUND_RETRIES {
            if let Some(assign) = matching_round(&bundles, rng) {
                for (g, p) in assign.into_iter().enumerate() {
                    bundles[g].push(p);
                }
                done = true;
                break;
            }
        }
        if !done {
            return Err(Error::Sampling(format!(
                "matching round {} did not converge after {ROUND_RETRIES} attempts (n = {n}, k = {k})",
                round + 1
            )));
        }
    }
    BundleGraph::from_bundles(k, bundles)
}

fn matching_round<R: Rng + ?Sized>(bundles: &[Vec<u32>], rng: &mut R) -> Option<Vec<u32>> {
    let n = bundles.len();
    let allowed = |g: usize, p: u32| p as usize != g && !bundles[g].contains(&p);
    let mut assign: Vec<u32> = (0..n as u32).collect();
    assign.shuffle(rng);
    let mut bad: Vec<usize> = (0..n).filter(|&g| !allowed(g, assign[g])).collect();
    let budget = n.saturating_mul(n).max(64);
    let mut swaps = 0;
    while let Some(g) = bad.pop() {
        if allowed(g, assign[g]) {
            continue;
        }
        swaps += 1;
        if swaps > budget {
            return None;
        }
        let h = rng.gen_range(0..n);
        if h != g && allowed(g, assign[h]) {
            assign.swap(g, h);
            if !allowed(h, assign[h]) {
                bad.push(h);
            }
        } else {
            bad.push(g);
        }
    }
    Some(assign)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn large_graph_is_regular() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let g = generate_bundle_graph(10_000, 6, &mut rng).unwrap();
        g.check().unwrap();
        assert_eq!(g.n(), 10_000);
    }

    #[test]
    fn tight_sizes_converge() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for k in 1..=6 {
            for n in [k + 1, k + 2, k + 3] {
                for _ in 0..50 {
                    let g = generate_bundle_graph(n, k, &mut rng).unwrap();
                    g.check().unwrap();
                }
            }
        }
    }

    #[test]
    fn single_round_is_a_derangement() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..100 {
            let g = generate_bundle_graph(3, 1, &mut rng).unwrap();
            for grader in 0..3 {
                assert_ne!(g.bundle(grader)[0] as usize, grader);
            }
        }
    }

    #[test]
    fn rejects_bad_sizes() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!(generate_bundle_graph(6, 6, &mut rng).is_err());
        assert!(generate_bundle_graph(5, 0, &mut rng).is_err());
        assert!(BundleGraph::from_bundles(1, vec![vec![0], vec![0]]).is_err());
    }
}
