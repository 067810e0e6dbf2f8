//! Scoring a final ranking against the ground truth.
//!
//! Rankings are slices of student ids listed best first; both must be
//! permutations of `0..n`. Finite-n objective qualification uses 1-based
//! ranks `r` normalised as `r / n`: the better paper qualifies when
//! `alpha*n <= r_i <= beta*n`, the worse one when
//! `r_j - r_i >= gamma*n` (and at least 1) and `r_j <= delta*n`.

use std::collections::HashMap;
use std::hash::Hash;
use std::io::Write;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::theory::ObjectiveSpec;

/// Counted pairs for one objective.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct PairFraction {
    pub correct: u64,
    pub total: u64,
}

impl PairFraction {
    pub fn value(&self) -> f64 {
        self.correct as f64 / self.total as f64
    }
}

/// A curve as `(x%, y%)` points.
pub type Curve = Vec<(f64, f64)>;

#[derive(Debug, Clone, Serialize)]
pub struct MetricReport {
    /// `(objective name, recovered fraction)` in the order requested.
    pub objectives: Vec<(String, f64)>,
    pub displacement: Curve,
    pub interval_displacement: Curve,
    /// Percent of the true top 20% landing in each 5% slice of the final ranking.
    pub top_quantile: Vec<f64>,
    pub kendall_tau: u64,
}

/// Number of discordant pairs between two orderings of the same items.
pub fn kendall_tau<T: Eq + Hash>(r1: &[T], r2: &[T]) -> Result<u64> {
    if r1.len() != r2.len() {
        return Err(Error::RankVector(format!(
            "rankings have different lengths ({} and {})",
            r1.len(),
            r2.len()
        )));
    }
    let pos: HashMap<&T, usize> = r1.iter().enumerate().map(|(i, t)| (t, i)).collect();
    if pos.len() != r1.len() {
        return Err(Error::RankVector("ranking repeats an item".into()));
    }
    let mut seq = Vec::with_capacity(r2.len());
    let mut seen = vec![false; r1.len()];
    for t in r2 {
        let &p = pos
            .get(t)
            .ok_or_else(|| Error::RankVector("rankings rank different items".into()))?;
        if std::mem::replace(&mut seen[p], true) {
            return Err(Error::RankVector("ranking repeats an item".into()));
        }
        seq.push(p);
    }
    Ok(count_inversions(&mut seq))
}

fn count_inversions(seq: &mut [usize]) -> u64 {
    let mut buf = seq.to_vec();
    sort_count(seq, &mut buf)
}

fn sort_count(a: &mut [usize], buf: &mut [usize]) -> u64 {
    let n = a.len();
    if n < 2 {
        return 0;
    }
    let mid = n / 2;
    let mut inv = sort_count(&mut a[..mid], &mut buf[..mid]) + sort_count(&mut a[mid..], &mut buf[mid..]);
    let (mut i, mut j, mut k) = (0, mid, 0);
    while i < mid && j < n {
        if a[i] <= a[j] {
            buf[k] = a[i];
            i += 1;
        } else {
            buf[k] = a[j];
            inv += (mid - i) as u64;
            j += 1;
        }
        k += 1;
    }
    buf[k..k + mid - i].copy_from_slice(&a[i..mid]);
    k += mid - i;
    buf[k..k + n - j].copy_from_slice(&a[j..n]);
    a.copy_from_slice(&buf[..n]);
    inv
}

/// `out[r]` = final position (0-based) of the student with true rank `r`.
fn final_positions(final_ranking: &[usize], truth: &[usize]) -> Result<Vec<usize>> {
    let n = truth.len();
    if final_ranking.len() != n {
        return Err(Error::RankVector(format!(
            "final ranking has {} students, ground truth {n}",
            final_ranking.len()
        )));
    }
    let mut final_pos = vec![usize::MAX; n];
    for (p, &s) in final_ranking.iter().enumerate() {
        if s >= n || final_pos[s] != usize::MAX {
            return Err(Error::RankVector(format!("final ranking is not a permutation of 0..{n}")));
        }
        final_pos[s] = p;
    }
    let mut out = Vec::with_capacity(n);
    let mut seen = vec![false; n];
    for &s in truth {
        if s >= n || std::mem::replace(&mut seen[s], true) {
            return Err(Error::RankVector(format!("ground truth is not a permutation of 0..{n}")));
        }
        out.push(final_pos[s]);
    }
    Ok(out)
}

fn scaled(x: &BigRational, n: usize) -> BigRational {
    x * BigRational::from_integer(BigInt::from(n))
}

fn ceil_to_i64(x: &BigRational) -> i64 {
    let (q, r) = x.numer().div_mod_floor(x.denom());
    let c = if r.is_zero() { q } else { q + 1 };
    c.to_i64().unwrap_or(i64::MAX)
}

fn floor_to_i64(x: &BigRational) -> i64 {
    x.numer().div_floor(x.denom()).to_i64().unwrap_or(i64::MAX)
}

struct Fenwick(Vec<u32>);

impl Fenwick {
    fn add(&mut self, i: usize) {
        let mut i = i + 1;
        while i < self.0.len() {
            self.0[i] += 1;
            i += i & i.wrapping_neg();
        }
    }

    /// Count of added indices `< i`.
    fn prefix(&self, i: usize) -> u64 {
        let mut i = i;
        let mut s = 0u64;
        while i > 0 {
            s += self.0[i] as u64;
            i &= i - 1;
        }
        s
    }
}

/// Qualifying and correctly ordered pair counts for one objective.
pub fn recovered_pairs(final_ranking: &[usize], truth: &[usize], spec: &ObjectiveSpec) -> Result<PairFraction> {
    let pos = final_positions(final_ranking, truth)?;
    let n = pos.len() as i64;
    let lo = ceil_to_i64(&scaled(spec.alpha(), n as usize)).max(1);
    let hi = floor_to_i64(&scaled(spec.beta(), n as usize)).min(n);
    let gap = ceil_to_i64(&scaled(spec.gamma(), n as usize)).max(1);
    let hi_j = floor_to_i64(&scaled(spec.delta(), n as usize)).min(n);

    let mut tree = Fenwick(vec![0; n as usize + 1]);
    let mut in_window = 0u64;
    let mut next_j = hi_j; // ranks > next_j are already in the tree
    let (mut correct, mut total) = (0u64, 0u64);
    let mut ri = hi;
    while ri >= lo {
        let first = ri + gap;
        while next_j >= first && next_j >= 1 {
            tree.add(pos[(next_j - 1) as usize]);
            in_window += 1;
            next_j -= 1;
        }
        if first <= hi_j {
            let p = pos[(ri - 1) as usize];
            total += in_window;
            correct += in_window - tree.prefix(p + 1);
        }
        ri -= 1;
    }
    if total == 0 {
        return Err(Error::DegenerateObjective(format!(
            "objective `{}` qualifies no pair at n = {n}",
            spec.name()
        )));
    }
    Ok(PairFraction { correct, total })
}

/// Fraction of qualifying pairs whose relative order the final ranking keeps.
pub fn recovered_fraction(final_ranking: &[usize], truth: &[usize], spec: &ObjectiveSpec) -> Result<f64> {
    recovered_pairs(final_ranking, truth, spec).map(|p| p.value())
}

fn grid() -> impl Iterator<Item = usize> {
    0..=100
}

/// For `x` on a 1% grid, the percentage of students displaced by at least
/// `x*n/100` positions.
pub fn displacement_cdf(final_ranking: &[usize], truth: &[usize]) -> Result<Curve> {
    let pos = final_positions(final_ranking, truth)?;
    let n = pos.len();
    // hundredths of displacement so thresholds stay integral: d*100 >= x*n
    let mut disp: Vec<usize> = pos.iter().enumerate().map(|(r, &p)| r.abs_diff(p) * 100).collect();
    disp.sort_unstable();
    Ok(grid()
        .map(|x| {
            let below = disp.partition_point(|&d| d < x * n);
            (x as f64, 100.0 * (n - below) as f64 / n as f64)
        })
        .collect())
}

/// For `x` on a 1% grid, the share of the true top `x%` also placed in the
/// final top `x%`.
pub fn interval_displacement(final_ranking: &[usize], truth: &[usize]) -> Result<Curve> {
    let pos = final_positions(final_ranking, truth)?;
    let n = pos.len();
    // inside[p] = 1 when the student at final position p is in the current true prefix
    let mut inside = vec![false; n];
    let mut curve = Vec::with_capacity(100);
    let mut added = 0;
    for x in 1..=100usize {
        let size = (x * n / 100).max(1);
        while added < size {
            inside[pos[added]] = true;
            added += 1;
        }
        let common = inside[..size].iter().filter(|&&b| b).count();
        curve.push((x as f64, 100.0 * common as f64 / size as f64));
    }
    Ok(curve)
}

/// Where the true top `quantile` lands in the final ranking, as percentages
/// per `bin`-wide slice of positions.
pub fn top_quantile_distribution(
    final_ranking: &[usize],
    truth: &[usize],
    quantile: f64,
    bin: f64,
) -> Result<Vec<f64>> {
    if !(0.0 < quantile && quantile <= 1.0 && 0.0 < bin && bin <= 1.0) {
        return Err(Error::Range("quantile and bin must lie in (0, 1]".into()));
    }
    let pos = final_positions(final_ranking, truth)?;
    let n = pos.len();
    let bins = (1.0 / bin).round() as usize;
    let cohort = ((quantile * n as f64).floor() as usize).max(1).min(n);
    let mut hist = vec![0usize; bins];
    for &p in &pos[..cohort] {
        hist[(p * bins / n).min(bins - 1)] += 1;
    }
    Ok(hist.into_iter().map(|c| 100.0 * c as f64 / cohort as f64).collect())
}

/// All metrics for one final ranking.
pub fn metric_report(final_ranking: &[usize], truth: &[usize], objectives: &[ObjectiveSpec]) -> Result<MetricReport> {
    Ok(MetricReport {
        objectives: objectives
            .iter()
            .map(|o| Ok((o.name().to_string(), recovered_fraction(final_ranking, truth, o)?)))
            .collect::<Result<_>>()?,
        displacement: displacement_cdf(final_ranking, truth)?,
        interval_displacement: interval_displacement(final_ranking, truth)?,
        top_quantile: top_quantile_distribution(final_ranking, truth, 0.2, 0.05)?,
        kendall_tau: kendall_tau(truth, final_ranking)?,
    })
}

/// Writes labelled curves as `label,x,y` CSV rows.
pub fn write_curves_csv<W: Write>(out: W, curves: &[(String, Curve)]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let csv_err = |e: csv::Error| Error::Format {
        path: "<curve output>".into(),
        detail: e.to_string(),
    };
    w.write_record(["label", "x", "y"]).map_err(csv_err)?;
    for (label, curve) in curves {
        for (x, y) in curve {
            w.write_record([label.as_str(), &format!("{x}"), &format!("{y:.6}")])
                .map_err(csv_err)?;
        }
    }
    w.flush().map_err(|e| Error::io("<curve output>", e))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::seq::SliceRandom;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn brute_pairs(final_ranking: &[usize], truth: &[usize], spec: &ObjectiveSpec) -> (u64, u64) {
        let n = truth.len();
        let nf = n as f64;
        let mut fpos = vec![0; n];
        for (p, &s) in final_ranking.iter().enumerate() {
            fpos[s] = p;
        }
        let a = crate::rational::to_f64(spec.alpha());
        let b = crate::rational::to_f64(spec.beta());
        let g = crate::rational::to_f64(spec.gamma());
        let d = crate::rational::to_f64(spec.delta());
        let (mut c, mut t) = (0, 0);
        for i in 0..n {
            for j in i + 1..n {
                let (ri, rj) = ((i + 1) as f64, (j + 1) as f64);
                let eps = 1e-9;
                if ri + eps >= a * nf && ri <= b * nf + eps && rj - ri + eps >= g * nf && rj <= d * nf + eps {
                    t += 1;
                    if fpos[truth[i]] < fpos[truth[j]] {
                        c += 1;
                    }
                }
            }
        }
        (c, t)
    }

    #[test]
    fn kendall_examples() {
        assert_eq!(kendall_tau(&[1, 2, 3], &[1, 2, 3]).unwrap(), 0);
        assert_eq!(kendall_tau(&[1, 3, 2], &[1, 2, 3]).unwrap(), 1);
        let a: Vec<u8> = (0..6).collect();
        let r: Vec<u8> = a.iter().rev().copied().collect();
        assert_eq!(kendall_tau(&a, &r).unwrap(), 15);
        assert!(kendall_tau(&[1, 2], &[1, 2, 3]).is_err());
        assert!(kendall_tau(&[1, 2], &[1, 3]).is_err());
    }

    #[test]
    fn identity_and_reversal() {
        let truth: Vec<usize> = (0..200).collect();
        let rev: Vec<usize> = truth.iter().rev().copied().collect();
        for o in ObjectiveSpec::builtins() {
            assert_eq!(recovered_fraction(&truth, &truth, &o).unwrap(), 1.0);
            assert_eq!(recovered_fraction(&rev, &truth, &o).unwrap(), 0.0);
        }
    }

    #[test]
    fn random_ranking_recovers_half() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let truth: Vec<usize> = (0..10_000).collect();
        let mut fin = truth.clone();
        fin.shuffle(&mut rng);
        let f = recovered_fraction(&fin, &truth, &ObjectiveSpec::all2all()).unwrap();
        assert!((f - 0.5).abs() < 0.01, "{f}");
    }

    #[test]
    fn degenerate_objective_is_an_error() {
        let truth: Vec<usize> = (0..5).collect();
        let o = ObjectiveSpec::parse("th-10%").unwrap();
        assert!(matches!(
            recovered_pairs(&truth, &truth, &o),
            Err(Error::DegenerateObjective(_))
        ));
    }

    #[test]
    fn curves_on_identity() {
        let truth: Vec<usize> = (0..500).collect();
        let d = displacement_cdf(&truth, &truth).unwrap();
        assert_eq!(d[0], (0.0, 100.0));
        assert!(d[1..].iter().all(|&(_, y)| y == 0.0));
        let iv = interval_displacement(&truth, &truth).unwrap();
        assert!(iv.iter().all(|&(_, y)| y == 100.0));
        let h = top_quantile_distribution(&truth, &truth, 0.2, 0.05).unwrap();
        assert_eq!(h.len(), 20);
        assert_eq!(&h[..4], &[25.0; 4]);
        assert!(h[4..].iter().all(|&y| y == 0.0));
    }

    #[test]
    fn random_final_spreads_the_top_cohort() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let truth: Vec<usize> = (0..20_000).collect();
        let mut fin = truth.clone();
        fin.shuffle(&mut rng);
        let h = top_quantile_distribution(&fin, &truth, 0.2, 0.05).unwrap();
        assert!(h.iter().all(|&y| (y - 5.0).abs() < 1.0), "{h:?}");
        let iv = interval_displacement(&fin, &truth).unwrap();
        assert_eq!(iv.last().unwrap().1, 100.0);
    }

    proptest! {
        #[test]
        fn fenwick_count_matches_pairwise(seed in any::<u64>(), n in 2usize..60) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut truth: Vec<usize> = (0..n).collect();
            truth.shuffle(&mut rng);
            let mut fin = truth.clone();
            fin.shuffle(&mut rng);
            for o in ObjectiveSpec::builtins() {
                let (c, t) = brute_pairs(&fin, &truth, &o);
                match recovered_pairs(&fin, &truth, &o) {
                    Ok(p) => prop_assert_eq!((p.correct, p.total), (c, t), "{}", o),
                    Err(_) => prop_assert_eq!(t, 0),
                }
            }
        }

        #[test]
        fn all2all_is_one_minus_normalised_kendall(seed in any::<u64>(), n in 2usize..200) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let truth: Vec<usize> = (0..n).collect();
            let mut fin = truth.clone();
            fin.shuffle(&mut rng);
            let p = recovered_pairs(&fin, &truth, &ObjectiveSpec::all2all()).unwrap();
            let kt = kendall_tau(&truth, &fin).unwrap();
            prop_assert_eq!(p.total, (n * (n - 1) / 2) as u64);
            prop_assert_eq!(p.correct, p.total - kt);
        }

        #[test]
        fn displacement_is_non_increasing(seed in any::<u64>(), n in 1usize..300) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let truth: Vec<usize> = (0..n).collect();
            let mut fin = truth.clone();
            fin.shuffle(&mut rng);
            let d = displacement_cdf(&fin, &truth).unwrap();
            prop_assert!(d.windows(2).all(|w| w[1].1 <= w[0].1));
            let h = top_quantile_distribution(&fin, &truth, 0.2, 0.05).unwrap();
            prop_assert!((h.iter().sum::<f64>() - 100.0).abs() < 1e-9);
        }
    }
}
