//! Uniform sampling of a ranking at a fixed Kendall-tau distance from a
//! reference order, via inversion tables.

use rand::Rng;

use crate::error::{Error, Result};

/// Largest ranking length whose permutation counts fit in `u128`.
pub const MAX_ITEMS: usize = 33;

/// `counts[m][d]` = number of permutations of `m` items with exactly `d`
/// inversions (Mahonian numbers).
#[derive(Debug, Clone)]
pub struct InversionCounts {
    counts: Vec<Vec<u128>>,
}

impl InversionCounts {
    pub fn new(max_items: usize) -> Result<Self> {
        if max_items > MAX_ITEMS {
            return Err(Error::Range(format!(
                "inversion tables support at most {MAX_ITEMS} items"
            )));
        }
        let mut counts: Vec<Vec<u128>> = vec![vec![1]];
        for m in 1..=max_items {
            let max_d = m * (m - 1) / 2;
            let prev = &counts[m - 1];
            let mut row = vec![0u128; max_d + 1];
            // The m-th item contributes 0..m-1 inversions.
            for (d, slot) in row.iter_mut().enumerate() {
                let lo = d.saturating_sub(m - 1);
                *slot = (lo..=d).filter_map(|e| prev.get(e)).sum();
            }
            counts.push(row);
        }
        Ok(InversionCounts { counts })
    }

    pub fn count(&self, items: usize, distance: usize) -> u128 {
        self.counts
            .get(items)
            .and_then(|row| row.get(distance))
            .copied()
            .unwrap_or(0)
    }

    pub fn max_items(&self) -> usize {
        self.counts.len() - 1
    }

    /// A ranking of `reference` drawn uniformly among those at Kendall-tau
    /// distance exactly `distance` from it.
    pub fn sample<T: Clone, R: Rng + ?Sized>(
        &self,
        reference: &[T],
        distance: usize,
        rng: &mut R,
    ) -> Result<Vec<T>> {
        let m = reference.len();
        if m > self.max_items() {
            return Err(Error::Range(format!(
                "table built for {} items, ranking has {m}",
                self.max_items()
            )));
        }
        let max_d = m * m.saturating_sub(1) / 2;
        if distance > max_d {
            return Err(Error::Range(format!(
                "Kendall-tau distance {distance} exceeds the maximum {max_d} for {m} items"
            )));
        }
        let mut remaining: Vec<usize> = (0..m).collect();
        let mut left = distance;
        let mut out = Vec::with_capacity(m);
        for i in 0..m {
            let rest = m - i - 1;
            // Choosing the c-th smallest remaining item adds c inversions.
            let total = self.count(rest + 1, left);
            let mut ticket = rng.gen_range(0..total);
            let mut chosen = None;
            for c in 0..=rest.min(left) {
                let w = self.count(rest, left - c);
                if ticket < w {
                    chosen = Some(c);
                    break;
                }
                ticket -= w;
            }
            let c = chosen.expect("inversion counts are consistent");
            left -= c;
            out.push(reference[remaining.remove(c)].clone());
        }
        debug_assert_eq!(left, 0);
        Ok(out)
    }
}
