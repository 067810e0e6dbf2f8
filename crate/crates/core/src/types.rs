//! The type space: sorted rank vectors, Borda scores, multiplicities and
//! orderings of types.
//!
//! A paper graded by `k` graders receives `k` positions in `1..=k`. Its
//! *type* is that multiset stored as a non-decreasing vector, so two papers
//! with the same positions in a different grader order share one type.

use std::borrow::Borrow;
use std::collections::HashMap;
use std::fmt;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{binomial_u64, factorial_u64};

/// Largest supported bundle size.
pub const MAX_K: usize = 8;

pub(crate) fn check_k(k: usize) -> Result<()> {
    if (1..=MAX_K).contains(&k) {
        Ok(())
    } else {
        Err(Error::BundleSize { k, max: MAX_K })
    }
}

/// A canonical (sorted) vector of the `k` positions a paper received.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<u8>", into = "Vec<u8>")]
pub struct RankType(Vec<u8>);

impl RankType {
    /// Builds a type from an already sorted vector, validating it.
    pub fn new(entries: Vec<u8>) -> Result<Self> {
        let k = entries.len();
        check_k(k).map_err(|e| Error::RankVector(e.to_string()))?;
        if entries.iter().any(|&e| e == 0 || e as usize > k) {
            return Err(Error::RankVector(format!(
                "{entries:?}: every entry must lie in 1..={k}"
            )));
        }
        if entries.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::RankVector(format!(
                "{entries:?}: entries must be non-decreasing"
            )));
        }
        Ok(RankType(entries))
    }

    pub fn k(&self) -> usize {
        self.0.len()
    }

    pub fn entries(&self) -> &[u8] {
        &self.0
    }

    /// `k^2 + k - sum(entries)`: `k` points for a first place down to one
    /// point for a last place, summed over the graders.
    pub fn borda_score(&self) -> u32 {
        let k = self.k() as u32;
        k * k + k - self.0.iter().map(|&e| e as u32).sum::<u32>()
    }

    /// Number of grader assignments producing this type, `k!/(d_1!...d_k!)`
    /// where `d_i` counts the entries equal to `i`.
    pub fn multiplicity(&self) -> u64 {
        let mut result = factorial_u64(self.k() as u64);
        for run in self.0.chunk_by(|a, b| a == b) {
            result /= factorial_u64(run.len() as u64);
        }
        result
    }
}

impl TryFrom<Vec<u8>> for RankType {
    type Error = Error;

    fn try_from(entries: Vec<u8>) -> Result<Self> {
        RankType::new(entries)
    }
}

impl From<RankType> for Vec<u8> {
    fn from(t: RankType) -> Self {
        t.0
    }
}

impl Borrow<[u8]> for RankType {
    fn borrow(&self) -> &[u8] {
        &self.0
    }
}

impl fmt::Debug for RankType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for RankType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{e}")?;
        }
        write!(f, ")")
    }
}

/// Number of types for bundle size `k`: `binomial(2k-1, k)`.
pub fn type_count(k: usize) -> usize {
    binomial_u64(2 * k as u64 - 1, k as u64) as usize
}

/// All types for bundle size `k`, in lexicographic order.
pub fn enumerate_types(k: usize) -> Result<Vec<RankType>> {
    check_k(k)?;
    let mut out = Vec::with_capacity(type_count(k));
    let mut current = vec![1u8; k];
    loop {
        out.push(RankType(current.clone()));
        // Advance to the next non-decreasing vector.
        let Some(pos) = current.iter().rposition(|&e| (e as usize) < k) else {
            break;
        };
        let next = current[pos] + 1;
        for e in &mut current[pos..] {
            *e = next;
        }
    }
    Ok(out)
}

/// Canonical type of the positions one paper received from its graders.
pub fn type_of(positions: &[u8], k: usize) -> Result<RankType> {
    if positions.len() != k {
        return Err(Error::RankVector(format!(
            "expected {k} positions, got {}",
            positions.len()
        )));
    }
    let mut entries = positions.to_vec();
    entries.sort_unstable();
    RankType::new(entries)
}

/// The enumerated type space with an index for lookups.
#[derive(Debug, Clone)]
pub struct TypeSpace {
    k: usize,
    types: Vec<RankType>,
    index: HashMap<RankType, usize>,
}

impl TypeSpace {
    pub fn new(k: usize) -> Result<Self> {
        let types = enumerate_types(k)?;
        let index = types
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i))
            .collect();
        Ok(TypeSpace { k, types, index })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.types.len()
    }

    pub fn is_empty(&self) -> bool {
        self.types.is_empty()
    }

    pub fn types(&self) -> &[RankType] {
        &self.types
    }

    pub fn get(&self, index: usize) -> &RankType {
        &self.types[index]
    }

    pub fn index_of(&self, t: &RankType) -> Option<usize> {
        self.index.get(t).copied()
    }

    /// Index of the type with the given sorted entries.
    pub fn index_of_sorted(&self, sorted: &[u8]) -> Option<usize> {
        self.index.get(sorted).copied()
    }
}

/// How an ordering came to be.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Borda,
    Optimized,
    Loaded,
}

/// Tie-break policy for types with equal Borda score.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TieBreak {
    /// Lexicographically smaller type first.
    #[default]
    Lexicographic,
    /// A fixed random order of the tied types.
    Seeded(u64),
    /// Equal-score types stay tied; papers of tied types are ordered
    /// uniformly at random when a ranking is aggregated.
    Tied,
}

/// An order over all types of one bundle size, best first. This is the
/// whole description of a type-ordering aggregation rule.
///
/// Consecutive types may share a tie level; papers whose types are tied are
/// ordered uniformly at random. Orderings built with [`TypeOrdering::new`]
/// are strict.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TypeOrdering {
    k: usize,
    provenance: Provenance,
    ordered: Vec<RankType>,
    /// Per position in `ordered`: whether the type's component was solved
    /// exactly.
    exact: Vec<bool>,
    /// Per position: tie level, non-decreasing. Omitted when strict.
    #[serde(default, skip_serializing_if = "levels_are_strict")]
    levels: Vec<u32>,
}

fn levels_are_strict(levels: &[u32]) -> bool {
    levels.iter().enumerate().all(|(i, &l)| l as usize == i)
}

impl TypeOrdering {
    pub fn new(
        k: usize,
        ordered: Vec<RankType>,
        provenance: Provenance,
        exact: Vec<bool>,
    ) -> Result<Self> {
        let levels = (0..ordered.len() as u32).collect();
        let ordering = TypeOrdering {
            k,
            provenance,
            ordered,
            exact,
            levels,
        };
        ordering.validate()?;
        Ok(ordering)
    }

    /// Replaces the tie levels; `levels[i]` belongs to the `i`-th type and
    /// must be non-decreasing. Equal levels are tied.
    pub fn with_ties(mut self, levels: Vec<u32>) -> Result<Self> {
        if levels.len() != self.ordered.len() || levels.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::Ordering(
                "tie levels must be non-decreasing, one per type".into(),
            ));
        }
        // renumber densely from 0
        let mut dense = Vec::with_capacity(levels.len());
        let mut next = 0u32;
        for (i, l) in levels.iter().enumerate() {
            if i > 0 && *l != levels[i - 1] {
                next += 1;
            }
            dense.push(next);
        }
        self.levels = dense;
        Ok(self)
    }

    fn validate(&self) -> Result<()> {
        check_k(self.k)?;
        let expected = type_count(self.k);
        if self.ordered.len() != expected {
            return Err(Error::Ordering(format!(
                "{} types listed, k = {} has {expected}",
                self.ordered.len(),
                self.k
            )));
        }
        if self.exact.len() != self.ordered.len() {
            return Err(Error::Ordering(
                "exactness flags do not match the type list".into(),
            ));
        }
        if self.levels.len() != self.ordered.len()
            || self.levels.windows(2).any(|w| w[0] > w[1])
        {
            return Err(Error::Ordering(
                "tie levels must be non-decreasing, one per type".into(),
            ));
        }
        let mut seen = self.ordered.clone();
        seen.sort();
        seen.dedup();
        if seen.len() != expected || seen.iter().any(|t| t.k() != self.k) {
            return Err(Error::Ordering(
                "every type must appear exactly once".into(),
            ));
        }
        Ok(())
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn types(&self) -> &[RankType] {
        &self.ordered
    }

    pub fn exactness(&self) -> &[bool] {
        &self.exact
    }

    pub fn all_exact(&self) -> bool {
        self.exact.iter().all(|&e| e)
    }

    /// Tie level of each position in [`Self::types`].
    pub fn levels(&self) -> &[u32] {
        &self.levels
    }

    pub fn is_strict(&self) -> bool {
        self.levels.windows(2).all(|w| w[0] < w[1])
    }

    /// For each type index of `space`, its tie level in this ordering.
    pub fn type_levels(&self, space: &TypeSpace) -> Result<Vec<u32>> {
        let pos = self.positions(space)?;
        Ok(pos.into_iter().map(|p| self.levels[p]).collect())
    }

    /// For each type index of `space`, its position in this ordering.
    pub fn positions(&self, space: &TypeSpace) -> Result<Vec<usize>> {
        if space.k() != self.k {
            return Err(Error::Ordering(format!(
                "ordering is for k = {}, type space for k = {}",
                self.k,
                space.k()
            )));
        }
        let mut pos = vec![usize::MAX; space.len()];
        for (rank, t) in self.ordered.iter().enumerate() {
            let idx = space
                .index_of(t)
                .ok_or_else(|| Error::Ordering(format!("unknown type {t}")))?;
            pos[idx] = rank;
        }
        Ok(pos)
    }

    /// The same order reversed (worst first); used in accounting checks.
    pub fn reversed(&self) -> TypeOrdering {
        let mut ordered = self.ordered.clone();
        ordered.reverse();
        let mut exact = self.exact.clone();
        exact.reverse();
        let top = self.levels.last().copied().unwrap_or(0);
        let levels = self.levels.iter().rev().map(|l| top - l).collect();
        TypeOrdering {
            k: self.k,
            provenance: self.provenance,
            ordered,
            exact,
            levels,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::json("serializing ordering", e))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let mut ordering: TypeOrdering =
            serde_json::from_str(text).map_err(|e| Error::json("parsing ordering", e))?;
        if ordering.levels.is_empty() {
            ordering.levels = (0..ordering.ordered.len() as u32).collect();
        }
        ordering.validate()?;
        ordering.provenance = Provenance::Loaded;
        Ok(ordering)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}

/// Types sorted by non-increasing Borda score.
pub fn borda_ordering(k: usize, tie_break: TieBreak) -> Result<TypeOrdering> {
    let mut types = enumerate_types(k)?;
    if let TieBreak::Seeded(seed) = tie_break {
        types.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    }
    // Stable sort keeps lexicographic (or shuffled) order inside score ties.
    types.sort_by_key(|t| std::cmp::Reverse(t.borda_score()));
    let n = types.len();
    let top = k as u32 * k as u32;
    let levels: Vec<u32> = types.iter().map(|t| top - t.borda_score()).collect();
    let ordering = TypeOrdering::new(k, types, Provenance::Borda, vec![true; n])?;
    match tie_break {
        TieBreak::Tied => ordering.with_ties(levels),
        _ => Ok(ordering),
    }
}
