use std::fmt::Write as _;
use std::path::Path;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::rational::{format_rational, parse_rational, to_f64};
use crate::types::check_k;

const MALLOWS6: [[&str; 6]; 6] = [
    ["0.6337", "0.1753", "0.0824", "0.0494", "0.0339", "0.0253"],
    ["0.1753", "0.5112", "0.1549", "0.0768", "0.0479", "0.0339"],
    ["0.0824", "0.1549", "0.4865", "0.1500", "0.0768", "0.0494"],
    ["0.0494", "0.0768", "0.1500", "0.4865", "0.1549", "0.0824"],
    ["0.0339", "0.0479", "0.0768", "0.1549", "0.5112", "0.1753"],
    ["0.0253", "0.0339", "0.0494", "0.0824", "0.1753", "0.6337"],
];

const REAL6: [[&str; 6]; 6] = [
    ["0.463", "0.257", "0.102", "0.058", "0.058", "0.058"],
    ["0.205", "0.316", "0.227", "0.110", "0.066", "0.073"],
    ["0.161", "0.191", "0.257", "0.205", "0.132", "0.051"],
    ["0.102", "0.117", "0.191", "0.242", "0.279", "0.066"],
    ["0.044", "0.066", "0.139", "0.220", "0.301", "0.227"],
    ["0.022", "0.051", "0.080", "0.161", "0.161", "0.522"],
];

const P100: [[&str; 6]; 6] = [
    ["0.59", "0.19", "0.07", "0.08", "0.06", "0.01"],
    ["0.19", "0.44", "0.18", "0.09", "0.04", "0.06"],
    ["0.10", "0.19", "0.43", "0.19", "0.07", "0.02"],
    ["0.05", "0.05", "0.15", "0.45", "0.19", "0.11"],
    ["0.06", "0.10", "0.09", "0.14", "0.46", "0.15"],
    ["0.01", "0.03", "0.08", "0.05", "0.18", "0.65"],
];

const P1000: [[&str; 6]; 6] = [
    ["0.639", "0.186", "0.066", "0.058", "0.031", "0.020"],
    ["0.193", "0.534", "0.150", "0.055", "0.032", "0.036"],
    ["0.073", "0.149", "0.501", "0.147", "0.076", "0.054"],
    ["0.039", "0.075", "0.155", "0.497", "0.147", "0.087"],
    ["0.033", "0.038", "0.071", "0.163", "0.517", "0.178"],
    ["0.023", "0.018", "0.057", "0.080", "0.197", "0.625"],
];

/// Names accepted by [`NoiseMatrix::builtin`].
pub const BUILTIN_NAMES: &[&str] = &["mallows6", "real6", "p100", "p1000", "identity(k)"];

/// Tolerance used when none is configured: 0.02.
pub fn default_tolerance() -> BigRational {
    BigRational::new(BigInt::from(1), BigInt::from(50))
}

/// A `k x k` matrix of exact probabilities. Entry `(i, j)` (0-based) is the
/// probability that the paper with true bundle rank `j` is placed at
/// position `i` by a grader.
#[derive(Clone, PartialEq, Eq)]
pub struct NoiseMatrix {
    label: String,
    rows: Vec<Vec<BigRational>>,
}

impl std::fmt::Debug for NoiseMatrix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "NoiseMatrix `{}` ({}x{})", self.label, self.k(), self.k())?;
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|v| format!("{:.4}", to_f64(v))).collect();
            writeln!(f, "  {}", cells.join(" "))?;
        }
        Ok(())
    }
}

/// On-disk form: `{ "k": 6, "label": "...", "rows": [["0.6337", ...], ...] }`.
#[derive(Debug, Serialize, Deserialize)]
struct MatrixFile {
    k: usize,
    label: String,
    rows: Vec<Vec<String>>,
}

impl NoiseMatrix {
    /// Builds a matrix, checking it is square with entries in `[0, 1]`.
    /// Stochasticity is checked separately by [`Self::validate_and_balance`].
    pub fn new(label: impl Into<String>, rows: Vec<Vec<BigRational>>) -> Result<Self> {
        let k = rows.len();
        check_k(k)?;
        if rows.iter().any(|r| r.len() != k) {
            return Err(Error::Matrix(format!("matrix must be {k}x{k}")));
        }
        let one = BigRational::one();
        if rows.iter().flatten().any(|v| v.is_negative() || *v > one) {
            return Err(Error::Matrix("entries must lie in [0, 1]".into()));
        }
        Ok(NoiseMatrix {
            label: label.into(),
            rows,
        })
    }

    pub fn from_decimal_rows<S: AsRef<str>>(label: &str, rows: &[Vec<S>]) -> Result<Self> {
        let parsed = rows
            .iter()
            .map(|r| r.iter().map(|s| parse_rational(s.as_ref())).collect())
            .collect::<Result<Vec<Vec<_>>>>()?;
        NoiseMatrix::new(label, parsed)
    }

    /// Perfect grading.
    pub fn identity(k: usize) -> Result<Self> {
        let rows = (0..k)
            .map(|i| {
                (0..k)
                    .map(|j| if i == j { BigRational::one() } else { BigRational::zero() })
                    .collect()
            })
            .collect();
        NoiseMatrix::new(format!("identity({k})"), rows)
    }

    /// One of the published matrices, as printed (not balanced).
    pub fn builtin(name: &str) -> Result<Self> {
        let table = match name {
            "mallows6" => &MALLOWS6,
            "real6" => &REAL6,
            "p100" => &P100,
            "p1000" => &P1000,
            other => {
                if let Some(k) = parse_identity_name(other) {
                    return NoiseMatrix::identity(k);
                }
                return Err(Error::UnknownMatrix {
                    name: name.to_string(),
                    available: BUILTIN_NAMES.join(", "),
                });
            }
        };
        let rows: Vec<Vec<&str>> = table.iter().map(|r| r.to_vec()).collect();
        NoiseMatrix::from_decimal_rows(name, &rows)
    }

    pub fn k(&self) -> usize {
        self.rows.len()
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    /// Entry `(position, true_rank)`, both 0-based.
    pub fn entry(&self, position: usize, true_rank: usize) -> &BigRational {
        &self.rows[position][true_rank]
    }

    pub fn rows(&self) -> &[Vec<BigRational>] {
        &self.rows
    }

    pub fn to_f64(&self) -> Vec<Vec<f64>> {
        self.rows
            .iter()
            .map(|r| r.iter().map(to_f64).collect())
            .collect()
    }

    pub fn row_sums(&self) -> Vec<BigRational> {
        self.rows
            .iter()
            .map(|r| r.iter().fold(BigRational::zero(), |acc, v| acc + v))
            .collect()
    }

    pub fn col_sums(&self) -> Vec<BigRational> {
        (0..self.k())
            .map(|j| {
                self.rows
                    .iter()
                    .fold(BigRational::zero(), |acc, r| acc + &r[j])
            })
            .collect()
    }

    /// Largest `|sum - 1|` over rows and columns, and where it occurs.
    pub fn max_deviation(&self) -> (BigRational, String) {
        let one = BigRational::one();
        let mut worst = (BigRational::zero(), String::from("none"));
        let lines = self
            .row_sums()
            .into_iter()
            .enumerate()
            .map(|(i, s)| (format!("row {}", i + 1), s))
            .chain(
                self.col_sums()
                    .into_iter()
                    .enumerate()
                    .map(|(j, s)| (format!("column {}", j + 1), s)),
            );
        for (name, sum) in lines {
            let dev = (&sum - &one).abs();
            if dev > worst.0 {
                worst = (dev, format!("{name} sums to {}", format_rational(&sum)));
            }
        }
        worst
    }

    pub fn is_doubly_stochastic(&self) -> bool {
        self.max_deviation().0.is_zero()
    }

    /// Writes an exactly doubly stochastic matrix as a convex combination of
    /// permutation matrices. Each term is `(weight, perm)` with
    /// `perm[true_rank] = position`; the weights sum to 1.
    ///
    /// Every step takes the perfect matching on the remaining support whose
    /// smallest entry is largest, and removes it with that entry as weight.
    /// At least one entry drops to zero per step, so there are at most `k^2`
    /// terms.
    pub fn birkhoff_decomposition(&self) -> Result<Vec<(BigRational, Vec<usize>)>> {
        if !self.is_doubly_stochastic() {
            return Err(Error::NotStochastic {
                label: self.label.clone(),
                detail: format!("{} (balance it first)", self.max_deviation().1),
            });
        }
        let k = self.k();
        let mut rest = self.rows.clone();
        let mut terms = Vec::new();
        loop {
            let mut levels: Vec<BigRational> = rest.iter().flatten().filter(|v| v.is_positive()).cloned().collect();
            if levels.is_empty() {
                break;
            }
            levels.sort_unstable_by(|a, b| b.cmp(a));
            levels.dedup();
            let perm = levels
                .iter()
                .find_map(|t| perfect_matching(k, |pos, rank| rest[pos][rank] >= *t))
                .ok_or_else(|| Error::Matrix(format!("`{}` has no perfect matching on its support", self.label)))?;
            let theta = (0..k)
                .map(|rank| rest[perm[rank]][rank].clone())
                .min()
                .expect("k >= 1");
            for (rank, &pos) in perm.iter().enumerate() {
                rest[pos][rank] -= &theta;
            }
            terms.push((theta, perm));
        }
        Ok(terms)
    }

    /// Rejects the matrix if any row or column sum is further than
    /// `tolerance` from 1. With `balance`, returns an exactly doubly
    /// stochastic matrix; otherwise the input is returned unchanged.
    ///
    /// Balancing first looks for the frequency table behind printed
    /// decimals: the smallest `N` such that every entry is some `c / N`
    /// truncated (or rounded) to the printed precision, with all row and
    /// column counts summing to `N`. If there is none, alternating
    /// row/column normalization is used.
    pub fn validate_and_balance(&self, tolerance: &BigRational, balance: bool) -> Result<Self> {
        let (dev, location) = self.max_deviation();
        if dev > *tolerance {
            return Err(Error::NotStochastic {
                label: self.label.clone(),
                detail: format!(
                    "{location} (deviation {:.6} exceeds tolerance {:.6})",
                    to_f64(&dev),
                    to_f64(tolerance)
                ),
            });
        }
        if !balance || dev.is_zero() {
            return Ok(self.clone());
        }
        let balanced = match recover_counts(&self.rows) {
            Some(rows) => rows,
            None => balance_exact(&self.rows)?,
        };
        Ok(NoiseMatrix {
            label: self.label.clone(),
            rows: balanced,
        })
    }

    /// Stable content hash over the exact entries (not the label).
    pub fn content_hash(&self) -> String {
        let mut canonical = format!("k={};", self.k());
        for row in &self.rows {
            for v in row {
                let _ = write!(canonical, "{}/{};", v.numer(), v.denom());
            }
        }
        let digest = Sha256::digest(canonical.as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn to_json(&self) -> Result<String> {
        let file = MatrixFile {
            k: self.k(),
            label: self.label.clone(),
            rows: self
                .rows
                .iter()
                .map(|r| r.iter().map(format_rational).collect())
                .collect(),
        };
        serde_json::to_string_pretty(&file).map_err(|e| Error::json("serializing matrix", e))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: MatrixFile =
            serde_json::from_str(text).map_err(|e| Error::json("parsing noise matrix", e))?;
        let m = NoiseMatrix::from_decimal_rows(&file.label, &file.rows)?;
        if m.k() != file.k {
            return Err(Error::Matrix(format!(
                "header says k = {} but {} rows were given",
                file.k,
                m.k()
            )));
        }
        Ok(m)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        NoiseMatrix::from_json(&text).map_err(|e| Error::Format {
            path: path.to_path_buf(),
            detail: e.to_string(),
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        crate::io::write_atomic(path, self.to_json()?.as_bytes())
    }

    /// Resolves a builtin name, or else reads a matrix file.
    pub fn resolve(source: &str) -> Result<Self> {
        match NoiseMatrix::builtin(source) {
            Ok(m) => Ok(m),
            Err(err @ Error::UnknownMatrix { .. }) => {
                let path = Path::new(source);
                if path.exists() {
                    NoiseMatrix::load(path)
                } else {
                    Err(err)
                }
            }
            Err(other) => Err(other),
        }
    }
}

/// Kuhn's augmenting paths; returns `perm[rank] = position` when every rank
/// can be matched to a distinct allowed position.
fn perfect_matching(k: usize, allowed: impl Fn(usize, usize) -> bool) -> Option<Vec<usize>> {
    fn augment(
        rank: usize,
        k: usize,
        allowed: &dyn Fn(usize, usize) -> bool,
        seen: &mut [bool],
        owner: &mut [Option<usize>],
    ) -> bool {
        for pos in 0..k {
            if allowed(pos, rank) && !seen[pos] {
                seen[pos] = true;
                if owner[pos].is_none_or(|r| augment(r, k, allowed, seen, owner)) {
                    owner[pos] = Some(rank);
                    return true;
                }
            }
        }
        false
    }
    let mut owner: Vec<Option<usize>> = vec![None; k];
    for rank in 0..k {
        let mut seen = vec![false; k];
        if !augment(rank, k, &allowed, &mut seen, &mut owner) {
            return None;
        }
    }
    let mut perm = vec![0; k];
    for (pos, r) in owner.into_iter().enumerate() {
        perm[r.expect("perfect matching")] = pos;
    }
    Some(perm)
}

fn parse_identity_name(name: &str) -> Option<usize> {
    let rest = name.strip_prefix("identity")?;
    let digits = rest
        .strip_prefix('(')
        .and_then(|r| r.strip_suffix(')'))
        .unwrap_or(rest);
    digits.parse().ok()
}

/// Printed decimals carry `d` digits: returns `(entries * 10^d, 10^d)`.
fn decimal_grid(rows: &[Vec<BigRational>]) -> Option<(Vec<Vec<i128>>, i128)> {
    let scale = (0..=6u32).map(|d| 10i128.pow(d)).find(|&s| {
        rows.iter()
            .flatten()
            .all(|v| (v * BigRational::from_integer(BigInt::from(s))).is_integer())
    })?;
    let ints = rows
        .iter()
        .map(|r| {
            r.iter()
                .map(|v| {
                    (v * BigRational::from_integer(BigInt::from(scale)))
                        .to_integer()
                        .try_into()
                        .ok()
                })
                .collect::<Option<Vec<i128>>>()
        })
        .collect::<Option<Vec<_>>>()?;
    Some((ints, scale))
}

/// The frequency table behind a matrix of printed decimals: the smallest
/// `n` below the printing resolution such that every entry is `c / n`
/// truncated, or else rounded, to the printed digits, and every row and
/// column of counts sums to `n`. Below the resolution each entry admits at
/// most one count, so the answer is unique when it exists.
fn recover_counts(rows: &[Vec<BigRational>]) -> Option<Vec<Vec<BigRational>>> {
    let (a, scale) = decimal_grid(rows)?;
    let k = a.len();
    let truncated = |p: i128, n: i128| {
        let c = (p * n + scale - 1) / scale;
        (c * scale < (p + 1) * n).then_some(c)
    };
    let rounded = |p: i128, n: i128| {
        let c = (2 * p * n + scale) / (2 * scale);
        ((2 * c * scale - 2 * p * n).abs() <= n).then_some(c)
    };
    for n in 1..scale {
        for rule in [&truncated as &dyn Fn(i128, i128) -> Option<i128>, &rounded] {
            let counts: Option<Vec<Vec<i128>>> = a
                .iter()
                .map(|r| r.iter().map(|&p| rule(p, n)).collect())
                .collect();
            let Some(counts) = counts else { continue };
            let rows_ok = counts.iter().all(|r| r.iter().sum::<i128>() == n);
            let cols_ok = (0..k).all(|j| counts.iter().map(|r| r[j]).sum::<i128>() == n);
            if rows_ok && cols_ok {
                let den = BigInt::from(n);
                return Some(
                    counts
                        .into_iter()
                        .map(|r| {
                            r.into_iter()
                                .map(|c| BigRational::new(BigInt::from(c), den.clone()))
                                .collect()
                        })
                        .collect(),
                );
            }
        }
    }
    None
}

/// Grid used to snap the floating-point fixed point before the exact
/// correction.
const BALANCE_GRID: u64 = 1_000_000_000_000;

/// Sinkhorn/IPF balancing. The floating-point iteration converges to within
/// 1e-13 of a doubly stochastic matrix; the result is snapped to a 1e-12
/// grid and the remaining row/column deficits (multiples of 1e-12) are
/// pushed exactly onto a spanning forest of the support, so zero entries
/// stay zero and every row and column sums to exactly 1.
fn balance_exact(rows: &[Vec<BigRational>]) -> Result<Vec<Vec<BigRational>>> {
    let k = rows.len();
    let mut a: Vec<Vec<f64>> = rows.iter().map(|r| r.iter().map(to_f64).collect()).collect();
    let mut converged = false;
    for _ in 0..100_000 {
        for row in a.iter_mut() {
            let s: f64 = row.iter().sum();
            if s <= 0.0 {
                return Err(Error::Matrix("cannot balance a matrix with a zero row".into()));
            }
            row.iter_mut().for_each(|v| *v /= s);
        }
        for j in 0..k {
            let s: f64 = a.iter().map(|r| r[j]).sum();
            if s <= 0.0 {
                return Err(Error::Matrix(
                    "cannot balance a matrix with a zero column".into(),
                ));
            }
            a.iter_mut().for_each(|r| r[j] /= s);
        }
        let worst_row = a
            .iter()
            .map(|r| (r.iter().sum::<f64>() - 1.0).abs())
            .fold(0.0, f64::max);
        if worst_row < 1e-13 {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::Matrix(
            "row/column normalization did not converge (no doubly stochastic scaling exists)"
                .into(),
        ));
    }

    // Work in integer multiples of 1/BALANCE_GRID.
    let grid = BALANCE_GRID as i64;
    let mut units: Vec<Vec<i64>> = a
        .iter()
        .map(|r| r.iter().map(|&v| (v * BALANCE_GRID as f64).round() as i64).collect())
        .collect();
    // demand[i] for rows 0..k, demand[k + j] for columns.
    let mut demand: Vec<i64> = units
        .iter()
        .map(|r| grid - r.iter().sum::<i64>())
        .chain((0..k).map(|j| grid - units.iter().map(|r| r[j]).sum::<i64>()))
        .collect();

    let support = |u: usize, v: usize| -> bool {
        let (i, j) = if u < k { (u, v - k) } else { (v, u - k) };
        !rows[i][j].is_zero()
    };
    let mut parent = vec![usize::MAX; 2 * k];
    let mut visited = vec![false; 2 * k];
    let mut order = Vec::with_capacity(2 * k);
    for root in 0..2 * k {
        if visited[root] {
            continue;
        }
        visited[root] = true;
        let mut queue = std::collections::VecDeque::from([root]);
        while let Some(u) = queue.pop_front() {
            order.push(u);
            let others = if u < k { k..2 * k } else { 0..k };
            for v in others {
                if !visited[v] && support(u, v) {
                    visited[v] = true;
                    parent[v] = u;
                    queue.push_back(v);
                }
            }
        }
    }
    for &v in order.iter().rev() {
        let p = parent[v];
        if p == usize::MAX {
            if demand[v] != 0 {
                return Err(Error::Matrix(
                    "support of the matrix admits no exact doubly stochastic correction".into(),
                ));
            }
            continue;
        }
        let flow = demand[v];
        let (i, j) = if v < k { (v, p - k) } else { (p, v - k) };
        units[i][j] += flow;
        demand[p] -= flow;
        demand[v] = 0;
        if units[i][j] < 0 {
            return Err(Error::Matrix(
                "exact balancing correction produced a negative entry".into(),
            ));
        }
    }
    let den = BigInt::from(BALANCE_GRID);
    Ok(units
        .into_iter()
        .map(|r| {
            r.into_iter()
                .map(|u| BigRational::new(BigInt::from(u), den.clone()))
                .collect()
        })
        .collect())
}
