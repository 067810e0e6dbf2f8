use std::path::Path;

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::Rng;

use super::kendall::InversionCounts;
use super::matrix::NoiseMatrix;
use crate::error::{Error, Result};
use crate::rational::{parse_rational, to_f64};
use crate::types::check_k;

/// Attempts before a Mallows draw gives up. At `q = 1/2` and six items the
/// acyclic probability is 720/2^15, so the expected count is about 46.
const MALLOWS_MAX_ATTEMPTS: usize = 1_000_000;

/// Restarts allowed for the sequential marginal sampler.
const MARGINAL_MAX_ATTEMPTS: usize = 1_000;

/// Ranks `true_order` (best first) as a grader of quality `quality` would:
/// every pair keeps its true relation with probability `quality`, pairs are
/// decided independently, and the whole draw restarts whenever the result
/// contains a cycle. Returns the ranking, best first.
pub fn mallows_grade<T: Clone, R: Rng + ?Sized>(
    true_order: &[T],
    quality: f64,
    rng: &mut R,
) -> Result<Vec<T>> {
    mallows_grade_counted(true_order, quality, rng).map(|(r, _)| r)
}

/// [`mallows_grade`], also reporting how many draws were needed.
pub fn mallows_grade_counted<T: Clone, R: Rng + ?Sized>(
    true_order: &[T],
    quality: f64,
    rng: &mut R,
) -> Result<(Vec<T>, usize)> {
    let m = true_order.len();
    if m < 2 {
        return Err(Error::Range(format!("cannot grade a bundle of {m} item(s)")));
    }
    if !(0.5..=1.0).contains(&quality) {
        return Err(Error::Range(format!(
            "grader quality {quality} outside [1/2, 1]"
        )));
    }
    let mut wins = vec![0usize; m];
    let mut seen = vec![false; m];
    for attempt in 1..=MALLOWS_MAX_ATTEMPTS {
        wins.iter_mut().for_each(|w| *w = 0);
        for i in 0..m {
            for j in i + 1..m {
                if rng.gen::<f64>() < quality {
                    wins[i] += 1;
                } else {
                    wins[j] += 1;
                }
            }
        }
        // A tournament is acyclic exactly when its win counts are 0..m-1.
        seen.iter_mut().for_each(|s| *s = false);
        let mut acyclic = true;
        for &w in &wins {
            if seen[w] {
                acyclic = false;
                break;
            }
            seen[w] = true;
        }
        if acyclic {
            let mut ranking = vec![None; m];
            for (i, &w) in wins.iter().enumerate() {
                ranking[m - 1 - w] = Some(true_order[i].clone());
            }
            return Ok((ranking.into_iter().map(Option::unwrap).collect(), attempt));
        }
    }
    Err(Error::Sampling(format!(
        "no acyclic relation after {MALLOWS_MAX_ATTEMPTS} draws"
    )))
}

/// One bubble of an empirical grader table: a grade in the traditional exam,
/// a grading error measured as Kendall-tau distance, and how many students
/// showed that combination.
#[derive(Debug, Clone, PartialEq)]
pub struct Bubble {
    pub quality: BigRational,
    pub kt_error: u32,
    pub count: u64,
}

/// Empirical (grade, grading error) support from which realistic graders
/// are drawn, weighted by count.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalGraderTable {
    bubbles: Vec<Bubble>,
    total: u64,
}

impl EmpiricalGraderTable {
    pub fn new(bubbles: Vec<Bubble>) -> Result<Self> {
        if bubbles.is_empty() {
            return Err(Error::Range("empirical grader table is empty".into()));
        }
        if let Some(b) = bubbles.iter().find(|b| b.count == 0) {
            return Err(Error::Range(format!(
                "bubble (quality {}, error {}) has zero count",
                b.quality, b.kt_error
            )));
        }
        let total = bubbles.iter().map(|b| b.count).sum();
        Ok(EmpiricalGraderTable { bubbles, total })
    }

    /// Reads `quality,kt_error,count` rows; a header line is optional.
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .comment(Some(b'#'))
            .from_reader(text.as_bytes());
        let mut bubbles = Vec::new();
        for (line, record) in reader.records().enumerate() {
            let record =
                record.map_err(|e| Error::Range(format!("grader table line {}: {e}", line + 1)))?;
            if record.len() != 3 {
                return Err(Error::Range(format!(
                    "grader table line {}: expected 3 columns",
                    line + 1
                )));
            }
            if line == 0 && record[0].eq_ignore_ascii_case("quality") {
                continue;
            }
            let bad = |what: &str| Error::Range(format!("grader table line {}: bad {what}", line + 1));
            bubbles.push(Bubble {
                quality: parse_rational(&record[0]).map_err(|_| bad("quality"))?,
                kt_error: record[1].parse().map_err(|_| bad("kt_error"))?,
                count: record[2].parse().map_err(|_| bad("count"))?,
            });
        }
        EmpiricalGraderTable::new(bubbles)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        EmpiricalGraderTable::from_csv(&text)
    }

    pub fn bubbles(&self) -> &[Bubble] {
        &self.bubbles
    }

    /// Checks every grading error is achievable with bundles of size `k`.
    pub fn validate(&self, k: usize) -> Result<()> {
        let max = (k * (k - 1) / 2) as u32;
        match self.bubbles.iter().find(|b| b.kt_error > max) {
            Some(b) => Err(Error::Range(format!(
                "Kendall-tau error {} exceeds {max} for bundles of size {k}",
                b.kt_error
            ))),
            None => Ok(()),
        }
    }

    /// A bubble drawn with probability proportional to its count.
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> &Bubble {
        let mut ticket = rng.gen_range(0..self.total);
        for b in &self.bubbles {
            if ticket < b.count {
                return b;
            }
            ticket -= b.count;
        }
        unreachable!("ticket below total count")
    }
}

/// Samples rankings whose position marginals follow a noise matrix.
///
/// The default scheme draws a permutation from a Birkhoff decomposition of
/// the matrix, so the marginals are reproduced exactly. The sequential scheme
/// places true ranks one at a time: rank `j` draws its position from column
/// `j` restricted to the positions still free, renormalized. That one is
/// exact for `k = 2` only and drifts away from the matrix for larger bundles.
#[derive(Debug, Clone)]
pub struct MarginalSampler {
    matrix: NoiseMatrix,
    scheme: Scheme,
}

#[derive(Debug, Clone)]
enum Scheme {
    /// Cumulative weights and `perm[rank] = position` per term.
    Birkhoff { cumulative: Vec<f64>, perms: Vec<Vec<usize>> },
    Sequential { columns: Vec<Vec<f64>> },
}

impl MarginalSampler {
    /// Exact sampler; the matrix must be exactly doubly stochastic.
    pub fn new(matrix: NoiseMatrix) -> Result<Self> {
        let terms = matrix.birkhoff_decomposition()?;
        let mut acc = 0.0;
        let mut cumulative = Vec::with_capacity(terms.len());
        let mut perms = Vec::with_capacity(terms.len());
        for (weight, perm) in terms {
            acc += to_f64(&weight);
            cumulative.push(acc);
            perms.push(perm);
        }
        Ok(MarginalSampler {
            matrix,
            scheme: Scheme::Birkhoff { cumulative, perms },
        })
    }

    /// Rank-by-rank sampler (approximate for `k > 2`).
    pub fn sequential(matrix: NoiseMatrix) -> Self {
        let rows = matrix.to_f64();
        let k = matrix.k();
        let columns = (0..k).map(|j| (0..k).map(|i| rows[i][j]).collect()).collect();
        MarginalSampler {
            matrix,
            scheme: Scheme::Sequential { columns },
        }
    }

    pub fn matrix(&self) -> &NoiseMatrix {
        &self.matrix
    }

    pub fn k(&self) -> usize {
        self.matrix.k()
    }

    pub fn is_exact(&self) -> bool {
        matches!(self.scheme, Scheme::Birkhoff { .. })
    }

    /// Permutes `true_order` (best first), returning the grader's ranking.
    pub fn sample<T: Clone, R: Rng + ?Sized>(&self, true_order: &[T], rng: &mut R) -> Result<Vec<T>> {
        let k = self.k();
        if true_order.len() != k {
            return Err(Error::Dimension(format!(
                "matrix is {k}x{k} but the bundle has {} items",
                true_order.len()
            )));
        }
        match &self.scheme {
            Scheme::Birkhoff { cumulative, perms } => {
                let total = *cumulative.last().expect("at least one term");
                let u = rng.gen::<f64>() * total;
                let t = cumulative.partition_point(|&c| c <= u).min(perms.len() - 1);
                let mut out: Vec<Option<T>> = vec![None; k];
                for (rank, &pos) in perms[t].iter().enumerate() {
                    out[pos] = Some(true_order[rank].clone());
                }
                Ok(out.into_iter().map(|x| x.expect("permutation")).collect())
            }
            Scheme::Sequential { columns } => self.sample_sequential(columns, true_order, rng),
        }
    }

    fn sample_sequential<T: Clone, R: Rng + ?Sized>(
        &self,
        columns: &[Vec<f64>],
        true_order: &[T],
        rng: &mut R,
    ) -> Result<Vec<T>> {
        let k = self.k();
        let mut slots: Vec<Option<usize>> = vec![None; k];
        'attempt: for _ in 0..MARGINAL_MAX_ATTEMPTS {
            slots.iter_mut().for_each(|s| *s = None);
            for (rank, column) in columns.iter().enumerate() {
                let mass: f64 = (0..k).filter(|&i| slots[i].is_none()).map(|i| column[i]).sum();
                if mass <= 0.0 {
                    continue 'attempt;
                }
                let mut u = rng.gen::<f64>() * mass;
                let mut pick = None;
                for i in (0..k).filter(|&i| slots[i].is_none()) {
                    pick = Some(i);
                    if u < column[i] {
                        break;
                    }
                    u -= column[i];
                }
                // Rounding can walk past the last positive cell; fall back to
                // the last free position with positive mass.
                let mut pos = pick.expect("a free position exists");
                if column[pos] <= 0.0 {
                    pos = (0..k)
                        .rev()
                        .find(|&i| slots[i].is_none() && column[i] > 0.0)
                        .expect("positive mass on a free position");
                }
                slots[pos] = Some(rank);
            }
            return Ok(slots
                .into_iter()
                .map(|s| true_order[s.expect("all positions filled")].clone())
                .collect());
        }
        Err(Error::Sampling(format!(
            "marginal sampler for `{}` failed {MARGINAL_MAX_ATTEMPTS} times",
            self.matrix.label()
        )))
    }
}

/// Free-function form of [`MarginalSampler::sample`].
pub fn marginal_sample<T: Clone, R: Rng + ?Sized>(
    matrix: &NoiseMatrix,
    true_order: &[T],
    rng: &mut R,
) -> Result<Vec<T>> {
    MarginalSampler::new(matrix.clone())?.sample(true_order, rng)
}

/// How graders rank their bundles.
#[derive(Debug, Clone)]
pub enum GraderModel {
    /// Every bundle is ranked correctly.
    Perfect,
    /// Quality uniform on `[1/2, 1]`; pairwise flips with probability
    /// `1 - quality`, redrawn on cycles.
    MallowsQuality,
    /// Quality and grading error drawn from an empirical table; the ranking
    /// is uniform among those at the drawn Kendall-tau distance.
    Empirical(EmpiricalGraderTable, InversionCounts),
    /// Rankings drawn to follow a noise matrix's marginals; quality uniform
    /// on `[1/2, 1]` and unrelated to grading.
    Marginal(MarginalSampler),
}

/// A simulated student: where they stand in the ground truth and how they
/// grade.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Student {
    pub quality: f64,
    /// Grading error for empirical graders.
    pub kt_error: Option<u32>,
}

impl GraderModel {
    pub fn empirical(table: EmpiricalGraderTable) -> Result<Self> {
        Ok(GraderModel::Empirical(table, InversionCounts::new(crate::types::MAX_K)?))
    }

    pub fn marginal(matrix: NoiseMatrix) -> Result<Self> {
        Ok(GraderModel::Marginal(MarginalSampler::new(matrix)?))
    }

    pub fn name(&self) -> &'static str {
        match self {
            GraderModel::Perfect => "perfect",
            GraderModel::MallowsQuality => "mallows",
            GraderModel::Empirical(..) => "empirical",
            GraderModel::Marginal(s) if s.is_exact() => "marginal",
            GraderModel::Marginal(_) => "marginal-sequential",
        }
    }

    pub fn check_k(&self, k: usize) -> Result<()> {
        check_k(k)?;
        match self {
            GraderModel::Empirical(table, _) => table.validate(k),
            GraderModel::Marginal(s) if s.k() != k => Err(Error::Dimension(format!(
                "grader matrix is {0}x{0}, bundles have {k} papers",
                s.k()
            ))),
            _ => Ok(()),
        }
    }

    pub fn draw_student<R: Rng + ?Sized>(&self, rng: &mut R) -> Student {
        match self {
            GraderModel::Empirical(table, _) => {
                let bubble = table.draw(rng);
                // Tiny jitter separates students sharing a bubble.
                let quality = to_f64(&bubble.quality) + rng.gen::<f64>() * 1e-6;
                Student {
                    quality,
                    kt_error: Some(bubble.kt_error),
                }
            }
            _ => Student {
                quality: rng.gen_range(0.5..=1.0),
                kt_error: None,
            },
        }
    }

    /// The ranking `student` produces for a bundle given best first.
    pub fn grade<T: Clone, R: Rng + ?Sized>(
        &self,
        student: &Student,
        bundle_true_order: &[T],
        rng: &mut R,
    ) -> Result<Vec<T>> {
        match self {
            GraderModel::Perfect => Ok(bundle_true_order.to_vec()),
            GraderModel::MallowsQuality => mallows_grade(bundle_true_order, student.quality, rng),
            GraderModel::Empirical(_, counts) => {
                let d = student.kt_error.ok_or_else(|| {
                    Error::Sampling("empirical grader without a grading error".into())
                })?;
                counts.sample(bundle_true_order, d as usize, rng)
            }
            GraderModel::Marginal(s) => s.sample(bundle_true_order, rng),
        }
    }
}

/// Estimates a noise matrix by simulating `samples` independent graders, each
/// ranking one bundle of `k` papers. Entry `(i, j)` is the fraction of
/// episodes placing the paper of true rank `j` at position `i`; since every
/// episode adds one permutation matrix the result is exactly doubly
/// stochastic.
pub fn estimate_matrix<R: Rng + ?Sized>(
    model: &GraderModel,
    k: usize,
    samples: u64,
    rng: &mut R,
) -> Result<NoiseMatrix> {
    model.check_k(k)?;
    if samples == 0 {
        return Err(Error::Range("at least one sample is required".into()));
    }
    let mut counts = vec![vec![0u64; k]; k];
    let true_order: Vec<usize> = (0..k).collect();
    for _ in 0..samples {
        let ranking = if k == 1 {
            true_order.clone()
        } else {
            let student = model.draw_student(rng);
            model.grade(&student, &true_order, rng)?
        };
        for (position, &item) in ranking.iter().enumerate() {
            counts[position][item] += 1;
        }
    }
    let den = BigInt::from(samples);
    let rows = counts
        .into_iter()
        .map(|r| {
            r.into_iter()
                .map(|c| BigRational::new(BigInt::from(c), den.clone()))
                .collect()
        })
        .collect();
    NoiseMatrix::new(format!("{}-{samples}", model.name()), rows)
}
