use rand::Rng;
use serde::Serialize;

use super::bundle::{generate_bundle_graph, BundleGraph};
use crate::error::{Error, Result};
use crate::noise::{GraderModel, Student};
use crate::types::{TypeOrdering, TypeSpace};

/// Parameters of a simulated exam.
#[derive(Debug, Clone)]
pub struct ExamConfig {
    pub n: usize,
    pub k: usize,
    pub grader_model: GraderModel,
    pub seed: u64,
    pub runs: usize,
}

impl ExamConfig {
    pub fn new(n: usize, k: usize, grader_model: GraderModel, seed: u64, runs: usize) -> Result<Self> {
        let c = ExamConfig {
            n,
            k,
            grader_model,
            seed,
            runs,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        self.grader_model.check_k(self.k)?;
        if self.n <= self.k {
            return Err(Error::Range(format!(
                "need more students than the bundle size (n = {}, k = {})",
                self.n, self.k
            )));
        }
        if self.runs == 0 {
            return Err(Error::Range("at least one run is required".into()));
        }
        Ok(())
    }
}

/// A graded exam before aggregation. Everything an ordering needs to rank
/// the papers is fixed here, including the tie-break keys, so that several
/// orderings applied to the same exam differ only by the ordering.
#[derive(Debug, Clone, Serialize)]
pub struct Exam {
    pub qualities: Vec<f64>,
    /// Students best first.
    pub ground_truth: Vec<usize>,
    pub bundles: BundleGraph,
    /// Per grader, their bundle best first as they ranked it.
    pub grades: Vec<Vec<u32>>,
    /// Per paper, the index of its type in the type space.
    pub paper_types: Vec<usize>,
    #[serde(skip)]
    pub tie_keys: Vec<u64>,
}

impl Exam {
    pub fn n(&self) -> usize {
        self.qualities.len()
    }

    /// Ranks papers by the level of their type, breaking ties by the exam's
    /// random keys. `levels` is indexed like the type space.
    pub fn rank_by_levels(&self, levels: &[u32]) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.n()).collect();
        order.sort_unstable_by_key(|&p| (levels[self.paper_types[p]], self.tie_keys[p], p));
        order
    }

    pub fn final_ranking(&self, ordering: &TypeOrdering, space: &TypeSpace) -> Result<Vec<usize>> {
        Ok(self.rank_by_levels(&ordering.type_levels(space)?))
    }
}

/// One exam together with the ranking one ordering produced.
#[derive(Debug, Clone, Serialize)]
pub struct ExamRun {
    pub seed: u64,
    pub exam: Exam,
    pub final_ranking: Vec<usize>,
}

/// Draws students, a bundle graph and all grades.
pub fn grade_exam<R: Rng + ?Sized>(
    n: usize,
    space: &TypeSpace,
    model: &GraderModel,
    rng: &mut R,
) -> Result<Exam> {
    let k = space.k();
    model.check_k(k)?;
    let (students, ground_truth) = loop {
        let students: Vec<Student> = (0..n).map(|_| model.draw_student(rng)).collect();
        let mut truth: Vec<usize> = (0..n).collect();
        truth.sort_by(|&a, &b| students[b].quality.total_cmp(&students[a].quality));
        if truth
            .windows(2)
            .all(|w| students[w[0]].quality != students[w[1]].quality)
        {
            break (students, truth);
        }
    };
    let bundles = generate_bundle_graph(n, k, rng)?;

    let mut positions: Vec<Vec<u8>> = vec![Vec::with_capacity(k); n];
    let mut grades = Vec::with_capacity(n);
    for (g, student) in students.iter().enumerate() {
        let mut true_order: Vec<u32> = bundles.bundle(g).to_vec();
        true_order.sort_by(|&a, &b| students[b as usize].quality.total_cmp(&students[a as usize].quality));
        let ranking = model.grade(student, &true_order, rng)?;
        for (pos, &p) in ranking.iter().enumerate() {
            positions[p as usize].push(pos as u8 + 1);
        }
        grades.push(ranking);
    }
    let paper_types = positions
        .into_iter()
        .map(|mut pos| {
            pos.sort_unstable();
            space
                .index_of_sorted(&pos)
                .ok_or_else(|| Error::RankVector(format!("positions {pos:?} are not a type for k = {k}")))
        })
        .collect::<Result<Vec<_>>>()?;
    let tie_keys = (0..n).map(|_| rng.gen()).collect();
    Ok(Exam {
        qualities: students.iter().map(|s| s.quality).collect(),
        ground_truth,
        bundles,
        grades,
        paper_types,
        tie_keys,
    })
}

/// Simulates one exam under `config` and aggregates it with `ordering`.
pub fn simulate_exam<R: Rng + ?Sized>(config: &ExamConfig, ordering: &TypeOrdering, rng: &mut R) -> Result<ExamRun> {
    config.validate()?;
    if ordering.k() != config.k {
        return Err(Error::Ordering(format!(
            "ordering is for k = {}, exam has k = {}",
            ordering.k(),
            config.k
        )));
    }
    let space = TypeSpace::new(config.k)?;
    let exam = grade_exam(config.n, &space, &config.grader_model, rng)?;
    let final_ranking = exam.final_ranking(ordering, &space)?;
    Ok(ExamRun {
        seed: config.seed,
        exam,
        final_ranking,
    })
}
