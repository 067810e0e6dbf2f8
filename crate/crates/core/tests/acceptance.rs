//! Acceptance suite: one PASS/FAIL line per criterion, with pinned
//! tolerances. Runs without the libtest harness so the report prints as is.
//!
//! Weight matrices are cached under the cargo target tmp dir; the first run
//! computes about forty of them.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use peergrade::noise::{mallows_grade, GraderModel, NoiseMatrix};
use peergrade::optimizer::{arrangement_value, optimize_weights, solve_component, OptimizedRule, DEFAULT_THRESHOLD};
use peergrade::pipeline::reference as published;
use peergrade::pipeline::reproduce::estimated_mallows;
use peergrade::pipeline::{load_matrix, Check};
use peergrade::rational::to_f64;
use peergrade::simulator::{run_batch, BatchOptions, ExamConfig};
use peergrade::theory::{
    cached_weight_matrix, is_constant_one, predicted_performance, total_probability, type_polynomial, weight,
    ObjectiveSpec, WeightMatrix,
};
use peergrade::types::{borda_ordering, enumerate_types, Provenance, RankType, TieBreak, TypeOrdering};

const THEORY_TOL: f64 = 0.02;
const SIM_TOL: f64 = 0.3;
const APX1000_TOL: f64 = 0.25;
const APX100_TOL: f64 = 0.6;
const MARGINAL_TOL: f64 = 1.5;
const QUADRATURE_TOL: f64 = 1e-6;

const SIM_N: usize = 2000;
const SIM_RUNS: usize = 100;
const SEED: u64 = 1;

/// Checks known to fail, with the reason. The suite fails if any other check
/// fails or if one of these starts passing.
const KNOWN_DEVIATIONS: &[(&str, &str)] = &[(
    "real6 opt all2all",
    "exact value is 80.087; the printed 80.01 disagrees with the printed simulation mean 80.09 for the same rule",
)];

type R<T> = peergrade::Result<T>;

fn pct(x: &BigRational) -> f64 {
    100.0 * to_f64(x)
}

fn cache_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("acceptance-weights")
}

fn weights(k: usize, m: &NoiseMatrix, spec: &ObjectiveSpec) -> R<WeightMatrix> {
    Ok(cached_weight_matrix(Some(&cache_dir()), k, m, spec)?.0)
}

fn spec(name: &str) -> ObjectiveSpec {
    ObjectiveSpec::parse(name).expect("objective")
}

struct Criterion {
    id: &'static str,
    title: &'static str,
    checks: Vec<Check>,
    seconds: f64,
}

/// Best arrangement value of `members` by trying every order.
fn brute_force_best(members: &[usize], w: &WeightMatrix) -> BigInt {
    fn go(rest: &mut Vec<usize>, placed: &mut Vec<usize>, acc: &BigInt, w: &WeightMatrix, best: &mut Option<BigInt>) {
        if rest.is_empty() {
            if best.as_ref().is_none_or(|b| acc > b) {
                *best = Some(acc.clone());
            }
            return;
        }
        for i in 0..rest.len() {
            let v = rest.remove(i);
            let mut next = acc.clone();
            for &u in placed.iter() {
                next += w.numerator(u, v);
            }
            placed.push(v);
            go(rest, placed, &next, w, best);
            placed.pop();
            rest.insert(i, v);
        }
    }
    let mut best = None;
    go(&mut members.to_vec(), &mut Vec::new(), &BigInt::zero(), w, &mut best);
    best.expect("non-empty component")
}

/// DP against brute force on every component of 2 to 8 types.
fn small_components_agree(rule: &OptimizedRule, w: &WeightMatrix, tally: &mut (usize, usize)) {
    for c in rule.plan.components.iter().filter(|c| (2..=8).contains(&c.len())) {
        let (order, _) = solve_component(c, w, DEFAULT_THRESHOLD);
        tally.0 += 1;
        if arrangement_value(&order, w) == brute_force_best(c, w) {
            tally.1 += 1;
        }
    }
}

/// Outputs of the k = 6 sweep that later criteria reuse.
struct Sweep {
    c1: Vec<Check>,
    c2: Vec<Check>,
    c3: Vec<Check>,
    c4: Vec<Check>,
    dp_tally: (usize, usize),
    mallows_opt: TypeOrdering,
    real_opt: TypeOrdering,
    real_theory: (f64, f64),
}

/// Criteria 1, 3, 4 and the k = 6 part of 2, one weight matrix at a time.
fn sweep() -> R<Sweep> {
    let borda = borda_ordering(6, TieBreak::Tied)?;
    let borda_strict = borda_ordering(6, TieBreak::Lexicographic)?;
    let mut out = Sweep {
        c1: Vec::new(),
        c2: Vec::new(),
        c3: Vec::new(),
        c4: Vec::new(),
        dp_tally: (0, 0),
        mallows_opt: borda.clone(),
        real_opt: borda.clone(),
        real_theory: (0.0, 0.0),
    };
    let rows: [(&str, NoiseMatrix, &[f64; 5], &[f64; 5]); 3] = [
        (
            "perfect",
            NoiseMatrix::identity(6)?,
            &published::PERFECT_BORDA_THEORY,
            &published::PERFECT_BORDA_THEORY,
        ),
        (
            "real6",
            load_matrix("real6")?,
            &published::REAL_OPT_THEORY,
            &published::REAL_BORDA_THEORY,
        ),
        (
            "mallows6",
            load_matrix("mallows6")?,
            &published::MALLOWS_OPT_THEORY,
            &published::MALLOWS_BORDA_THEORY,
        ),
    ];
    for (label, matrix, opt_ref, borda_ref) in rows {
        for (i, obj) in published::OBJECTIVES.iter().enumerate() {
            let s = spec(obj);
            let w = weights(6, &matrix, &s)?;
            let rule = optimize_weights(&w, DEFAULT_THRESHOLD)?;
            let b = predicted_performance(&borda, &w)?;
            out.c1.push(Check::close(format!("{label} borda {obj}"), borda_ref[i], pct(&b), THEORY_TOL));
            out.c1.push(Check::close(format!("{label} opt {obj}"), opt_ref[i], pct(&rule.predicted), THEORY_TOL));
            small_components_agree(&rule, &w, &mut out.dp_tally);

            if label == "perfect" {
                let strict = predicted_performance(&borda_strict, &w)?;
                out.c2.push(Check::holds(
                    format!("k=6 {obj}"),
                    rule.predicted == b && strict == b,
                    format!("opt {} vs borda {}", pct(&rule.predicted), pct(&b)),
                ));
            }
            if let Some(row) = published::SCC_OBJECTIVES.iter().position(|o| o == obj) {
                let reference = match label {
                    "real6" => Some(published::REAL_SCC[row]),
                    "mallows6" => Some(published::MALLOWS_SCC[row]),
                    _ => None,
                };
                if let Some(reference) = reference {
                    out.c4.push(Check::equal(
                        format!("{label} {obj} [1, 3-7, 8-11, >=12, max]"),
                        reference,
                        rule.plan.histogram().contracted_row(),
                    ));
                }
            }
            if *obj == "all2all" && label == "mallows6" {
                let got: Vec<String> = rule.ordering.types()[..14].iter().map(|t| t.to_string()).collect();
                for (p, want) in published::MALLOWS_PREFIX.iter().enumerate() {
                    let want = RankType::new(want.to_vec())?.to_string();
                    out.c3.push(Check::equal(format!("position {}", p + 1), want, got[p].clone()));
                }
                out.mallows_opt = rule.ordering.clone();
            }
            if *obj == "all2all" && label == "real6" {
                out.real_opt = rule.ordering.clone();
                out.real_theory = (pct(&b), pct(&rule.predicted));
            }
        }
    }
    Ok(out)
}

/// Criterion 2 for k = 2..5.
fn borda_optimal_small(c2: &mut Vec<Check>, tally: &mut (usize, usize)) -> R<()> {
    for k in 2..=5 {
        let matrix = NoiseMatrix::identity(k)?;
        let tied = borda_ordering(k, TieBreak::Tied)?;
        let strict = borda_ordering(k, TieBreak::Lexicographic)?;
        for obj in published::OBJECTIVES {
            let w = weights(k, &matrix, &spec(obj))?;
            let rule = optimize_weights(&w, DEFAULT_THRESHOLD)?;
            let b = predicted_performance(&tied, &w)?;
            let s = predicted_performance(&strict, &w)?;
            c2.push(Check::holds(
                format!("k={k} {obj}"),
                rule.predicted == b && s == b,
                format!("opt {} vs borda {}", pct(&rule.predicted), pct(&b)),
            ));
            small_components_agree(&rule, &w, tally);
        }
    }
    Ok(())
}

fn simulation(mallows_opt: &TypeOrdering) -> R<Vec<Check>> {
    let borda = borda_ordering(6, TieBreak::Tied)?;
    let metric = [ObjectiveSpec::all2all()];
    let mean = |model: GraderModel, rules: &[(String, TypeOrdering)], label: &str| -> R<f64> {
        let config = ExamConfig::new(SIM_N, 6, model, SEED, SIM_RUNS)?;
        let res = run_batch(&config, rules, &metric, &BatchOptions::default())?;
        Ok(100.0 * res.summary(label, "all2all").expect("summary").mean)
    };
    let rules = vec![("borda".to_string(), borda.clone()), ("opt".to_string(), mallows_opt.clone())];
    Ok(vec![
        Check::close(
            "mallows borda all2all",
            published::MALLOWS_BORDA_SIM[0],
            mean(GraderModel::MallowsQuality, &rules, "borda")?,
            SIM_TOL,
        ),
        Check::close(
            "mallows opt all2all",
            published::MALLOWS_OPT_SIM[0],
            mean(GraderModel::MallowsQuality, &rules, "opt")?,
            SIM_TOL,
        ),
        Check::close(
            "perfect borda all2all",
            published::PERFECT_BORDA_SIM[0],
            mean(GraderModel::Perfect, &rules[..1], "borda")?,
            SIM_TOL,
        ),
    ])
}

fn sample_approximation() -> R<Vec<Check>> {
    let mallows = load_matrix("mallows6")?;
    let mut checks = Vec::new();
    for (samples, tol) in [(1000u64, APX1000_TOL), (100, APX100_TOL)] {
        let estimate = estimated_mallows(samples, SEED)?;
        for (i, obj) in published::OBJECTIVES.iter().enumerate() {
            let s = spec(obj);
            let rule = optimize_weights(&weights(6, &estimate, &s)?, DEFAULT_THRESHOLD)?;
            let value = predicted_performance(&rule.ordering, &weights(6, &mallows, &s)?)?;
            checks.push(Check::close(
                format!("{samples} samples {obj}"),
                published::MALLOWS_OPT_THEORY[i],
                pct(&value),
                tol,
            ));
        }
    }
    Ok(checks)
}

fn realistic_marginals(real_opt: &TypeOrdering, theory: (f64, f64)) -> R<Vec<Check>> {
    let model = GraderModel::marginal(load_matrix("real6")?)?;
    let config = ExamConfig::new(SIM_N, 6, model, SEED, SIM_RUNS)?;
    let rules = vec![
        ("borda".to_string(), borda_ordering(6, TieBreak::Tied)?),
        ("opt".to_string(), real_opt.clone()),
    ];
    let res = run_batch(&config, &rules, &[ObjectiveSpec::all2all()], &BatchOptions::default())?;
    let mean = |label: &str| 100.0 * res.summary(label, "all2all").expect("summary").mean;
    Ok(vec![
        Check::close("real6 borda all2all vs theory", theory.0, mean("borda"), MARGINAL_TOL),
        Check::close("real6 opt all2all vs theory", theory.1, mean("opt"), MARGINAL_TOL),
    ])
}

fn polynomial_identity() -> R<Vec<Check>> {
    let mut matrices = Vec::new();
    for name in ["mallows6", "real6", "p100", "p1000"] {
        matrices.push((name.to_string(), load_matrix(name)?));
    }
    for k in 1..=6 {
        matrices.push((format!("identity({k})"), NoiseMatrix::identity(k)?));
    }
    matrices
        .into_iter()
        .map(|(name, m)| {
            let sum = total_probability(&enumerate_types(m.k())?, &m)?;
            Ok(Check::holds(
                format!("{name} sums to 1"),
                is_constant_one(&sum),
                format!("degree {}", sum.len() - 1),
            ))
        })
        .collect()
}

/// Gauss-Legendre nodes and weights on [-1, 1].
fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    (1..=n)
        .map(|i| {
            let mut x = (std::f64::consts::PI * (i as f64 - 0.25) / (n as f64 + 0.5)).cos();
            loop {
                let (mut p0, mut p1) = (1.0, x);
                for j in 2..=n {
                    let p2 = ((2 * j - 1) as f64 * x * p1 - (j - 1) as f64 * p0) / j as f64;
                    p0 = p1;
                    p1 = p2;
                }
                let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                let step = p1 / dp;
                x -= step;
                if step.abs() < 1e-15 {
                    let w = 2.0 / ((1.0 - x * x) * dp * dp);
                    return (x, w);
                }
            }
        })
        .collect()
}

fn integrate(nodes: &[(f64, f64)], a: f64, b: f64, f: impl Fn(f64) -> f64) -> f64 {
    let (mid, half) = ((a + b) / 2.0, (b - a) / 2.0);
    nodes.iter().map(|&(x, w)| w * f(mid + half * x)).sum::<f64>() * half
}

/// `Pr[paper at x gets type t]` straight from the grading model: each grader
/// sees the paper at true bundle rank `j` with binomial probability and puts
/// it at position `i` with probability `M[i][j]`.
fn type_probability(t: &[u8], m: &[Vec<f64>], x: f64) -> f64 {
    let k = m.len();
    let choose = |n: usize, r: usize| (0..r).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64);
    let position = |i: usize| -> f64 {
        (0..k)
            .map(|j| m[i][j] * choose(k - 1, j) * x.powi(j as i32) * (1.0 - x).powi((k - 1 - j) as i32))
            .sum()
    };
    let mut counts = vec![0usize; k + 1];
    t.iter().for_each(|&e| counts[e as usize] += 1);
    let fact = |n: usize| (1..=n).map(|v| v as f64).product::<f64>();
    let arrangements = fact(k) / counts.iter().map(|&c| fact(c)).product::<f64>();
    arrangements * t.iter().map(|&e| position(e as usize - 1)).product::<f64>()
}

fn quadrature() -> R<Vec<Check>> {
    let nodes = gauss_legendre(48);
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let matrices = [load_matrix("mallows6")?, load_matrix("real6")?, NoiseMatrix::identity(4)?];
    let mut objectives = ObjectiveSpec::builtins();
    objectives.push(ObjectiveSpec::custom(
        "window",
        BigRational::new(1.into(), 10.into()),
        BigRational::new(3.into(), 5.into()),
        BigRational::new(1.into(), 20.into()),
        BigRational::new(9.into(), 10.into()),
    )?);
    let mut worst = 0.0f64;
    let mut worst_label = String::new();
    for _ in 0..100 {
        let m = &matrices[rng.gen_range(0..matrices.len())];
        let types = enumerate_types(m.k())?;
        let a = &types[rng.gen_range(0..types.len())];
        let b = &types[rng.gen_range(0..types.len())];
        let s = &objectives[rng.gen_range(0..objectives.len())];
        let exact = to_f64(&weight(&type_polynomial(a, m)?, &type_polynomial(b, m)?, s));
        let mf = m.to_f64();
        let (alpha, gamma, delta) = (to_f64(s.alpha()), to_f64(s.gamma()), to_f64(s.delta()));
        let hi = to_f64(s.beta()).min(delta - gamma);
        let approx = if hi <= alpha {
            0.0
        } else {
            integrate(&nodes, alpha, hi, |x| {
                type_probability(a.entries(), &mf, x)
                    * integrate(&nodes, x + gamma, delta, |y| type_probability(b.entries(), &mf, y))
            })
        };
        let err = (exact - approx).abs();
        if err >= worst {
            worst = err;
            worst_label = format!("W({a}, {b}) {} {}", m.label(), s.name());
        }
    }
    Ok(vec![Check::holds(
        format!("100 weights within {QUADRATURE_TOL:e}, worst {worst_label}"),
        worst <= QUADRATURE_TOL,
        format!("{worst:.1e}"),
    )])
}

/// Best value over all orderings of the types by depth-first search.
fn exhaustive_best(w: &WeightMatrix) -> (i128, Vec<usize>) {
    let n = w.len();
    let num: Vec<Vec<i128>> = (0..n)
        .map(|a| (0..n).map(|b| w.numerator(a, b).to_i128().expect("small numerator")).collect())
        .collect();
    fn go(
        placed: &mut Vec<usize>,
        used: &mut [bool],
        acc: i128,
        num: &[Vec<i128>],
        best: &mut (i128, Vec<usize>),
        leaves: &mut u64,
    ) {
        if placed.len() == used.len() {
            *leaves += 1;
            if acc > best.0 {
                *best = (acc, placed.clone());
            }
            return;
        }
        for v in 0..used.len() {
            if !used[v] {
                let gain: i128 = placed.iter().map(|&u| num[u][v]).sum();
                used[v] = true;
                placed.push(v);
                go(placed, used, acc + gain, num, best, leaves);
                placed.pop();
                used[v] = false;
            }
        }
    }
    let mut best = (i128::MIN, Vec::new());
    let mut leaves = 0;
    go(&mut Vec::new(), &mut vec![false; n], 0, &num, &mut best, &mut leaves);
    assert_eq!(leaves, (1..=n as u64).product::<u64>());
    best
}

/// A random exactly doubly stochastic 3x3 matrix: a mix of permutation
/// matrices with integer weights.
fn random_balanced_k3(seed: u64) -> R<NoiseMatrix> {
    let perms = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mix: Vec<i64> = perms.iter().map(|_| rng.gen_range(1..10)).collect();
    let total: i64 = mix.iter().sum();
    let mut rows = vec![vec![BigRational::zero(); 3]; 3];
    for (p, &c) in perms.iter().zip(&mix) {
        for (rank, &pos) in p.iter().enumerate() {
            rows[pos][rank] += BigRational::new(c.into(), total.into());
        }
    }
    NoiseMatrix::new("random-k3", rows)
}

fn exhaustive_k3() -> R<Vec<Check>> {
    let mut checks = Vec::new();
    for matrix in [NoiseMatrix::identity(3)?, random_balanced_k3(5)?] {
        assert!(matrix.is_doubly_stochastic());
        for obj in ["all2all", "th-10%", "acc-5%"] {
            let w = peergrade::theory::weight_matrix(3, &matrix, &spec(obj))?;
            let rule = optimize_weights(&w, DEFAULT_THRESHOLD)?;
            let (best, order) = exhaustive_best(&w);
            let best_ordering = TypeOrdering::new(
                3,
                order.iter().map(|&v| w.types()[v].clone()).collect(),
                Provenance::Loaded,
                vec![true; order.len()],
            )?;
            let order_of_rule: Vec<usize> = rule
                .ordering
                .types()
                .iter()
                .map(|t| w.types().iter().position(|u| u == t).expect("type"))
                .collect();
            let same_value = arrangement_value(&order_of_rule, &w) == BigInt::from(best);
            let same_prediction = predicted_performance(&best_ordering, &w)? == rule.predicted;
            checks.push(Check::holds(
                format!("{} {obj}", matrix.label()),
                same_value && same_prediction,
                format!("{:.6}%", pct(&rule.predicted)),
            ));
        }
    }
    Ok(checks)
}

/// Three items, quality q: each of the three pairs keeps its relation with
/// probability q and cyclic outcomes are redrawn, so a ranking with d
/// inversions has probability proportional to q^(3-d) (1-q)^d.
fn mallows_three() -> R<Vec<Check>> {
    let draws = 100_000u32;
    let mut checks = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for q in [0.5, 0.8] {
        let mut counts: BTreeMap<Vec<u8>, u32> = BTreeMap::new();
        for _ in 0..draws {
            *counts.entry(mallows_grade(&[0u8, 1, 2], q, &mut rng)?).or_default() += 1;
        }
        let perms: [[u8; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
        let inversions = |p: &[u8; 3]| (0..3).flat_map(|i| (i + 1..3).map(move |j| (i, j))).filter(|&(i, j)| p[i] > p[j]).count();
        let mass = |p: &[u8; 3]| q.powi(3 - inversions(p) as i32) * (1.0 - q).powi(inversions(p) as i32);
        let z: f64 = perms.iter().map(mass).sum();
        let mut worst: f64 = 0.0;
        for p in &perms {
            let prob = mass(p) / z;
            let expected = draws as f64 * prob;
            let sigma = (draws as f64 * prob * (1.0 - prob)).sqrt();
            let seen = *counts.get(p.as_slice()).unwrap_or(&0) as f64;
            worst = worst.max((seen - expected).abs() / sigma);
        }
        checks.push(Check::holds(
            format!("q = {q}: largest deviation within 3 sigma"),
            worst <= 3.0 && counts.len() == 6,
            format!("{worst:.2} sigma"),
        ));
    }
    Ok(checks)
}

fn timed(id: &'static str, title: &'static str, f: impl FnOnce() -> R<Vec<Check>>) -> Criterion {
    let start = Instant::now();
    let checks = f().unwrap_or_else(|e| vec![Check::holds("ran without error", false, e.to_string())]);
    Criterion {
        id,
        title,
        checks,
        seconds: start.elapsed().as_secs_f64(),
    }
}

fn main() -> ExitCode {
    // libtest passes flags such as --list; only a plain run executes.
    if std::env::args().skip(1).any(|a| a == "--list") {
        println!("acceptance: test");
        return ExitCode::SUCCESS;
    }
    let start = Instant::now();
    let sweep_start = Instant::now();
    let mut sw = sweep().expect("k = 6 sweep");
    let sweep_secs = sweep_start.elapsed().as_secs_f64();
    let small_start = Instant::now();
    borda_optimal_small(&mut sw.c2, &mut sw.dp_tally).expect("identity sweep");
    let small_secs = small_start.elapsed().as_secs_f64();

    let (dp_total, dp_equal) = sw.dp_tally;
    let mut criteria = vec![
        Criterion { id: "1", title: "theory values, k = 6", checks: sw.c1, seconds: sweep_secs },
        Criterion { id: "2", title: "Borda optimal under perfect grading", checks: sw.c2, seconds: small_secs },
        Criterion { id: "3", title: "mallows6 all2all rule prefix", checks: sw.c3, seconds: 0.0 },
        Criterion { id: "4", title: "component size histograms", checks: sw.c4, seconds: 0.0 },
    ];
    criteria.push(timed("5", "simulation agreement, n = 2000", || simulation(&sw.mallows_opt)));
    criteria.push(timed("6", "rules from sampled matrices", sample_approximation));
    criteria.push(timed("7", "realistic marginal simulation vs theory", || {
        realistic_marginals(&sw.real_opt, sw.real_theory)
    }));
    criteria.push(timed("8a", "type probabilities sum to 1", polynomial_identity));
    criteria.push(timed("8b", "weights vs quadrature", quadrature));
    criteria.push(timed("8c", "k = 3 optimizer vs all 10! orderings", exhaustive_k3));
    criteria.push(Criterion {
        id: "8d",
        title: "component DP vs brute force",
        checks: vec![Check::holds(
            format!("{dp_total} components of 2 to 8 types"),
            dp_total > 0 && dp_equal == dp_total,
            format!("{dp_equal} equal"),
        )],
        seconds: 0.0,
    });
    criteria.push(timed("8e", "three-item Mallows distribution", mallows_three));

    let mut unexpected = Vec::new();
    let mut pinned_seen = vec![false; KNOWN_DEVIATIONS.len()];
    println!();
    for c in &criteria {
        let failed: Vec<&Check> = c.checks.iter().filter(|ch| !ch.pass).collect();
        let verdict = if failed.is_empty() { "PASS" } else { "FAIL" };
        let passed = c.checks.len() - failed.len();
        println!(
            "{verdict} criterion {:<3} {:<42} {passed}/{} checks  {:.1}s",
            c.id,
            c.title,
            c.checks.len(),
            c.seconds
        );
        for ch in failed {
            match KNOWN_DEVIATIONS.iter().position(|(label, _)| *label == ch.label) {
                Some(i) => {
                    pinned_seen[i] = true;
                    println!(
                        "       known deviation: {} expected {} got {} (tol {}): {}",
                        ch.label, ch.expected, ch.computed, ch.tolerance, KNOWN_DEVIATIONS[i].1
                    );
                }
                None => {
                    println!(
                        "       {}: expected {} got {} (tol {})",
                        ch.label, ch.expected, ch.computed, ch.tolerance
                    );
                    unexpected.push(format!("criterion {}: {}", c.id, ch.label));
                }
            }
        }
    }
    for (i, seen) in pinned_seen.iter().enumerate() {
        if !seen {
            unexpected.push(format!("known deviation `{}` no longer fails; unpin it", KNOWN_DEVIATIONS[i].0));
        }
    }
    println!("\nacceptance finished in {:.1}s", start.elapsed().as_secs_f64());
    if unexpected.is_empty() {
        ExitCode::SUCCESS
    } else {
        for u in &unexpected {
            println!("unexpected: {u}");
        }
        ExitCode::FAILURE
    }
}
