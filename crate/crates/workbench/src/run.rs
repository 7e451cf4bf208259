//! Learner runs, baseline verification, sweeps and the close-crossing
//! benchmark.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use stackelberg_core::baseline::{
    follower_hyperplane, naive_binary_search_queries, true_regions, BaselineError, GroundTruth,
};
use stackelberg_core::learner::{binomial, learn, LearnOutcome, LearnerConfig, LearnerError};
use stackelberg_core::oracle::{best_response, GameInstance, MixedStrategy, Mode, QueryOracle, TranscriptSink};
use stackelberg_core::search::{binary_search, SearchError, SearchSettings};
use stackelberg_core::Rational;
use thiserror::Error;

use crate::generate::{close_crossing_segment, generate_random};
use crate::io::{Frac, RunReport};

pub struct RunOutput {
    pub report: RunReport,
    pub outcome: LearnOutcome,
}

/// Learns `instance` from a fresh oracle seeded with `seed`.
pub fn run_learner(
    instance: &GameInstance,
    zeta: &Rational,
    seed: u64,
    mode: Mode,
    sink: Option<&mut dyn TranscriptSink>,
) -> Result<RunOutput, LearnerError> {
    let config = LearnerConfig::new(zeta.clone())?;
    let mut oracle = QueryOracle::new(instance.clone(), mode);
    if let Some(sink) = sink {
        oracle = oracle.with_sink(sink);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let outcome = learn(&mut oracle, &config, &mut rng);
    let report = RunReport {
        seed,
        zeta: Frac(zeta.clone()),
        mode: mode.into(),
        m: instance.m(),
        n: instance.n(),
        payoff_bits: instance.payoff_bits(mode),
        queries: outcome.query_count,
        value: Frac(outcome.value.clone()),
        p_star: outcome.p_star.probabilities().into_iter().map(Frac).collect(),
        success: outcome.success,
        baseline_value: None,
        matches: None,
    };
    Ok(RunOutput { report, outcome })
}

/// Recomputes the baseline optimum and records the comparison in `report`.
pub fn verify(instance: &GameInstance, report: &mut RunReport) -> bool {
    let (_, baseline) = GroundTruth::compute(instance, report.mode.into()).optimum;
    report.set_baseline(baseline);
    report.matches == Some(true)
}

/// `n²(m⁷·L·log2(1/ζ) + C(m+n, m))`, with `C(m+2n, m)` in
/// equivalent-actions mode.
pub fn query_budget(m: usize, n: usize, payoff_bits: u64, zeta: &Rational, mode: Mode) -> f64 {
    let top = match mode {
        Mode::Standard => m + n,
        Mode::EquivalentActions => m + 2 * n,
    };
    let log_inv = (1.0 / zeta.to_f64()).log2();
    let n2 = (n * n) as f64;
    n2 * ((m as f64).powi(7) * payoff_bits as f64 * log_inv + binomial(top as u64, m as u64) as f64)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub m: usize,
    pub n: usize,
    pub seed: u64,
    #[serde(rename = "L")]
    pub payoff_bits: u64,
    pub queries: u64,
    pub budget: f64,
    pub ratio: f64,
    pub success: bool,
    pub events: usize,
    #[serde(rename = "match")]
    pub matches: bool,
    pub vertex_checks: usize,
    pub check_disagreements: usize,
}

/// One sweep run on `generate_random(m, n, bits, seed)`, learning with the
/// same seed and comparing every vertex check with exact membership.
pub fn sweep_run(instance: &GameInstance, seed: u64, zeta: &Rational, mode: Mode) -> Result<SweepRow, LearnerError> {
    let mut out = run_learner(instance, zeta, seed, mode, None)?;
    let matches = verify(instance, &mut out.report);
    let truth = true_regions(instance, mode);
    let check_disagreements =
        out.outcome.vertex_checks.iter().filter(|c| truth[&c.action].contains(&c.vertex) != c.passed).count();
    let r = &out.report;
    let budget = query_budget(r.m, r.n, r.payoff_bits, zeta, mode);
    Ok(SweepRow {
        m: r.m,
        n: r.n,
        seed,
        payoff_bits: r.payoff_bits,
        queries: r.queries,
        budget,
        ratio: r.queries as f64 / budget,
        success: r.success,
        events: out.outcome.events.len(),
        matches,
        vertex_checks: out.outcome.vertex_checks.len(),
        check_disagreements,
    })
}

/// Runs `runs` random games, cycling through `shapes`; run `i` uses seed
/// `seed + i` for both the instance and the learner.
pub fn sweep(
    shapes: &[(usize, usize)],
    bits: u32,
    zeta: &Rational,
    runs: usize,
    seed: u64,
) -> Result<Vec<SweepRow>, LearnerError> {
    (0..runs)
        .map(|i| {
            let (m, n) = shapes[i % shapes.len()];
            let s = seed + i as u64;
            sweep_run(&generate_random(m, n, bits, s), s, zeta, Mode::Standard)
        })
        .collect()
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BenchError {
    #[error("benchmark needs a 3x3 game, got {m}x{n}")]
    Shape { m: usize, n: usize },
    #[error("exponent {0} is outside 2..=1000")]
    Exponent(u32),
    #[error("no indifference plane between follower actions 1 and 3")]
    MissingPlane,
    #[error(transparent)]
    Baseline(#[from] BaselineError),
    #[error(transparent)]
    Search(#[from] SearchError),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BenchRow {
    pub k: u32,
    pub naive: u64,
    pub exact: u64,
}

/// Fixed endpoints of bounded bit complexity used for the exact search.
pub fn bounded_segment() -> (MixedStrategy, MixedStrategy) {
    let q = Rational::ratio;
    (
        MixedStrategy::new(vec![q(1, 4), q(1, 2), q(1, 4)]).expect("valid"),
        MixedStrategy::new(vec![q(1, 2), q(1, 10), q(2, 5)]).expect("valid"),
    )
}

/// For each `ε = 2^{−k}`: the naive fixed-precision halving count on the
/// close-crossing segment, and the exact search count on bounded endpoints.
pub fn bench_exp_binary(instance: &GameInstance, ks: &[u32]) -> Result<Vec<BenchRow>, BenchError> {
    if (instance.m(), instance.n()) != (3, 3) {
        return Err(BenchError::Shape { m: instance.m(), n: instance.n() });
    }
    let plane = follower_hyperplane(instance, 0, 2).ok_or(BenchError::MissingPlane)?;
    let settings = SearchSettings::new(instance.payoff_bits(Mode::Standard));
    let (b1, b2) = bounded_segment();
    let target = best_response(instance, &b1);
    ks.iter()
        .map(|&k| {
            if !(2..=1000).contains(&k) {
                return Err(BenchError::Exponent(k));
            }
            let (p1, p2) = close_crossing_segment(&Rational::pow2(-(k as i64)));
            let naive = naive_binary_search_queries(instance, &p1, &p2, &plane)?;
            let mut oracle = QueryOracle::new(instance.clone(), Mode::Standard);
            let exact = binary_search(&mut oracle, target, &b1, &b2, settings)?.queries;
            Ok(BenchRow { k, naive, exact })
        })
        .collect()
}
