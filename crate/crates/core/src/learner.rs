//! The full learning loop: find an uncovered interior point, close its
//! follower action by cutting the region's upper bound until every vertex
//! passes a membership check, and finally pick the best closed vertex.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use rand::RngCore;
use thiserror::Error;

use crate::baseline::best_vertex;
use crate::finder::{find_hyperplane, FinderContext, FinderError};
use crate::geometry::{Halfspace, Point, Polytope, Side};
use crate::oracle::{MixedStrategy, Mode, QueryOracle};
use crate::rational::{BitComplexity, Rational};
use crate::sampler::{GridSampler, InteriorSampler, RhoRule, SampleDomain, SamplerError};
use crate::search::{Precision, SearchSettings};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LearnerError {
    #[error("zeta must lie strictly between 0 and 1, got {0}")]
    InvalidZeta(Rational),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum UncoveredError {
    #[error("closed regions already cover the simplex")]
    FullyCovered,
    #[error(transparent)]
    Sampler(#[from] SamplerError),
}

/// Run parameters; everything else is derived from `ζ`, `m`, `n` and `L`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LearnerConfig {
    pub zeta: Rational,
    /// Attempts allowed per failing vertex before giving up.
    pub finder_retries: usize,
    /// Attempts allowed per outer iteration to draw a point whose response
    /// is not yet closed.
    pub sample_retries: usize,
    pub rho_rule: RhoRule,
    pub precision: Precision,
}

impl LearnerConfig {
    pub fn new(zeta: Rational) -> Result<Self, LearnerError> {
        if !zeta.is_positive() || zeta >= Rational::one() {
            return Err(LearnerError::InvalidZeta(zeta));
        }
        Ok(LearnerConfig {
            zeta,
            finder_retries: 3,
            sample_retries: 3,
            rho_rule: RhoRule::default(),
            precision: Precision::default(),
        })
    }

    /// `δ = ζ / (2(n² + nm)² + n³)`.
    pub fn delta(&self, m: usize, n: usize) -> Rational {
        let (m, n) = (m as i64, n as i64);
        let t = n * n + n * m;
        &self.zeta / Rational::from(2 * t * t + n * n * n)
    }

    /// `B = max(40m³L + 2⌈log2(1/δ)⌉, 9Lm²)`.
    pub fn sample_bits(&self, m: usize, n: usize, payoff_bits: BitComplexity) -> BitComplexity {
        let mu = m as u64;
        let log_inv = self.delta(m, n).recip().ceil_log2().max(0) as u64;
        (40 * mu * mu * mu * payoff_bits + 2 * log_inv).max(9 * payoff_bits * mu * mu)
    }

    /// `λ = 2^{−m(B+4L)−1} / (2m)`.
    pub fn lambda(&self, m: usize, n: usize, payoff_bits: BitComplexity) -> Rational {
        let b = self.sample_bits(m, n, payoff_bits);
        let exp = m as u64 * (b + 4 * payoff_bits) + 1;
        Rational::new(1, BigInt::from(2 * m) << exp).expect("positive")
    }

    /// Vertex checks allowed per action: `n·C(m+n, m)`, or `n·C(m+2n−1, m)`
    /// in equivalent-actions mode.
    pub fn vertex_check_budget(&self, m: usize, n: usize, mode: Mode) -> u64 {
        let top = match mode {
            Mode::Standard => m + n,
            Mode::EquivalentActions => m + 2 * n - 1,
        };
        n as u64 * binomial(top as u64, m as u64)
    }
}

/// `C(n, k)` in `u64`, saturating.
pub fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u64, |acc, i| acc.saturating_mul(n - i) / (i + 1))
}

/// One membership check of a vertex of an upper bound.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VertexCheck {
    pub action: usize,
    pub vertex: Point,
    pub anchor: MixedStrategy,
    pub passed: bool,
}

/// A hyperplane accepted into an upper bound.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DiscoveredHyperplane {
    pub action: usize,
    pub halfspace: Halfspace,
    pub queries: u64,
}

/// Low-probability events the learner detected and retried past.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FailureEvent {
    /// The uncovered sample answered with an action that is already closed.
    ClosedActionSampled {
        action: usize,
    },
    Finder {
        action: usize,
        error: FinderError,
    },
    /// The interior anchor lies on the returned hyperplane.
    AnchorOnHyperplane {
        action: usize,
    },
    /// The returned hyperplane already bounds the region.
    DuplicateHyperplane {
        action: usize,
    },
    /// The returned hyperplane removes no vertex of the upper bound.
    NoCut {
        action: usize,
    },
    /// The cut produced a vertex above the `9Lm²` bit bound.
    VertexBitsExceeded {
        action: usize,
        bits: BitComplexity,
    },
    /// A budget ran out and the run stopped early.
    BudgetExhausted {
        action: Option<usize>,
        reason: &'static str,
    },
}

#[derive(Clone, Debug)]
pub struct LearnOutcome {
    pub p_star: MixedStrategy,
    pub value: Rational,
    pub regions: BTreeMap<usize, Polytope>,
    pub anchors: BTreeMap<usize, MixedStrategy>,
    pub query_count: u64,
    pub success: bool,
    pub events: Vec<FailureEvent>,
    pub vertex_checks: Vec<VertexCheck>,
    pub hyperplanes: Vec<DiscoveredHyperplane>,
}

/// Queries `λ·p_int + (1 − λ)·v` and reports whether the target answers.
pub fn check_vertex(
    oracle: &mut QueryOracle<'_>,
    target: usize,
    anchor: &MixedStrategy,
    vertex: &MixedStrategy,
    lambda: &Rational,
) -> bool {
    oracle.query(&vertex.toward(anchor, lambda)) == target
}

/// Draws an interior point of `Δ_m` outside every closed upper bound. The
/// uncovered set is the union of cells that each pick one cut per closed
/// action and take its opposite side; the first cell (in odometer order
/// over the cut indices) with `m` independent vertices is sampled.
pub fn sample_uncovered_interior(
    m: usize,
    closed: &BTreeMap<usize, Polytope>,
    sampler: &mut dyn InteriorSampler,
    rng: &mut dyn RngCore,
) -> Result<MixedStrategy, UncoveredError> {
    if closed.is_empty() {
        return Ok(sampler.sample(&SampleDomain::Polytope(&Polytope::simplex(m)), rng)?);
    }
    let cuts: Vec<&[Halfspace]> = closed.values().map(Polytope::cuts).collect();
    if cuts.iter().any(|c| c.is_empty()) {
        return Err(UncoveredError::FullyCovered);
    }
    let mut choice = vec![0usize; cuts.len()];
    loop {
        let cell = Polytope::from_halfspaces(m, choice.iter().zip(&cuts).map(|(&i, c)| c[i].opposite()));
        if let Some(vertices) = cell.independent_vertices(m) {
            let domain = SampleDomain::WithVertices { polytope: &cell, vertices: &vertices };
            return Ok(sampler.sample(&domain, rng)?);
        }
        // Advance the odometer, last position fastest.
        let mut pos = cuts.len();
        loop {
            if pos == 0 {
                return Err(UncoveredError::FullyCovered);
            }
            pos -= 1;
            choice[pos] += 1;
            if choice[pos] < cuts[pos].len() {
                break;
            }
            choice[pos] = 0;
        }
    }
}

struct Run<'o, 'x> {
    oracle: &'o mut QueryOracle<'x>,
    config: &'o LearnerConfig,
    sampler: GridSampler,
    search: SearchSettings,
    lambda: Rational,
    vertex_bound: BitComplexity,
    events: Vec<FailureEvent>,
    vertex_checks: Vec<VertexCheck>,
    hyperplanes: Vec<DiscoveredHyperplane>,
}

enum CloseResult {
    Closed(Polytope),
    Aborted,
}

impl Run<'_, '_> {
    fn close(&mut self, target: usize, anchor: &MixedStrategy, rng: &mut dyn RngCore) -> CloseResult {
        let m = self.oracle.m();
        let n = self.oracle.n();
        let mut upper = Polytope::simplex(m);
        let mut passed: BTreeSet<Point> = BTreeSet::new();
        let budget = self.config.vertex_check_budget(m, n, self.oracle.mode());
        let mut checks = 0u64;
        'outer: loop {
            let Some(v) = upper.vertices().iter().find(|v| !passed.contains(*v)).cloned() else {
                return CloseResult::Closed(upper);
            };
            checks += 1;
            if checks > budget {
                self.events.push(FailureEvent::BudgetExhausted { action: Some(target), reason: "vertex checks" });
                return CloseResult::Aborted;
            }
            let vs = MixedStrategy::new(v.clone()).expect("vertex lies in the simplex");
            let ok = check_vertex(self.oracle, target, anchor, &vs, &self.lambda);
            self.vertex_checks.push(VertexCheck {
                action: target,
                vertex: v.clone(),
                anchor: anchor.clone(),
                passed: ok,
            });
            if ok {
                passed.insert(v);
                continue;
            }
            if upper.cuts().len() >= n.saturating_sub(1) {
                self.events
                    .push(FailureEvent::BudgetExhausted { action: Some(target), reason: "more cuts than actions" });
                return CloseResult::Aborted;
            }
            for _ in 0..self.config.finder_retries {
                let before = self.oracle.query_count();
                let ctx = FinderContext { target, upper: &upper, anchor, vertex: &vs, search: self.search };
                let report = match find_hyperplane(&ctx, self.oracle, &mut self.sampler, rng) {
                    Ok(r) => r,
                    Err(error) => {
                        self.events.push(FailureEvent::Finder { action: target, error });
                        continue;
                    }
                };
                let h = report.hyperplane;
                let side = h.evaluate(&anchor.probabilities());
                if side.is_zero() {
                    self.events.push(FailureEvent::AnchorOnHyperplane { action: target });
                    continue;
                }
                let halfspace =
                    Halfspace::from_hyperplane(h, if side.is_positive() { Side::AtLeast } else { Side::AtMost });
                if upper.has_constraint(&halfspace) {
                    self.events.push(FailureEvent::DuplicateHyperplane { action: target });
                    continue;
                }
                if upper.vertices().iter().all(|x| halfspace.contains(x)) {
                    self.events.push(FailureEvent::NoCut { action: target });
                    continue;
                }
                let next = upper.intersect(halfspace.clone());
                let bits =
                    next.vertices().iter().flat_map(|x| x.iter().map(Rational::bit_complexity)).max().unwrap_or(0);
                if bits > self.vertex_bound {
                    self.events.push(FailureEvent::VertexBitsExceeded { action: target, bits });
                    continue;
                }
                self.hyperplanes.push(DiscoveredHyperplane {
                    action: target,
                    halfspace,
                    queries: self.oracle.query_count() - before,
                });
                upper = next;
                continue 'outer;
            }
            self.events.push(FailureEvent::BudgetExhausted { action: Some(target), reason: "hyperplane retries" });
            return CloseResult::Aborted;
        }
    }
}

/// Runs the learner to completion against `oracle`.
pub fn learn(oracle: &mut QueryOracle<'_>, config: &LearnerConfig, rng: &mut dyn RngCore) -> LearnOutcome {
    let (m, n, l) = (oracle.m(), oracle.n(), oracle.payoff_bits());
    let delta = config.delta(m, n);
    let mut run = Run {
        sampler: GridSampler::new(delta, l).with_rule(config.rho_rule),
        search: SearchSettings::new(l).with_precision(config.precision),
        lambda: config.lambda(m, n, l),
        vertex_bound: 9 * l * (m * m) as u64,
        oracle,
        config,
        events: Vec::new(),
        vertex_checks: Vec::new(),
        hyperplanes: Vec::new(),
    };
    let mut regions: BTreeMap<usize, Polytope> = BTreeMap::new();
    let mut anchors: BTreeMap<usize, MixedStrategy> = BTreeMap::new();
    let mut success = true;

    'rounds: loop {
        let mut found = None;
        for _ in 0..config.sample_retries {
            let p = match sample_uncovered_interior(m, &regions, &mut run.sampler, rng) {
                Ok(p) => p,
                Err(UncoveredError::FullyCovered) => break 'rounds,
                Err(UncoveredError::Sampler(e)) => {
                    run.events.push(FailureEvent::Finder { action: usize::MAX, error: FinderError::Sampler(e) });
                    continue;
                }
            };
            let a = run.oracle.query(&p);
            if regions.contains_key(&a) {
                run.events.push(FailureEvent::ClosedActionSampled { action: a });
                continue;
            }
            found = Some((a, p));
            break;
        }
        let Some((target, anchor)) = found else {
            run.events.push(FailureEvent::BudgetExhausted { action: None, reason: "uncovered sampling" });
            success = false;
            break;
        };
        match run.close(target, &anchor, rng) {
            CloseResult::Closed(upper) => {
                regions.insert(target, upper);
                anchors.insert(target, anchor);
            }
            CloseResult::Aborted => {
                success = false;
                break;
            }
        }
    }

    let candidates: BTreeSet<Point> = if regions.is_empty() {
        Polytope::simplex(m).vertices().iter().cloned().collect()
    } else {
        regions.values().flat_map(|r| r.vertices().iter().cloned()).collect()
    };
    let leader = run.oracle.leader_payoffs().to_vec();
    let oracle = &mut *run.oracle;
    let (p_star, value) = best_vertex(candidates.into_iter(), |p| {
        let a = oracle.query(p);
        p.probabilities().iter().zip(&leader).map(|(x, row)| x * &row[a]).sum()
    });
    LearnOutcome {
        p_star,
        value,
        regions,
        anchors,
        query_count: run.oracle.query_count(),
        success,
        events: run.events,
        vertex_checks: run.vertex_checks,
        hyperplanes: run.hyperplanes,
    }
}
