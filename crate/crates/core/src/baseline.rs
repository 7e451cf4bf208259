//! Full-knowledge reference answers: true best-response regions, the
//! optimal commitment by vertex enumeration, and a fixed-precision halving
//! search whose cost grows with the closeness of crossings.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::geometry::{Halfspace, Hyperplane, HyperplaneKind, Point, Polytope};
use crate::oracle::{leader_value, GameInstance, MixedStrategy, Mode, QueryOracle};
use crate::rational::Rational;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BaselineError {
    #[error("target hyperplane does not cross the segment")]
    NoCrossing,
    #[error("segment crosses fewer than two distinct hyperplanes")]
    TooFewCrossings,
}

/// Regions and the optimal commitment of one game.
#[derive(Clone, Debug)]
pub struct GroundTruth {
    pub regions: BTreeMap<usize, Polytope>,
    pub optimum: (MixedStrategy, Rational),
}

impl GroundTruth {
    pub fn compute(instance: &GameInstance, mode: Mode) -> Self {
        let regions = true_regions(instance, mode);
        let optimum = optimum_over(instance, &regions);
        GroundTruth { regions, optimum }
    }
}

/// `H_jk`: follower indifference between `j` and `k`; `None` for
/// equivalent actions.
pub fn follower_hyperplane(instance: &GameInstance, j: usize, k: usize) -> Option<Hyperplane> {
    Hyperplane::through_origin(instance.follower_difference(j, k), HyperplaneKind::Separating).ok()
}

/// Leader indifference between `j` and `k`; `None` when their leader
/// columns coincide.
pub fn leader_hyperplane(instance: &GameInstance, j: usize, k: usize) -> Option<Hyperplane> {
    Hyperplane::through_origin(instance.leader_difference(j, k), HyperplaneKind::LeaderSeparating).ok()
}

/// Every `P_j` (or its leader-split version in equivalent-actions mode),
/// including empty and lower-dimensional ones.
pub fn true_regions(instance: &GameInstance, mode: Mode) -> BTreeMap<usize, Polytope> {
    let (m, n) = (instance.m(), instance.n());
    let bits = instance.payoff_bits(mode);
    (0..n)
        .map(|j| {
            let mut cuts = Vec::new();
            for k in (0..n).filter(|&k| k != j) {
                let diff = instance.follower_difference(j, k);
                if let Ok(h) = Halfspace::at_least(diff, Rational::zero(), HyperplaneKind::Separating) {
                    cuts.push(h);
                } else if mode == Mode::EquivalentActions {
                    let ldiff = instance.leader_difference(j, k);
                    if let Ok(h) = Halfspace::at_least(ldiff, Rational::zero(), HyperplaneKind::LeaderSeparating) {
                        cuts.push(h);
                    }
                }
            }
            (j, Polytope::from_halfspaces(m, cuts).with_payoff_bits(bits))
        })
        .collect()
}

/// Best leader value over vertices of full-dimensional regions; ties go to
/// the lexicographically smallest strategy.
pub fn brute_force_optimal(instance: &GameInstance, mode: Mode) -> (MixedStrategy, Rational) {
    optimum_over(instance, &true_regions(instance, mode))
}

fn optimum_over(instance: &GameInstance, regions: &BTreeMap<usize, Polytope>) -> (MixedStrategy, Rational) {
    let candidates: BTreeSet<Point> =
        regions.values().filter(|r| r.is_full_dimensional()).flat_map(|r| r.vertices().iter().cloned()).collect();
    best_vertex(candidates.into_iter(), |p| leader_value(instance, p))
}

/// Maximizes `value` over `points` in ascending order, keeping the first
/// (lexicographically smallest) maximizer.
pub fn best_vertex(
    points: impl Iterator<Item = Point>,
    mut value: impl FnMut(&MixedStrategy) -> Rational,
) -> (MixedStrategy, Rational) {
    let mut best: Option<(MixedStrategy, Rational)> = None;
    for p in points {
        let s = MixedStrategy::new(p).expect("vertex of a region in the simplex");
        let v = value(&s);
        if best.as_ref().is_none_or(|(_, b)| v > *b) {
            best = Some((s, v));
        }
    }
    best.expect("at least one candidate vertex")
}

/// Parameter `t ∈ [0, 1]` where `p1 + t(p2 − p1)` meets `h`, if it does so
/// at a single point.
pub fn segment_crossing(p1: &[Rational], p2: &[Rational], h: &Hyperplane) -> Option<Rational> {
    let at0 = h.evaluate(p1);
    let slope = h.evaluate(p2) - &at0;
    if slope.is_zero() {
        return None;
    }
    let t = -at0 / slope;
    (!t.is_negative() && t <= Rational::one()).then_some(t)
}

/// Queries spent by plain halving from `p1` toward `p2`, tracking the
/// response at `p1`, until the interval is narrower than the closest pair
/// of distinct crossings of follower indifference hyperplanes with the
/// segment. `target` must be one of those hyperplanes.
pub fn naive_binary_search_queries(
    instance: &GameInstance,
    p1: &MixedStrategy,
    p2: &MixedStrategy,
    target: &Hyperplane,
) -> Result<u64, BaselineError> {
    let (a, b) = (p1.probabilities(), p2.probabilities());
    segment_crossing(&a, &b, target).ok_or(BaselineError::NoCrossing)?;
    let n = instance.n();
    let crossings: BTreeSet<Rational> = (0..n)
        .flat_map(|j| (j + 1..n).map(move |k| (j, k)))
        .filter_map(|(j, k)| follower_hyperplane(instance, j, k))
        .filter_map(|h| segment_crossing(&a, &b, &h))
        .collect();
    let ts: Vec<&Rational> = crossings.iter().collect();
    let gap = ts.windows(2).map(|w| w[1] - w[0]).min().ok_or(BaselineError::TooFewCrossings)?;

    let mut oracle = QueryOracle::new(instance.clone(), Mode::Standard);
    let target_action = crate::oracle::best_response(instance, p1);
    let (mut lo, mut hi) = (Rational::zero(), Rational::one());
    while &hi - &lo >= gap {
        let mid = (&lo + &hi) * Rational::ratio(1, 2);
        if oracle.query(&p1.toward(p2, &mid)) == target_action {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(oracle.query_count())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> Rational {
        Rational::ratio(n, d)
    }

    fn s(v: &[(i64, i64)]) -> MixedStrategy {
        MixedStrategy::new(v.iter().map(|&(a, b)| q(a, b)).collect()).unwrap()
    }

    fn int_matrix(rows: &[&[i64]]) -> Vec<Vec<Rational>> {
        rows.iter().map(|r| r.iter().map(|&x| q(x, 1)).collect()).collect()
    }

    fn cyclic_game() -> GameInstance {
        GameInstance::new(
            int_matrix(&[&[1, 0, 0], &[0, 1, 0], &[0, 0, 1]]),
            int_matrix(&[&[0, 1, 0], &[1, 0, 0], &[0, 0, 1]]),
        )
        .unwrap()
    }

    fn cut(c: [i64; 3]) -> Halfspace {
        Halfspace::at_least(c.iter().map(|&x| q(x, 1)).collect(), q(0, 1), HyperplaneKind::Separating).unwrap()
    }

    #[test]
    fn cyclic_game_regions() {
        let r = true_regions(&cyclic_game(), Mode::Standard);
        let expect = [
            Polytope::from_halfspaces(3, [cut([-1, 1, 0]), cut([0, 1, -1])]),
            Polytope::from_halfspaces(3, [cut([1, -1, 0]), cut([1, 0, -1])]),
            Polytope::from_halfspaces(3, [cut([-1, 0, 1]), cut([0, -1, 1])]),
        ];
        for (j, want) in expect.iter().enumerate() {
            let got: BTreeSet<Point> = r[&j].vertices().iter().cloned().collect();
            let exp: BTreeSet<Point> = want.vertices().iter().cloned().collect();
            assert_eq!(got, exp, "region {j}");
        }
    }

    #[test]
    fn cyclic_game_optimum() {
        let (p, v) = brute_force_optimal(&cyclic_game(), Mode::Standard);
        assert_eq!(p, MixedStrategy::pure(3, 2));
        assert_eq!(v, q(1, 1));
    }

    #[test]
    fn single_follower_action() {
        let g = GameInstance::new(vec![vec![q(1, 4)], vec![q(3, 4)], vec![q(1, 2)]], vec![vec![q(1, 1)]; 3]).unwrap();
        let r = true_regions(&g, Mode::Standard);
        assert_eq!(r.len(), 1);
        assert_eq!(r[&0].vertices().len(), 3);
        let (p, v) = brute_force_optimal(&g, Mode::Standard);
        assert_eq!(p, MixedStrategy::pure(3, 1));
        assert_eq!(v, q(3, 4));
    }

    #[test]
    fn constant_leader_payoff_picks_smallest_vertex() {
        let half = vec![vec![q(1, 2); 3]; 3];
        let g = GameInstance::new(half, cyclic_game().follower_payoffs().to_vec()).unwrap();
        let (p, v) = brute_force_optimal(&g, Mode::Standard);
        assert_eq!(v, q(1, 2));
        assert_eq!(p, MixedStrategy::pure(3, 2));
    }

    #[test]
    fn equivalent_actions_split_by_leader() {
        let g = GameInstance::new(
            vec![vec![q(1, 1), q(0, 1)], vec![q(0, 1), q(1, 1)]],
            vec![vec![q(1, 2), q(1, 2)], vec![q(1, 4), q(1, 4)]],
        )
        .unwrap();
        let std = true_regions(&g, Mode::Standard);
        assert_eq!(std[&0].vertices(), std[&1].vertices());
        let eq = true_regions(&g, Mode::EquivalentActions);
        let r0 = &eq[&0];
        let r1 = &eq[&1];
        assert!(r0.contains(&[q(1, 1), q(0, 1)]) && !r0.contains(&[q(0, 1), q(1, 1)]));
        assert!(r1.contains(&[q(0, 1), q(1, 1)]) && !r1.contains(&[q(1, 1), q(0, 1)]));
        assert!(r0.contains(&[q(1, 2), q(1, 2)]) && r1.contains(&[q(1, 2), q(1, 2)]));
    }

    fn close_segment(eps: &Rational) -> (MixedStrategy, MixedStrategy) {
        let third = q(1, 3);
        let p1 = MixedStrategy::new(vec![&third - eps, &third + eps, third.clone()]).unwrap();
        (p1, s(&[(1, 2), (1, 10), (2, 5)]))
    }

    #[test]
    fn close_crossing_segment_is_exact() {
        for k in [2, 5, 10] {
            let eps = Rational::pow2(-k);
            let (p1, p2) = close_segment(&eps);
            let h = Hyperplane::through_origin(vec![q(1, 1), q(0, 1), q(-1, 1)], HyperplaneKind::Separating).unwrap();
            let t = segment_crossing(&p1.probabilities(), &p2.probabilities(), &h).unwrap();
            // Weight on the first endpoint at the crossing.
            let lam = q(1, 1) - &t;
            let ten_eps = q(10, 1) * &eps;
            assert_eq!(lam, (&ten_eps + q(1, 1)).recip());
            let den = q(30, 1) * &eps + q(3, 1);
            let want: Vec<Rational> = [12, 6, 12].iter().map(|&c| (q(c, 1) * &eps + q(1, 1)) / &den).collect();
            assert_eq!(p1.toward(&p2, &t).probabilities(), want);
        }
    }

    #[test]
    fn naive_count_grows_with_closeness() {
        let g = cyclic_game();
        let h = follower_hyperplane(&g, 1, 2).unwrap();
        let mut counts = Vec::new();
        for k in [10i64, 20, 40] {
            let (p1, p2) = close_segment(&Rational::pow2(-k));
            let c = naive_binary_search_queries(&g, &p1, &p2, &h).unwrap();
            assert!(c + 5 >= k as u64, "k = {k}, count = {c}");
            counts.push(c);
        }
        assert!(counts.windows(2).all(|w| w[0] < w[1]));
        let (p1, p2) = close_segment(&q(1, 4));
        assert!(naive_binary_search_queries(&g, &p1, &p2, &h).unwrap() <= 8);
    }
}
