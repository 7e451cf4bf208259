//! The follower: exact tie-broken best responses behind a metered oracle.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::rational::{BitComplexity, Rational};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum InstanceError {
    #[error("game needs at least one action per player")]
    Empty,
    #[error("{matrix} payoff matrix is not {m}x{n}")]
    Shape { matrix: &'static str, m: usize, n: usize },
    #[error("{matrix} payoff at row {row}, column {col} is {value}, outside [0, 1]")]
    OutOfRange { matrix: &'static str, row: usize, col: usize, value: Rational },
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum StrategyError {
    #[error("strategy has {got} entries, expected {expected}")]
    Dimension { expected: usize, got: usize },
    #[error("strategy entry {0} is negative")]
    Negative(usize),
    #[error("strategy entries sum to {0}, not 1")]
    NotNormalized(Rational),
}

/// Whether follower actions with identical payoff columns are separated by
/// the leader's payoffs when defining regions and payoff bit-complexity.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Mode {
    #[default]
    Standard,
    EquivalentActions,
}

/// A bimatrix game with payoffs in `[0, 1]`; rows are leader actions.
#[derive(Clone, Debug)]
pub struct GameInstance {
    m: usize,
    n: usize,
    leader: Vec<Vec<Rational>>,
    follower: Vec<Vec<Rational>>,
    // Columns scaled by a common denominator, for comparisons in integers.
    leader_cols: Vec<Vec<BigInt>>,
    follower_cols: Vec<Vec<BigInt>>,
}

impl PartialEq for GameInstance {
    fn eq(&self, other: &Self) -> bool {
        self.leader == other.leader && self.follower == other.follower
    }
}

fn scaled_columns(mat: &[Vec<Rational>], n: usize) -> Vec<Vec<BigInt>> {
    let l = mat.iter().flatten().fold(BigInt::one(), |acc, q| acc.lcm(q.denom()));
    (0..n).map(|j| mat.iter().map(|row| row[j].numer() * (&l / row[j].denom())).collect()).collect()
}

fn max_bits(mat: &[Vec<Rational>]) -> BitComplexity {
    mat.iter().flatten().map(Rational::bit_complexity).max().unwrap_or(0)
}

impl GameInstance {
    pub fn new(leader: Vec<Vec<Rational>>, follower: Vec<Vec<Rational>>) -> Result<Self, InstanceError> {
        let m = leader.len();
        let n = leader.first().map_or(0, Vec::len);
        if m == 0 || n == 0 {
            return Err(InstanceError::Empty);
        }
        for (name, mat) in [("leader", &leader), ("follower", &follower)] {
            if mat.len() != m || mat.iter().any(|r| r.len() != n) {
                return Err(InstanceError::Shape { matrix: name, m, n });
            }
            for (row, r) in mat.iter().enumerate() {
                for (col, v) in r.iter().enumerate() {
                    if v.is_negative() || *v > Rational::one() {
                        return Err(InstanceError::OutOfRange { matrix: name, row, col, value: v.clone() });
                    }
                }
            }
        }
        let leader_cols = scaled_columns(&leader, n);
        let follower_cols = scaled_columns(&follower, n);
        Ok(GameInstance { m, n, leader, follower, leader_cols, follower_cols })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn leader_payoffs(&self) -> &[Vec<Rational>] {
        &self.leader
    }

    pub fn follower_payoffs(&self) -> &[Vec<Rational>] {
        &self.follower
    }

    pub fn follower_bits(&self) -> BitComplexity {
        max_bits(&self.follower)
    }

    pub fn leader_bits(&self) -> BitComplexity {
        max_bits(&self.leader)
    }

    /// `L`: follower payoffs only, or both matrices in equivalent-actions mode.
    pub fn payoff_bits(&self, mode: Mode) -> BitComplexity {
        match mode {
            Mode::Standard => self.follower_bits(),
            Mode::EquivalentActions => self.follower_bits().max(self.leader_bits()),
        }
    }

    /// `u_f(·, j) − u_f(·, k)`.
    pub fn follower_difference(&self, j: usize, k: usize) -> Vec<Rational> {
        self.follower.iter().map(|r| &r[j] - &r[k]).collect()
    }

    /// `u_ℓ(·, j) − u_ℓ(·, k)`.
    pub fn leader_difference(&self, j: usize, k: usize) -> Vec<Rational> {
        self.leader.iter().map(|r| &r[j] - &r[k]).collect()
    }

    /// Identical follower payoff columns.
    pub fn equivalent(&self, j: usize, k: usize) -> bool {
        self.follower.iter().all(|r| r[j] == r[k])
    }

    pub fn follower_utility(&self, p: &[Rational], j: usize) -> Rational {
        p.iter().zip(&self.follower).map(|(pi, r)| pi * &r[j]).sum()
    }

    pub fn leader_utility(&self, p: &[Rational], j: usize) -> Rational {
        p.iter().zip(&self.leader).map(|(pi, r)| pi * &r[j]).sum()
    }
}

fn dot(w: &[BigInt], col: &[BigInt]) -> BigInt {
    let mut acc = BigInt::zero();
    for (a, b) in w.iter().zip(col) {
        if !a.is_zero() && !b.is_zero() {
            acc += a * b;
        }
    }
    acc
}

/// A point of `Δ_m` stored as integer weights over a positive common scale,
/// `p_i = weights[i] / scale`. The stored fraction need not be in lowest
/// terms; [`MixedStrategy::probabilities`] always returns reduced entries.
#[derive(Clone, Debug)]
pub struct MixedStrategy {
    weights: Vec<BigInt>,
    scale: BigInt,
}

impl PartialEq for MixedStrategy {
    fn eq(&self, other: &Self) -> bool {
        self.weights.len() == other.weights.len()
            && self.weights.iter().zip(&other.weights).all(|(a, b)| a * &other.scale == b * &self.scale)
    }
}

impl Eq for MixedStrategy {}

impl MixedStrategy {
    pub fn new(probabilities: Vec<Rational>) -> Result<Self, StrategyError> {
        if let Some(i) = probabilities.iter().position(Rational::is_negative) {
            return Err(StrategyError::Negative(i));
        }
        let total: Rational = probabilities.iter().sum();
        if total != Rational::one() {
            return Err(StrategyError::NotNormalized(total));
        }
        let scale = probabilities.iter().fold(BigInt::one(), |acc, q| acc.lcm(q.denom()));
        let weights = probabilities.iter().map(|q| q.numer() * (&scale / q.denom())).collect();
        Ok(MixedStrategy { weights, scale })
    }

    /// Builds `weights / scale`, checking nonnegativity and `Σ weights = scale`.
    pub fn from_scaled(weights: Vec<BigInt>, scale: BigInt) -> Result<Self, StrategyError> {
        let mut weights = weights;
        let mut scale = scale;
        if scale.is_negative() {
            scale = -scale;
            weights.iter_mut().for_each(|w| *w = -&*w);
        }
        if let Some(i) = weights.iter().position(Signed::is_negative) {
            return Err(StrategyError::Negative(i));
        }
        let total: BigInt = weights.iter().sum();
        if scale.is_zero() || total != scale {
            let value = Rational::new(total, if scale.is_zero() { BigInt::one() } else { scale.clone() })
                .unwrap_or_else(Rational::zero);
            return Err(StrategyError::NotNormalized(value));
        }
        Ok(MixedStrategy { weights, scale })
    }

    pub(crate) fn from_scaled_unchecked(weights: Vec<BigInt>, scale: BigInt) -> Self {
        debug_assert!(scale.is_positive() && weights.iter().sum::<BigInt>() == scale);
        MixedStrategy { weights, scale }
    }

    /// The pure strategy `e_i` (zero-based).
    pub fn pure(m: usize, i: usize) -> Self {
        let mut weights = vec![BigInt::zero(); m];
        weights[i] = BigInt::one();
        MixedStrategy { weights, scale: BigInt::one() }
    }

    pub fn uniform(m: usize) -> Self {
        MixedStrategy { weights: vec![BigInt::one(); m], scale: BigInt::from(m) }
    }

    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[BigInt] {
        &self.weights
    }

    pub fn scale(&self) -> &BigInt {
        &self.scale
    }

    pub fn probability(&self, i: usize) -> Rational {
        Rational::new(self.weights[i].clone(), self.scale.clone()).expect("positive scale")
    }

    pub fn probabilities(&self) -> Vec<Rational> {
        (0..self.dim()).map(|i| self.probability(i)).collect()
    }

    /// Largest bit-complexity among the reduced entries.
    pub fn bit_complexity(&self) -> BitComplexity {
        self.probabilities().iter().map(Rational::bit_complexity).max().unwrap_or(0)
    }

    /// Same point with weights and scale divided by their gcd, so the scale
    /// is the lcm of the reduced entry denominators.
    pub fn reduced(&self) -> Self {
        let g = self.weights.iter().fold(self.scale.clone(), |acc, w| acc.gcd(w));
        if g.is_one() {
            return self.clone();
        }
        MixedStrategy { weights: self.weights.iter().map(|w| w / &g).collect(), scale: &self.scale / &g }
    }

    /// `(1 − t)·self + t·other` for `t ∈ [0, 1]`, without reducing.
    pub fn toward(&self, other: &MixedStrategy, t: &Rational) -> MixedStrategy {
        assert!(!t.is_negative() && *t <= Rational::one(), "interpolation parameter outside [0, 1]");
        let (u, v) = (t.numer(), t.denom());
        let keep = v - u;
        let weights = self
            .weights
            .iter()
            .zip(&other.weights)
            .map(|(a, b)| &keep * a * &other.scale + u * b * &self.scale)
            .collect();
        MixedStrategy { weights, scale: v * &self.scale * &other.scale }
    }

    /// Lexicographic comparison of the probability vectors.
    pub fn cmp_lex(&self, other: &MixedStrategy) -> Ordering {
        for (a, b) in self.weights.iter().zip(&other.weights) {
            match (a * &other.scale).cmp(&(b * &self.scale)) {
                Ordering::Equal => continue,
                ord => return ord,
            }
        }
        self.dim().cmp(&other.dim())
    }
}

/// Follower best response: follower-optimal, then leader-optimal among
/// those, then lowest index.
pub fn best_response(instance: &GameInstance, p: &MixedStrategy) -> usize {
    assert_eq!(p.dim(), instance.m, "strategy dimension mismatch");
    let utils: Vec<BigInt> = instance.follower_cols.iter().map(|c| dot(&p.weights, c)).collect();
    let best = utils.iter().max().expect("at least one follower action");
    let mut ties = (0..instance.n).filter(|&j| &utils[j] == best);
    let first = ties.next().expect("maximum attained");
    let rest: Vec<usize> = ties.collect();
    if rest.is_empty() {
        return first;
    }
    let mut choice = first;
    let mut choice_value = dot(&p.weights, &instance.leader_cols[first]);
    for j in rest {
        let v = dot(&p.weights, &instance.leader_cols[j]);
        if v > choice_value {
            choice = j;
            choice_value = v;
        }
    }
    choice
}

/// Leader expected utility under the tie-broken best response.
pub fn leader_value(instance: &GameInstance, p: &MixedStrategy) -> Rational {
    let a = best_response(instance, p);
    instance.leader_utility(&p.probabilities(), a)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TranscriptEntry {
    pub index: u64,
    pub strategy: MixedStrategy,
    pub response: usize,
}

/// Receives every query in order.
pub trait TranscriptSink {
    fn record(&mut self, index: u64, strategy: &MixedStrategy, response: usize);
}

impl TranscriptSink for Vec<TranscriptEntry> {
    fn record(&mut self, index: u64, strategy: &MixedStrategy, response: usize) {
        self.push(TranscriptEntry { index, strategy: strategy.clone(), response });
    }
}

/// Metered best-response oracle. The follower's payoffs stay private; the
/// learner may read the dimensions, the payoff bit bound `L`, and its own
/// (leader) payoffs.
pub struct QueryOracle<'s> {
    instance: GameInstance,
    mode: Mode,
    count: u64,
    sink: Option<&'s mut dyn TranscriptSink>,
}

impl<'s> QueryOracle<'s> {
    pub fn new(instance: GameInstance, mode: Mode) -> Self {
        QueryOracle { instance, mode, count: 0, sink: None }
    }

    pub fn with_sink(mut self, sink: &'s mut dyn TranscriptSink) -> Self {
        self.sink = Some(sink);
        self
    }

    pub fn query(&mut self, p: &MixedStrategy) -> usize {
        let a = best_response(&self.instance, p);
        if let Some(sink) = self.sink.as_mut() {
            sink.record(self.count, p, a);
        }
        self.count += 1;
        a
    }

    pub fn query_count(&self) -> u64 {
        self.count
    }

    pub fn m(&self) -> usize {
        self.instance.m
    }

    pub fn n(&self) -> usize {
        self.instance.n
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn payoff_bits(&self) -> BitComplexity {
        self.instance.payoff_bits(self.mode)
    }

    pub fn leader_payoffs(&self) -> &[Vec<Rational>] {
        &self.instance.leader
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> Rational {
        Rational::ratio(n, d)
    }

    fn mat(rows: &[&[i64]]) -> Vec<Vec<Rational>> {
        rows.iter().map(|r| r.iter().map(|&x| q(x, 1)).collect()).collect()
    }

    fn cyclic_game() -> GameInstance {
        GameInstance::new(mat(&[&[1, 0, 0], &[0, 1, 0], &[0, 0, 1]]), mat(&[&[0, 1, 0], &[1, 0, 0], &[0, 0, 1]]))
            .unwrap()
    }

    fn s(v: &[(i64, i64)]) -> MixedStrategy {
        MixedStrategy::new(v.iter().map(|&(a, b)| q(a, b)).collect()).unwrap()
    }

    #[test]
    fn cyclic_game_responses() {
        let g = cyclic_game();
        assert_eq!(best_response(&g, &s(&[(1, 1), (0, 1), (0, 1)])), 1);
        assert_eq!(best_response(&g, &s(&[(1, 3), (1, 3), (1, 3)])), 0);
        assert_eq!(best_response(&g, &s(&[(1, 2), (1, 10), (2, 5)])), 1);
        assert_eq!(best_response(&g, &s(&[(1, 4), (1, 2), (1, 4)])), 0);
    }

    #[test]
    fn leader_values() {
        let g = cyclic_game();
        assert_eq!(leader_value(&g, &s(&[(0, 1), (0, 1), (1, 1)])), q(1, 1));
        assert_eq!(leader_value(&g, &s(&[(1, 2), (1, 2), (0, 1)])), q(1, 2));
        assert_eq!(leader_value(&g, &MixedStrategy::pure(3, 0)), q(0, 1));
    }

    #[test]
    fn leader_breaks_follower_ties() {
        // Follower indifferent everywhere; leader prefers column 2.
        let g = GameInstance::new(mat(&[&[0, 0, 1], &[0, 1, 0]]), mat(&[&[1, 1, 1], &[1, 1, 1]])).unwrap();
        assert_eq!(best_response(&g, &s(&[(1, 1), (0, 1)])), 2);
        assert_eq!(best_response(&g, &s(&[(0, 1), (1, 1)])), 1);
        assert_eq!(best_response(&g, &s(&[(1, 2), (1, 2)])), 1);
    }

    #[test]
    fn oracle_meters_and_records() {
        let mut log: Vec<TranscriptEntry> = Vec::new();
        let mut o = QueryOracle::new(cyclic_game(), Mode::Standard).with_sink(&mut log);
        assert_eq!(o.query_count(), 0);
        let p = s(&[(1, 4), (1, 2), (1, 4)]);
        assert_eq!(o.query(&p), 0);
        assert_eq!(o.query_count(), 1);
        assert_eq!(o.query(&p), 0);
        assert_eq!(o.query_count(), 2);
        drop(o);
        assert_eq!(log.len(), 2);
        assert_eq!(log[1].index, 1);
    }

    #[test]
    fn rejects_bad_instances_and_strategies() {
        let bad = GameInstance::new(vec![vec![q(3, 2)]], vec![vec![q(0, 1)]]);
        assert!(matches!(bad, Err(InstanceError::OutOfRange { matrix: "leader", .. })));
        assert!(matches!(GameInstance::new(vec![], vec![]), Err(InstanceError::Empty)));
        assert!(MixedStrategy::new(vec![q(1, 2), q(1, 3)]).is_err());
        assert!(MixedStrategy::new(vec![q(3, 2), q(-1, 2)]).is_err());
        assert!(MixedStrategy::from_scaled(vec![BigInt::from(1), BigInt::from(2)], BigInt::from(4)).is_err());
    }

    #[test]
    fn scaled_form_equality_and_reduction() {
        let a = MixedStrategy::from_scaled(vec![BigInt::from(2), BigInt::from(6)], BigInt::from(8)).unwrap();
        let b = s(&[(1, 4), (3, 4)]);
        assert_eq!(a, b);
        assert_eq!(a.reduced().scale(), &BigInt::from(4));
        assert_eq!(a.probabilities(), vec![q(1, 4), q(3, 4)]);
        assert_eq!(a.cmp_lex(&s(&[(1, 3), (2, 3)])), Ordering::Less);
    }

    #[test]
    fn interpolation() {
        let a = s(&[(1, 4), (1, 2), (1, 4)]);
        let b = s(&[(1, 2), (1, 10), (2, 5)]);
        let p = a.toward(&b, &q(5, 13));
        assert_eq!(p, s(&[(9, 26), (9, 26), (4, 13)]));
    }

    #[test]
    fn payoff_bits_by_mode() {
        let g = GameInstance::new(mat(&[&[1, 0]]), vec![vec![q(1, 2), q(0, 1)]]).unwrap();
        assert_eq!(g.payoff_bits(Mode::Standard), 3);
        let h = GameInstance::new(vec![vec![q(3, 4), q(0, 1)]], vec![vec![q(1, 2), q(0, 1)]]).unwrap();
        assert_eq!(h.payoff_bits(Mode::EquivalentActions), 5);
    }
}
