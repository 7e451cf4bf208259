//! Exact location of a best-response change along a segment: interval
//! halving on the oracle, then recovery of the crossing as the simplest
//! rational in the final interval.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::oracle::{MixedStrategy, QueryOracle};
use crate::rational::{BitComplexity, Rational};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SearchError {
    #[error("endpoint responses {first} and {second} do not straddle action {target}")]
    Orientation { target: usize, first: usize, second: usize },
    #[error("no rational with at most {depth} bits found in [{low}, {high}]")]
    DepthExceeded { low: Box<Rational>, high: Box<Rational>, depth: u64 },
    #[error("interval [{low}, {high}] is not inside [0, 1] or is reversed")]
    BadInterval { low: Box<Rational>, high: Box<Rational> },
    #[error("endpoints have dimensions {0} and {1}")]
    DimensionMismatch(usize, usize),
}

/// Stopping width and reconstruction depth for the halving loop.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Precision {
    /// Width below `2^{-2K}` with `K = ⌈log2 N⌉`, where
    /// `N = 2·Q1·Q2·2^{2m(L−1)}` bounds the crossing's denominator and `Q1`,
    /// `Q2` are the endpoint common denominators; depth `2K`.
    #[default]
    Measured,
    /// Width below `2^{-6m(5B+8L)}`, depth `3m(5B+8L)`, with `B` the larger
    /// endpoint bit-complexity.
    Printed,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SearchSettings {
    pub payoff_bits: BitComplexity,
    pub precision: Precision,
}

impl SearchSettings {
    pub fn new(payoff_bits: BitComplexity) -> Self {
        SearchSettings { payoff_bits, precision: Precision::default() }
    }

    pub fn with_precision(mut self, precision: Precision) -> Self {
        self.precision = precision;
        self
    }

    /// `(halvings, depth)` for the given endpoints.
    pub fn schedule(&self, inside: &MixedStrategy, outside: &MixedStrategy) -> (u64, u64) {
        let m = inside.dim() as u64;
        let l = self.payoff_bits;
        match self.precision {
            Precision::Measured => {
                let q1 = inside.reduced().scale().clone();
                let q2 = outside.reduced().scale().clone();
                let n: BigInt = (q1 * q2) << (1 + 2 * m * l.saturating_sub(1));
                let k = (n - 1u32).bits().max(1);
                (2 * k + 1, 2 * k)
            }
            Precision::Printed => {
                let b = inside.bit_complexity().max(outside.bit_complexity());
                let t = 6 * m * (5 * b + 8 * l);
                (t + 1, 3 * m * (5 * b + 8 * l))
            }
        }
    }
}

/// `6m(5B+8L)`.
pub fn printed_query_bound(m: usize, endpoint_bits: BitComplexity, payoff_bits: BitComplexity) -> u64 {
    6 * m as u64 * (5 * endpoint_bits + 8 * payoff_bits)
}

/// `24m(3B+4L)`.
pub fn printed_output_bound(m: usize, endpoint_bits: BitComplexity, payoff_bits: BitComplexity) -> u64 {
    24 * m as u64 * (3 * endpoint_bits + 4 * payoff_bits)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SearchOutcome {
    /// The crossing `p° = p1 + λ°(p2 − p1)` in lowest terms.
    pub point: MixedStrategy,
    /// `λ°`, measured from the endpoint whose response is the target action.
    pub lambda: Rational,
    /// Oracle queries spent, including endpoint checks.
    pub queries: u64,
    /// Final halving interval `[λ1, λ2]`.
    pub interval: (Rational, Rational),
}

/// The simplest rational (smallest denominator) in `[low, high]`, found by
/// walking the Stern-Brocot tree from the bounds `0/1` and `1/1`, taking
/// whole runs of same-direction steps at once.
pub fn stern_brocot(low: &Rational, high: &Rational, depth: u64) -> Result<Rational, SearchError> {
    if low.is_negative() || low > high || *high > Rational::one() {
        return Err(SearchError::BadInterval { low: Box::new(low.clone()), high: Box::new(high.clone()) });
    }
    let exceeded = || SearchError::DepthExceeded { low: Box::new(low.clone()), high: Box::new(high.clone()), depth };
    let within = |q: Rational| if q.bit_complexity() <= depth { Ok(q) } else { Err(exceeded()) };
    if low.is_zero() {
        return within(Rational::zero());
    }
    if *high == Rational::one() {
        return within(Rational::one());
    }
    let (ln, ld) = (low.numer(), low.denom());
    let (hn, hd) = (high.numer(), high.denom());
    // Invariant: a/b < low and c/d > high.
    let (mut a, mut b) = (BigInt::zero(), BigInt::one());
    let (mut c, mut d) = (BigInt::one(), BigInt::one());
    let cap = 4 * depth.max(1);
    for _ in 0..cap {
        let mn = &a + &c;
        let md = &b + &d;
        // Compare the mediant mn/md with low = ln/ld and high = hn/hd.
        if &mn * ld < ln * &md {
            // Largest t with (a + t·c)/(b + t·d) < low:
            // t·(c·ld − ln·d) < ln·b − a·ld.
            let num = ln * &b - &a * ld;
            let den = &c * ld - ln * &d;
            let t = num.div_ceil(&den) - 1u32;
            a += &t * &c;
            b += &t * &d;
        } else if &mn * hd > hn * &md {
            // Largest t with (c + t·a)/(d + t·b) > high:
            // t·(hn·b − a·hd) < c·hd − hn·d.
            let num = &c * hd - hn * &d;
            let den = hn * &b - &a * hd;
            let t = num.div_ceil(&den) - 1u32;
            c += &t * &a;
            d += &t * &b;
        } else {
            return within(Rational::new(mn, md).expect("positive denominator"));
        }
    }
    Err(exceeded())
}

/// Queries both endpoints, orients the segment so the target action is at
/// `λ = 0`, and locates the crossing.
pub fn binary_search(
    oracle: &mut QueryOracle<'_>,
    target: usize,
    p1: &MixedStrategy,
    p2: &MixedStrategy,
    settings: SearchSettings,
) -> Result<SearchOutcome, SearchError> {
    if p1.dim() != p2.dim() {
        return Err(SearchError::DimensionMismatch(p1.dim(), p2.dim()));
    }
    let r1 = oracle.query(p1);
    let r2 = oracle.query(p2);
    let (inside, outside) = match (r1 == target, r2 == target) {
        (true, false) => (p1, p2),
        (false, true) => (p2, p1),
        _ => return Err(SearchError::Orientation { target, first: r1, second: r2 }),
    };
    let mut out = binary_search_oriented(oracle, target, inside, outside, settings)?;
    out.queries += 2;
    Ok(out)
}

/// Same as [`binary_search`] for endpoints whose responses are already
/// known: the target action at `inside`, anything else at `outside`.
pub fn binary_search_oriented(
    oracle: &mut QueryOracle<'_>,
    target: usize,
    inside: &MixedStrategy,
    outside: &MixedStrategy,
    settings: SearchSettings,
) -> Result<SearchOutcome, SearchError> {
    if inside.dim() != outside.dim() {
        return Err(SearchError::DimensionMismatch(inside.dim(), outside.dim()));
    }
    let (halvings, depth) = settings.schedule(inside, outside);
    let p1 = inside.reduced();
    let p2 = outside.reduced();
    let (s1, s2) = (p1.scale(), p2.scale());
    let scale = s1 * s2;
    let x1: Vec<BigInt> = p1.weights().iter().map(|w| w * s2).collect();
    let diff: Vec<BigInt> = p2.weights().iter().zip(&x1).map(|(w, x)| w * s1 - x).collect();

    // Left point p(a / 2^t), stored as weights over scale·2^t.
    let mut left = x1;
    let mut a = BigInt::zero();
    for t in 1..=halvings {
        let mid: Vec<BigInt> = left.iter().zip(&diff).map(|(l, d)| (l << 1u32) + d).collect();
        let probe = MixedStrategy::from_scaled_unchecked(mid, &scale << t);
        a <<= 1u32;
        if oracle.query(&probe) == target {
            left = probe.weights().to_vec();
            a += 1u32;
        } else {
            left.iter_mut().for_each(|l| *l <<= 1u32);
        }
    }
    let pow = BigInt::one() << halvings;
    let low = Rational::new(a.clone(), pow.clone()).expect("positive");
    let high = Rational::new(a + 1u32, pow).expect("positive");
    let lambda = stern_brocot(&low, &high, depth)?;
    let point = inside.toward(outside, &lambda).reduced();
    Ok(SearchOutcome { point, lambda, queries: halvings, interval: (low, high) })
}
