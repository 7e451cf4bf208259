//! Seeded instance generators.

use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use stackelberg_core::oracle::{GameInstance, MixedStrategy};
use stackelberg_core::Rational;

fn dyadic_matrix(m: usize, n: usize, b: u32, rng: &mut ChaCha8Rng) -> Vec<Vec<Rational>> {
    let den = BigInt::from(1u64) << b;
    (0..m)
        .map(|_| {
            (0..n)
                .map(|_| Rational::new(BigInt::from(rng.random_range(0..=(1u64 << b))), den.clone()).expect("nonzero"))
                .collect()
        })
        .collect()
}

/// Payoffs `k / 2^b` with `k` uniform in `[0, 2^b]` and `b = max(1, bits/2)`,
/// so every entry has bit complexity at most `bits + 2`.
pub fn generate_random(m: usize, n: usize, bits: u32, seed: u64) -> GameInstance {
    assert!(bits >= 2, "bits must be at least 2");
    let b = (bits / 2).clamp(1, 62);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let leader = dyadic_matrix(m, n, b, &mut rng);
    let follower = dyadic_matrix(m, n, b, &mut rng);
    GameInstance::new(leader, follower).expect("entries lie in [0, 1]")
}

/// A random game whose last follower column duplicates the first, with the
/// two matching leader columns forced apart.
pub fn generate_duplicate_column(m: usize, n: usize, bits: u32, seed: u64) -> GameInstance {
    assert!(n >= 2, "a duplicated column needs two actions");
    let base = generate_random(m, n, bits, seed);
    let mut follower = base.follower_payoffs().to_vec();
    let mut leader = base.leader_payoffs().to_vec();
    for row in &mut follower {
        row[n - 1] = row[0].clone();
    }
    if (0..m).all(|i| leader[i][0] == leader[i][n - 1]) {
        let half = Rational::ratio(1, 2);
        leader[0][n - 1] = if leader[0][0] == half { Rational::zero() } else { half };
    }
    GameInstance::new(leader, follower).expect("entries lie in [0, 1]")
}

/// Three-action game where action `i` of the follower is rewarded by a
/// permuted leader coordinate: `a1 ↦ p2`, `a2 ↦ p1`, `a3 ↦ p3`. The leader
/// payoffs are the identity.
pub fn cyclic_game() -> GameInstance {
    let int = |rows: [[i64; 3]; 3]| rows.iter().map(|r| r.iter().map(|&x| Rational::from(x)).collect()).collect();
    GameInstance::new(int([[1, 0, 0], [0, 1, 0], [0, 0, 1]]), int([[0, 1, 0], [1, 0, 0], [0, 0, 1]]))
        .expect("valid instance")
}

/// Endpoints `(1/3 − ε, 1/3 + ε, 1/3)` and `(1/2, 1/10, 2/5)` whose segment
/// crosses three follower indifference planes within `O(ε)` of each other.
pub fn close_crossing_segment(eps: &Rational) -> (MixedStrategy, MixedStrategy) {
    let third = Rational::ratio(1, 3);
    let p1 = MixedStrategy::new(vec![&third - eps, &third + eps, third]).expect("ε < 1/3");
    let p2 = MixedStrategy::new(vec![Rational::ratio(1, 2), Rational::ratio(1, 10), Rational::ratio(2, 5)])
        .expect("valid strategy");
    (p1, p2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use stackelberg_core::oracle::Mode;

    #[test]
    fn deterministic() {
        assert_eq!(generate_random(3, 3, 8, 7), generate_random(3, 3, 8, 7));
        assert_ne!(generate_random(3, 3, 8, 7), generate_random(3, 3, 8, 8));
    }

    #[test]
    fn measured_bits_stay_within_bound() {
        for seed in 0..1000 {
            let g = generate_random(3, 3, 8, seed);
            assert!(g.payoff_bits(Mode::Standard) <= 10);
            assert!(g.payoff_bits(Mode::EquivalentActions) <= 10);
        }
    }

    #[test]
    fn duplicate_columns() {
        for seed in 0..50 {
            let g = generate_duplicate_column(3, 3, 6, seed);
            assert!(g.equivalent(0, 2));
            let l = g.leader_payoffs();
            assert!((0..3).any(|i| l[i][0] != l[i][2]));
        }
    }

    #[test]
    fn segment_endpoints() {
        let (p1, _) = close_crossing_segment(&Rational::ratio(1, 4));
        assert_eq!(p1.probabilities()[0], Rational::ratio(1, 12));
    }
}
