use num_bigint::BigInt;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use stackelberg_core::baseline::true_regions;
use stackelberg_core::geometry::Polytope;
use stackelberg_core::oracle::{best_response, GameInstance, MixedStrategy, Mode};
use stackelberg_core::rational::checked_sum;
use stackelberg_core::sampler::{GridSampler, InteriorSampler, SampleDomain};
use stackelberg_core::search::stern_brocot;
use stackelberg_core::Rational;

/// A signed rational whose bit complexity is at most `bits`.
fn bounded(bits: u64) -> impl Strategy<Value = Rational> {
    (1..bits, any::<u64>(), any::<u64>(), any::<bool>()).prop_map(move |(nb, n, d, neg)| {
        let db = bits - nb;
        let num = n % (1u64 << nb.min(62));
        let den = (d % (1u64 << db.min(62))).max(1);
        let q = Rational::new(BigInt::from(num), BigInt::from(den)).unwrap();
        if neg {
            -q
        } else {
            q
        }
    })
}

fn terms() -> impl Strategy<Value = (u64, Vec<Rational>)> {
    (2u64..48).prop_flat_map(|b| (Just(b), proptest::collection::vec(bounded(b), 2..7)))
}

fn dyadic(b: u32) -> impl Strategy<Value = Rational> {
    (0..=(1u64 << b)).prop_map(move |k| Rational::new(BigInt::from(k), BigInt::from(1u64 << b)).unwrap())
}

fn game(max_m: usize, max_n: usize) -> impl Strategy<Value = GameInstance> {
    (2..=max_m, 1..=max_n, 1u32..5).prop_flat_map(|(m, n, b)| {
        let matrix = move || proptest::collection::vec(proptest::collection::vec(dyadic(b), n), m);
        (matrix(), matrix()).prop_map(|(l, f)| GameInstance::new(l, f).unwrap())
    })
}

fn strategy(m: usize) -> impl Strategy<Value = MixedStrategy> {
    proptest::collection::vec(0u64..50, m).prop_map(|w| {
        let mut w: Vec<BigInt> = w.into_iter().map(BigInt::from).collect();
        if w.iter().all(|x| *x == BigInt::from(0)) {
            w[0] = BigInt::from(1);
        }
        let s: BigInt = w.iter().sum();
        MixedStrategy::from_scaled(w, s).unwrap()
    })
}

fn game_and_point() -> impl Strategy<Value = (GameInstance, MixedStrategy)> {
    game(4, 4).prop_flat_map(|g| {
        let m = g.m();
        (Just(g), strategy(m))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn checked_sum_bounds_hold((b, qs) in terms()) {
        let sum = checked_sum(&qs, b).unwrap();
        prop_assert_eq!(sum, qs.iter().sum::<Rational>());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn region_vertices_respect_the_bit_bound(g in game(4, 4)) {
        let limit = 9 * g.payoff_bits(Mode::Standard) * (g.m() * g.m()) as u64;
        for region in true_regions(&g, Mode::Standard).values() {
            for v in region.vertices() {
                prop_assert!(v.iter().all(|x| x.bit_complexity() <= limit));
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn best_response_is_the_tie_broken_argmax((g, p) in game_and_point()) {
        let a = best_response(&g, &p);
        let probs = p.probabilities();
        let fa = g.follower_utility(&probs, a);
        for k in 0..g.n() {
            let fk = g.follower_utility(&probs, k);
            prop_assert!(fk <= fa);
            if fk == fa {
                let (la, lk) = (g.leader_utility(&probs, a), g.leader_utility(&probs, k));
                prop_assert!(lk <= la);
                if lk == la {
                    prop_assert!(a <= k);
                }
            }
        }
    }

    #[test]
    fn best_response_lies_in_its_region((g, p) in game_and_point()) {
        for mode in [Mode::Standard, Mode::EquivalentActions] {
            let regions = true_regions(&g, mode);
            prop_assert!(regions[&best_response(&g, &p)].contains(&p.probabilities()));
        }
    }

    #[test]
    fn scaling_preserves_strategies(p in strategy(4), k in 1u64..1000) {
        let k = BigInt::from(k);
        let scaled = MixedStrategy::from_scaled(p.weights().iter().map(|w| w * &k).collect(), p.scale() * &k).unwrap();
        prop_assert_eq!(&scaled, &p);
        prop_assert_eq!(scaled.probabilities(), p.probabilities());
        let (r1, r2) = (scaled.reduced(), p.reduced());
        prop_assert_eq!(r1.scale(), r2.scale());
        prop_assert_eq!(p.probabilities().iter().sum::<Rational>(), Rational::one());
    }

    #[test]
    fn interpolation_endpoints(p in strategy(3), q in strategy(3)) {
        prop_assert_eq!(p.toward(&q, &Rational::zero()), p.clone());
        prop_assert_eq!(p.toward(&q, &Rational::one()), q.clone());
        let mid = p.toward(&q, &Rational::ratio(1, 2));
        let expect: Vec<Rational> = p.probabilities().iter().zip(q.probabilities()).map(|(a, b)| (a + &b) * Rational::ratio(1, 2)).collect();
        prop_assert_eq!(mid.probabilities(), expect);
    }

    #[test]
    fn stern_brocot_finds_the_simplest_rational(a in 0u64..200, b in 1u64..200, c in 0u64..200, d in 1u64..200) {
        let (x, y) = (Rational::ratio(a.min(b) as i64, b as i64), Rational::ratio(c.min(d) as i64, d as i64));
        let (lo, hi) = if x <= y { (x, y) } else { (y, x) };
        let r = stern_brocot(&lo, &hi, 64).unwrap();
        prop_assert!(lo <= r && r <= hi);
        let den = u64::try_from(r.denom()).unwrap();
        for smaller in 1..den {
            let first = -(-(&lo * Rational::from(smaller as i64))).floor();
            let candidate = Rational::new(first, BigInt::from(smaller)).unwrap();
            prop_assert!(candidate > hi, "denominator {} also fits", smaller);
        }
    }

    #[test]
    fn samples_are_strictly_interior(g in game(3, 4), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let l = g.payoff_bits(Mode::Standard);
        let mut sampler = GridSampler::new(Rational::ratio(1, 50), l);
        let bound = sampler.bit_bound(g.m());
        for region in true_regions(&g, Mode::Standard).values().filter(|r| r.is_full_dimensional()) {
            let p = sampler.sample(&SampleDomain::Polytope(region), &mut rng).unwrap();
            prop_assert!(region.strictly_contains(&p.probabilities()));
            prop_assert!(p.probabilities().iter().all(Rational::is_positive));
            prop_assert!(p.bit_complexity() <= bound);
        }
        let simplex = Polytope::simplex(g.m());
        prop_assert!(simplex.strictly_contains(&sampler.sample(&SampleDomain::Polytope(&simplex), &mut rng).unwrap().probabilities()));
    }
}
