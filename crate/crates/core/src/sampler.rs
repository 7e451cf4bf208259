//! Random interior points of polytopes and simplex facets on a bounded-bit grid.
//!
//! A point is drawn as `p◇ + ρ·y`, where `p◇` is the average of `d` linearly
//! independent vertices, the first `d − 1` free coordinates of `y` come from
//! the grid `{−1, −(M−1)/M, …, 1}`, and the last free coordinate absorbs the
//! remainder so the entries still sum to one. On the facet `p_i = 0`,
//! coordinate `i` is skipped and stays zero.

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use rand::{Rng, RngCore};
use thiserror::Error;

use crate::geometry::{first_independent, Halfspace, Point, Polytope};
use crate::oracle::MixedStrategy;
use crate::rational::{BitComplexity, Rational};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SamplerError {
    #[error("need {needed} linearly independent vertices, found fewer")]
    InsufficientVertices { needed: usize },
    #[error("delta must lie strictly between 0 and 1, got {0}")]
    InvalidDelta(Rational),
    #[error("grid size {0} does not fit in 64 bits")]
    GridTooLarge(BigInt),
    #[error("facet index {index} out of range for dimension {m}")]
    BadFacet { index: usize, m: usize },
    #[error("no strictly interior draw after {0} attempts")]
    NotInterior(usize),
}

/// How the step `ρ` is chosen.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum RhoRule {
    /// `ρ = (d³·2^{9d³L+4dL})^{-1}`.
    Printed,
    /// The largest `2^{-k}`, `k ≥ 1`, whose grid box around the anchor stays
    /// strictly inside every constraint of the domain.
    #[default]
    Adaptive,
}

/// Where to sample.
#[derive(Clone, Copy, Debug)]
pub enum SampleDomain<'a> {
    /// A full-dimensional polytope; the anchor uses its own vertices.
    Polytope(&'a Polytope),
    /// The facet `{p ∈ Δ_m : p_index = 0}`.
    Facet { m: usize, index: usize },
    /// A full-dimensional polytope whose `m` independent vertices are
    /// already known, used verbatim as the anchor set.
    WithVertices { polytope: &'a Polytope, vertices: &'a [Point] },
}

impl SampleDomain<'_> {
    pub fn ambient(&self) -> usize {
        match self {
            SampleDomain::Polytope(p) => p.dim(),
            SampleDomain::Facet { m, .. } => *m,
            SampleDomain::WithVertices { polytope, .. } => polytope.dim(),
        }
    }

    /// Effective dimension `d`.
    pub fn dimension(&self) -> usize {
        match self {
            SampleDomain::Facet { m, .. } => m - 1,
            _ => self.ambient(),
        }
    }

    pub fn facet_index(&self) -> Option<usize> {
        match self {
            SampleDomain::Facet { index, .. } => Some(*index),
            _ => None,
        }
    }
}

/// `d`, `δ`, `ρ`, `M` and the optional facet index for one draw.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SamplerParams {
    pub d: usize,
    pub delta: Rational,
    pub rho: Rational,
    pub grid: u64,
    pub facet_index: Option<usize>,
}

/// `M = ⌈√d / δ⌉`, computed exactly.
pub fn grid_size(d: usize, delta: &Rational) -> Result<u64, SamplerError> {
    check_delta(delta)?;
    let (a, b) = (delta.numer(), delta.denom());
    // Smallest integer t with t² ≥ d·b², then M = ⌈t / a⌉.
    let target = BigInt::from(d) * b * b;
    let mut t = target.sqrt();
    if &t * &t < target {
        t += 1;
    }
    let m = (&t + a - 1u32) / a;
    m.to_u64().ok_or(SamplerError::GridTooLarge(m))
}

fn check_delta(delta: &Rational) -> Result<(), SamplerError> {
    if !delta.is_positive() || *delta >= Rational::one() {
        return Err(SamplerError::InvalidDelta(delta.clone()));
    }
    Ok(())
}

/// `(d³·2^{9d³L+4dL})^{-1}`.
pub fn printed_rho(d: usize, payoff_bits: BitComplexity) -> Rational {
    let d64 = d as u64;
    let exp = 9 * d64 * d64 * d64 * payoff_bits + 4 * d64 * payoff_bits;
    let den = BigInt::from(d64 * d64 * d64) << exp;
    Rational::new(1, den).expect("positive")
}

impl SamplerParams {
    pub fn new(domain: &SampleDomain<'_>, delta: Rational, payoff_bits: BitComplexity) -> Result<Self, SamplerError> {
        let d = domain.dimension();
        let grid = grid_size(d, &delta)?;
        Ok(SamplerParams { d, delta, rho: printed_rho(d, payoff_bits), grid, facet_index: domain.facet_index() })
    }
}

/// Average of the first `d` linearly independent vertices of `polytope`.
pub fn interior_anchor(polytope: &Polytope, d: usize) -> Result<MixedStrategy, SamplerError> {
    let vs = polytope.independent_vertices(d).ok_or(SamplerError::InsufficientVertices { needed: d })?;
    anchor_from_vertices(&vs)
}

/// Average of the given vertices, which must be linearly independent.
pub fn anchor_from_vertices(vertices: &[Point]) -> Result<MixedStrategy, SamplerError> {
    let d = vertices.len();
    if d == 0 || first_independent(vertices, d).is_none() {
        return Err(SamplerError::InsufficientVertices { needed: d.max(1) });
    }
    let m = vertices[0].len();
    let inv = Rational::ratio(1, d as i64);
    let avg: Vec<Rational> = (0..m).map(|i| vertices.iter().map(|v| &v[i]).sum::<Rational>() * &inv).collect();
    Ok(MixedStrategy::new(avg).expect("average of simplex points"))
}

fn facet_vertices(m: usize, index: usize) -> Vec<Point> {
    (0..m)
        .filter(|&k| k != index)
        .map(|k| (0..m).map(|i| if i == k { Rational::one() } else { Rational::zero() }).collect())
        .collect()
}

/// Coordinates that receive grid offsets, and the one that absorbs the rest.
fn free_coordinates(m: usize, facet: Option<usize>) -> (Vec<usize>, usize) {
    let mut coords: Vec<usize> = (0..m).filter(|&k| Some(k) != facet).collect();
    let last = coords.pop().expect("at least two coordinates");
    (coords, last)
}

/// Largest `2^{-k}`, `k ≥ 1`, such that every `y` with `|y_l| ≤ 1` on the free
/// coordinates keeps `anchor + ρ·y` strictly inside each constraint.
pub fn adaptive_rho(anchor: &[Rational], constraints: &[Halfspace], facet: Option<usize>) -> Rational {
    let (free, last) = free_coordinates(anchor.len(), facet);
    let mut k: i64 = 1;
    for h in constraints {
        let (g, b) = h.as_at_least();
        let spread: Rational = free.iter().map(|&c| (&g[c] - &g[last]).abs()).sum();
        if spread.is_zero() {
            continue;
        }
        let slack = g.iter().zip(anchor).map(|(a, x)| a * x).sum::<Rational>() - b;
        assert!(slack.is_positive(), "anchor not strictly inside a constraint it can move across");
        let ratio = spread / slack;
        let mut need = ratio.ceil_log2();
        if Rational::pow2(need) == ratio {
            need += 1;
        }
        k = k.max(need);
    }
    Rational::pow2(-k)
}

/// Anything that can produce interior points; the finder and learner take
/// one so tests can substitute a scripted source.
pub trait InteriorSampler {
    fn sample(&mut self, domain: &SampleDomain<'_>, rng: &mut dyn RngCore) -> Result<MixedStrategy, SamplerError>;
}

/// The grid sampler.
#[derive(Clone, Debug)]
pub struct GridSampler {
    pub delta: Rational,
    pub payoff_bits: BitComplexity,
    pub rule: RhoRule,
    pub max_attempts: usize,
}

impl GridSampler {
    pub fn new(delta: Rational, payoff_bits: BitComplexity) -> Self {
        GridSampler { delta, payoff_bits, rule: RhoRule::default(), max_attempts: 16 }
    }

    pub fn with_rule(mut self, rule: RhoRule) -> Self {
        self.rule = rule;
        self
    }

    /// Upper bound on the bit-complexity of any draw: `40m³L + 2⌈log2(1/δ)⌉`.
    pub fn bit_bound(&self, m: usize) -> BitComplexity {
        let m = m as u64;
        40 * m * m * m * self.payoff_bits + 2 * self.delta.recip().ceil_log2().max(0) as u64
    }

    /// Anchor and step for a domain, before any randomness.
    pub fn prepare(&self, domain: &SampleDomain<'_>) -> Result<(MixedStrategy, SamplerParams), SamplerError> {
        let anchor = match domain {
            SampleDomain::Polytope(p) => interior_anchor(p, p.dim())?,
            SampleDomain::Facet { m, index } => {
                if index >= m || *m < 2 {
                    return Err(SamplerError::BadFacet { index: *index, m: *m });
                }
                anchor_from_vertices(&facet_vertices(*m, *index))?
            }
            SampleDomain::WithVertices { polytope, vertices } => {
                if vertices.len() != polytope.dim() {
                    return Err(SamplerError::InsufficientVertices { needed: polytope.dim() });
                }
                anchor_from_vertices(vertices)?
            }
        };
        let mut params = SamplerParams::new(domain, self.delta.clone(), self.payoff_bits)?;
        if self.rule == RhoRule::Adaptive {
            let probs = anchor.probabilities();
            params.rho = match domain {
                SampleDomain::Facet { m, index } => {
                    adaptive_rho(&probs, Polytope::simplex(*m).constraints(), Some(*index))
                }
                SampleDomain::Polytope(p) | SampleDomain::WithVertices { polytope: p, .. } => {
                    adaptive_rho(&probs, p.constraints(), None)
                }
            };
        }
        Ok((anchor, params))
    }

    /// Places the grid offsets `ks` (each in `[−M, M]`) around the anchor.
    pub fn embed(anchor: &MixedStrategy, params: &SamplerParams, ks: &[i64]) -> MixedStrategy {
        let m = anchor.dim();
        let (free, last) = free_coordinates(m, params.facet_index);
        assert_eq!(ks.len(), free.len(), "one grid offset per free coordinate");
        let step = &params.rho * Rational::ratio(1, params.grid as i64);
        let mut p = anchor.probabilities();
        let mut total = Rational::zero();
        for (&c, &k) in free.iter().zip(ks) {
            let shift = &step * Rational::from(k);
            p[c] = &p[c] + &shift;
            total = total + shift;
        }
        p[last] = &p[last] - total;
        MixedStrategy::new(p).expect("grid box stays inside the simplex")
    }

    fn inside(domain: &SampleDomain<'_>, p: &MixedStrategy) -> bool {
        let probs = p.probabilities();
        match domain {
            SampleDomain::Facet { index, .. } => {
                probs.iter().enumerate().all(|(k, x)| if k == *index { x.is_zero() } else { x.is_positive() })
            }
            SampleDomain::Polytope(poly) | SampleDomain::WithVertices { polytope: poly, .. } => {
                poly.strictly_contains(&probs)
            }
        }
    }
}

impl InteriorSampler for GridSampler {
    fn sample(&mut self, domain: &SampleDomain<'_>, rng: &mut dyn RngCore) -> Result<MixedStrategy, SamplerError> {
        let (anchor, params) = self.prepare(domain)?;
        let grid = params.grid as i64;
        let free = params.d - 1;
        for _ in 0..self.max_attempts {
            let ks: Vec<i64> = (0..free).map(|_| rng.random_range(-grid..=grid)).collect();
            let p = Self::embed(&anchor, &params, &ks);
            if Self::inside(domain, &p) {
                return Ok(p);
            }
        }
        Err(SamplerError::NotInterior(self.max_attempts))
    }
}

/// One draw with a fresh [`GridSampler`].
pub fn sample_int(
    domain: &SampleDomain<'_>,
    delta: Rational,
    payoff_bits: BitComplexity,
    rng: &mut dyn RngCore,
) -> Result<MixedStrategy, SamplerError> {
    GridSampler::new(delta, payoff_bits).sample(domain, rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::HyperplaneKind;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn q(n: i64, d: i64) -> Rational {
        Rational::ratio(n, d)
    }

    fn cyclic_game_p1() -> Polytope {
        let ge = |c: [i64; 3]| {
            Halfspace::at_least(c.iter().map(|&x| q(x, 1)).collect(), q(0, 1), HyperplaneKind::Separating).unwrap()
        };
        Polytope::from_halfspaces(3, [ge([-1, 1, 0]), ge([0, 1, -1])])
    }

    #[test]
    fn simplex_anchor_is_centroid() {
        let a = interior_anchor(&Polytope::simplex(3), 3).unwrap();
        assert_eq!(a.probabilities(), vec![q(1, 3), q(1, 3), q(1, 3)]);
    }

    #[test]
    fn facet_anchor_is_midpoint() {
        let s = GridSampler::new(q(1, 100), 2);
        let (a, params) = s.prepare(&SampleDomain::Facet { m: 3, index: 0 }).unwrap();
        assert_eq!(a.probabilities(), vec![q(0, 1), q(1, 2), q(1, 2)]);
        assert_eq!(params.d, 2);
        assert_eq!(params.facet_index, Some(0));
    }

    #[test]
    fn explicit_vertices_reproduce_listed_anchor() {
        let vs =
            vec![vec![q(0, 1), q(1, 1), q(0, 1)], vec![q(1, 2), q(1, 2), q(0, 1)], vec![q(0, 1), q(1, 2), q(1, 2)]];
        let a = anchor_from_vertices(&vs).unwrap();
        assert_eq!(a.probabilities(), vec![q(1, 6), q(2, 3), q(1, 6)]);
        assert!(cyclic_game_p1().strictly_contains(&a.probabilities()));
    }

    #[test]
    fn region_anchor_uses_vertex_order() {
        let p1 = cyclic_game_p1();
        let a = interior_anchor(&p1, 3).unwrap();
        assert_eq!(a.probabilities(), vec![q(5, 18), q(11, 18), q(1, 9)]);
        assert!(p1.strictly_contains(&a.probabilities()));
    }

    #[test]
    fn lower_dimensional_polytope_has_no_anchor() {
        let flat = Polytope::simplex(3)
            .intersect(Halfspace::at_least(vec![q(0, 1), q(0, 1), q(-1, 1)], q(0, 1), HyperplaneKind::Affine).unwrap());
        assert_eq!(interior_anchor(&flat, 3), Err(SamplerError::InsufficientVertices { needed: 3 }));
    }

    #[test]
    fn zero_offset_returns_anchor() {
        let s = GridSampler::new(q(1, 10), 2);
        let simplex = Polytope::simplex(3);
        let (a, params) = s.prepare(&SampleDomain::Polytope(&simplex)).unwrap();
        assert_eq!(GridSampler::embed(&a, &params, &[0, 0]), a);
    }

    #[test]
    fn facet_embedding_matches_hand_substitution() {
        let s = GridSampler::new(q(1, 10), 2).with_rule(RhoRule::Printed);
        let (a, params) = s.prepare(&SampleDomain::Facet { m: 3, index: 0 }).unwrap();
        let k = 3;
        let p = GridSampler::embed(&a, &params, &[k]);
        let shift = &params.rho * q(k, params.grid as i64);
        assert_eq!(p.probabilities(), vec![q(0, 1), q(1, 2) + &shift, q(1, 2) - shift]);
    }

    #[test]
    fn grid_size_is_exact_ceiling() {
        assert_eq!(grid_size(3, &q(1, 100)).unwrap(), 174);
        assert_eq!(grid_size(4, &q(1, 2)).unwrap(), 4);
        assert_eq!(grid_size(1, &q(1, 3)).unwrap(), 3);
        assert!(matches!(grid_size(3, &q(1, 1)), Err(SamplerError::InvalidDelta(_))));
    }

    #[test]
    fn adaptive_rho_on_simplex_and_facet() {
        let s = GridSampler::new(q(1, 100), 2);
        let simplex = Polytope::simplex(3);
        let (_, params) = s.prepare(&SampleDomain::Polytope(&simplex)).unwrap();
        assert_eq!(params.rho, q(1, 8));
        let (_, params) = s.prepare(&SampleDomain::Facet { m: 3, index: 1 }).unwrap();
        assert_eq!(params.rho, q(1, 4));
    }

    #[test]
    fn extreme_grid_corners_stay_interior() {
        let s = GridSampler::new(q(1, 100), 2);
        let p1 = cyclic_game_p1();
        let dom = SampleDomain::Polytope(&p1);
        let (a, params) = s.prepare(&dom).unwrap();
        let g = params.grid as i64;
        for ks in [[g, g], [-g, -g], [g, -g], [-g, g]] {
            assert!(GridSampler::inside(&dom, &GridSampler::embed(&a, &params, &ks)));
        }
    }

    #[test]
    fn printed_rule_draws_are_interior_and_seeded() {
        let mut s = GridSampler::new(q(1, 100), 2).with_rule(RhoRule::Printed);
        let simplex = Polytope::simplex(3);
        let mut r1 = ChaCha8Rng::seed_from_u64(5);
        let mut r2 = ChaCha8Rng::seed_from_u64(5);
        let a = s.sample(&SampleDomain::Polytope(&simplex), &mut r1).unwrap();
        let b = s.sample(&SampleDomain::Polytope(&simplex), &mut r2).unwrap();
        assert_eq!(a, b);
        assert!(simplex.strictly_contains(&a.probabilities()));
    }

    #[test]
    fn printed_rho_value() {
        assert_eq!(printed_rho(2, 1), Rational::new(1, BigInt::from(8) << 80u32).unwrap());
    }
}
