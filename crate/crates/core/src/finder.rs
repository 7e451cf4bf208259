//! Recovers one separating hyperplane of a best-response region from a
//! region upper bound, an interior anchor and a vertex outside the region.

use num_bigint::BigInt;
use rand::RngCore;
use thiserror::Error;

use crate::geometry::{hyperplane_from_integer_rows, rank_int, GeometryError, Hyperplane, Polytope};
use crate::oracle::{MixedStrategy, QueryOracle};
use crate::rational::{BitComplexity, Rational};
use crate::sampler::{InteriorSampler, SampleDomain, SamplerError};
use crate::search::{binary_search, binary_search_oriented, SearchError, SearchSettings};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FinderError {
    #[error(transparent)]
    Sampler(#[from] SamplerError),
    #[error(transparent)]
    Search(#[from] SearchError),
    #[error("only {found} of the {needed} independent crossings needed could be formed")]
    DegenerateGeometry { found: usize, needed: usize },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("side point around facet {0} falls outside the simplex")]
    SidePointOutside(usize),
}

/// Inputs for one hyperplane search.
#[derive(Clone, Copy, Debug)]
pub struct FinderContext<'a> {
    /// Action `a_j` whose region is being reconstructed.
    pub target: usize,
    /// Current upper bound `U_j`.
    pub upper: &'a Polytope,
    /// `p_int`, strictly inside the region.
    pub anchor: &'a MixedStrategy,
    /// A vertex of `U_j` known to lie outside the region.
    pub vertex: &'a MixedStrategy,
    pub search: SearchSettings,
}

/// `p^{±i} = p° ± α(p − p°)` around the crossing `p°`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SidePointPair {
    pub plus: MixedStrategy,
    pub minus: MixedStrategy,
    pub facet_index: usize,
}

/// `α = 2^{−m(B+4L)−1} / m`.
pub fn alpha(m: usize, center_bits: BitComplexity, payoff_bits: BitComplexity) -> Rational {
    let exp = m as u64 * (center_bits + 4 * payoff_bits) + 1;
    Rational::new(1, BigInt::from(m) << exp).expect("positive")
}

impl SidePointPair {
    pub fn new(
        center: &MixedStrategy,
        facet_point: &MixedStrategy,
        alpha: &Rational,
        facet_index: usize,
    ) -> Result<Self, FinderError> {
        let plus = center.toward(facet_point, alpha);
        // minus = (1 + α)·center − α·facet_point, over a common scale.
        let (u, v) = (alpha.numer(), alpha.denom());
        let (sc, sp) = (center.scale(), facet_point.scale());
        let keep = v + u;
        let weights: Vec<BigInt> =
            center.weights().iter().zip(facet_point.weights()).map(|(c, p)| &keep * c * sp - u * p * sc).collect();
        let minus =
            MixedStrategy::from_scaled(weights, v * sc * sp).map_err(|_| FinderError::SidePointOutside(facet_index))?;
        Ok(SidePointPair { plus, minus, facet_index })
    }
}

/// Splits a pair by the response at `plus`: the first returned point goes
/// to the target side `S_j`, the second to the other side `S_k`.
pub fn route_side_points(
    pair: &SidePointPair,
    response_plus: usize,
    target: usize,
) -> (&MixedStrategy, &MixedStrategy) {
    if response_plus == target {
        (&pair.plus, &pair.minus)
    } else {
        (&pair.minus, &pair.plus)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FinderReport {
    /// Canonical homogeneous hyperplane through the crossings.
    pub hyperplane: Hyperplane,
    /// The first crossing `p°`.
    pub crossing: MixedStrategy,
    /// Side points with the response observed at each `plus`.
    pub side_points: Vec<(SidePointPair, usize)>,
    /// The `m − 1` crossings spanning the hyperplane.
    pub spanning: Vec<MixedStrategy>,
    pub queries: u64,
}

/// Samples a segment across the region boundary, finds its crossing `p°`,
/// probes every simplex facet direction at distance `α` around `p°`, and
/// spans the hyperplane by crossings between opposite-side probes.
pub fn find_hyperplane(
    ctx: &FinderContext<'_>,
    oracle: &mut QueryOracle<'_>,
    sampler: &mut dyn InteriorSampler,
    rng: &mut dyn RngCore,
) -> Result<FinderReport, FinderError> {
    let start = oracle.query_count();
    let m = ctx.anchor.dim();
    let p = sampler.sample(&SampleDomain::Polytope(ctx.upper), rng)?;
    let (inside, outside) = if oracle.query(&p) == ctx.target { (&p, ctx.vertex) } else { (ctx.anchor, &p) };
    let crossing = binary_search_oriented(oracle, ctx.target, inside, outside, ctx.search)?.point;

    if m == 2 {
        let hyperplane = hyperplane_from_integer_rows(&[crossing.weights().to_vec()], m)?;
        return Ok(FinderReport {
            hyperplane,
            spanning: vec![crossing.clone()],
            crossing,
            side_points: Vec::new(),
            queries: oracle.query_count() - start,
        });
    }

    let a = alpha(m, crossing.bit_complexity(), ctx.search.payoff_bits);
    let mut side_points = Vec::with_capacity(m);
    let mut near: Vec<(usize, MixedStrategy)> = Vec::with_capacity(m);
    let mut far: Vec<(usize, MixedStrategy)> = Vec::with_capacity(m);
    for i in 0..m {
        let facet_point = sampler.sample(&SampleDomain::Facet { m, index: i }, rng)?;
        let pair = SidePointPair::new(&crossing, &facet_point, &a, i)?;
        let response = oracle.query(&pair.plus);
        let (sj, sk) = route_side_points(&pair, response, ctx.target);
        near.push((i, sj.clone()));
        far.push((i, sk.clone()));
        side_points.push((pair, response));
    }

    let needed = m - 1;
    let mut rows: Vec<Vec<BigInt>> = Vec::with_capacity(needed);
    let mut spanning = Vec::with_capacity(needed);
    'pairs: for (fa, sj) in &near {
        for (fb, sk) in &far {
            if fa == fb {
                continue;
            }
            let found = match binary_search(oracle, ctx.target, sj, sk, ctx.search) {
                Ok(out) => out.point,
                Err(SearchError::Orientation { .. }) => continue,
                Err(e) => return Err(e.into()),
            };
            rows.push(found.weights().to_vec());
            if rank_int(&rows) < rows.len() {
                rows.pop();
                continue;
            }
            spanning.push(found);
            if rows.len() == needed {
                break 'pairs;
            }
        }
    }
    if rows.len() < needed {
        return Err(FinderError::DegenerateGeometry { found: rows.len(), needed });
    }
    let hyperplane = hyperplane_from_integer_rows(&rows, m)?;
    Ok(FinderReport { hyperplane, crossing, side_points, spanning, queries: oracle.query_count() - start })
}
