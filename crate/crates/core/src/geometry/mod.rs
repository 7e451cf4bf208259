//! Hyperplanes, halfspaces and polytopes inside the leader's simplex.

mod linalg;

use std::collections::BTreeSet;
use std::fmt;
use std::sync::OnceLock;

use num_bigint::BigInt;
use thiserror::Error;

use crate::rational::{BitComplexity, Rational};

pub use linalg::{integer_row, rank, rank_int, solve_square_system};

/// A point of `R^m`, usually a mixed strategy.
pub type Point = Vec<Rational>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GeometryError {
    #[error("hyperplane with all-zero coefficients")]
    ZeroNormal,
    #[error("points are linearly dependent; no unique hyperplane through them and the origin")]
    Degenerate,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum HyperplaneKind {
    /// Follower indifference between two actions; passes through the origin.
    Separating,
    /// A coordinate hyperplane `p_i = 0`.
    Boundary,
    /// Leader indifference between two follower-equivalent actions.
    LeaderSeparating,
    /// Any other affine hyperplane.
    Affine,
}

/// `{p : c·p = b}` scaled so the first nonzero coefficient is `+1`.
///
/// Equality compares the geometric set only, not the `kind` tag.
#[derive(Clone)]
pub struct Hyperplane {
    coefficients: Vec<Rational>,
    offset: Rational,
    kind: HyperplaneKind,
}

impl PartialEq for Hyperplane {
    fn eq(&self, other: &Self) -> bool {
        self.coefficients == other.coefficients && self.offset == other.offset
    }
}

impl Eq for Hyperplane {}

impl fmt::Debug for Hyperplane {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}·p = {} ({:?})", self.coefficients, self.offset, self.kind)
    }
}

fn dot(c: &[Rational], p: &[Rational]) -> Rational {
    c.iter().zip(p).filter(|(a, b)| !a.is_zero() && !b.is_zero()).map(|(a, b)| a * b).sum()
}

/// Divides by the first nonzero coefficient; returns the result and whether
/// that coefficient was negative.
fn normalize(coefficients: Vec<Rational>, offset: Rational) -> Result<(Vec<Rational>, Rational, bool), GeometryError> {
    let lead = coefficients.iter().find(|c| !c.is_zero()).cloned().ok_or(GeometryError::ZeroNormal)?;
    let flipped = lead.is_negative();
    let coefficients = coefficients.iter().map(|c| c / &lead).collect();
    Ok((coefficients, offset / lead, flipped))
}

impl Hyperplane {
    pub fn new(coefficients: Vec<Rational>, offset: Rational, kind: HyperplaneKind) -> Result<Self, GeometryError> {
        let (coefficients, offset, _) = normalize(coefficients, offset)?;
        Ok(Hyperplane { coefficients, offset, kind })
    }

    /// Homogeneous hyperplane `c·p = 0`.
    pub fn through_origin(coefficients: Vec<Rational>, kind: HyperplaneKind) -> Result<Self, GeometryError> {
        Self::new(coefficients, Rational::zero(), kind)
    }

    /// `H_i = {p : p_i = 0}` in `R^m` (zero-based `i`).
    pub fn boundary(m: usize, i: usize) -> Self {
        let mut c = vec![Rational::zero(); m];
        c[i] = Rational::one();
        Hyperplane { coefficients: c, offset: Rational::zero(), kind: HyperplaneKind::Boundary }
    }

    pub fn coefficients(&self) -> &[Rational] {
        &self.coefficients
    }

    pub fn offset(&self) -> &Rational {
        &self.offset
    }

    pub fn kind(&self) -> HyperplaneKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.coefficients.len()
    }

    /// `c·p − b`.
    pub fn evaluate(&self, p: &[Rational]) -> Rational {
        dot(&self.coefficients, p) - &self.offset
    }

    pub fn contains(&self, p: &[Rational]) -> bool {
        self.evaluate(p).is_zero()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Side {
    AtLeast,
    AtMost,
}

impl Side {
    pub fn flip(self) -> Side {
        match self {
            Side::AtLeast => Side::AtMost,
            Side::AtMost => Side::AtLeast,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Halfspace {
    hyperplane: Hyperplane,
    side: Side,
}

impl Halfspace {
    /// `{p : c·p ≥ b}` (for `Side::AtLeast`) or `{p : c·p ≤ b}`, canonicalized.
    pub fn new(
        coefficients: Vec<Rational>,
        offset: Rational,
        side: Side,
        kind: HyperplaneKind,
    ) -> Result<Self, GeometryError> {
        let (coefficients, offset, flipped) = normalize(coefficients, offset)?;
        let side = if flipped { side.flip() } else { side };
        Ok(Halfspace { hyperplane: Hyperplane { coefficients, offset, kind }, side })
    }

    pub fn at_least(
        coefficients: Vec<Rational>,
        offset: Rational,
        kind: HyperplaneKind,
    ) -> Result<Self, GeometryError> {
        Self::new(coefficients, offset, Side::AtLeast, kind)
    }

    pub fn from_hyperplane(hyperplane: Hyperplane, side: Side) -> Self {
        Halfspace { hyperplane, side }
    }

    /// `p_i ≥ 0`.
    pub fn nonnegative(m: usize, i: usize) -> Self {
        Halfspace { hyperplane: Hyperplane::boundary(m, i), side: Side::AtLeast }
    }

    pub fn hyperplane(&self) -> &Hyperplane {
        &self.hyperplane
    }

    pub fn side(&self) -> Side {
        self.side
    }

    /// The closed halfspace on the other side of the same hyperplane.
    pub fn opposite(&self) -> Halfspace {
        Halfspace { hyperplane: self.hyperplane.clone(), side: self.side.flip() }
    }

    /// `(g, b)` with the halfspace written as `g·p ≥ b`.
    pub fn as_at_least(&self) -> (Vec<Rational>, Rational) {
        match self.side {
            Side::AtLeast => (self.hyperplane.coefficients.clone(), self.hyperplane.offset.clone()),
            Side::AtMost => (self.hyperplane.coefficients.iter().map(|c| -c).collect(), -&self.hyperplane.offset),
        }
    }

    /// Signed distance-like slack: nonnegative exactly on the halfspace.
    pub fn slack(&self, p: &[Rational]) -> Rational {
        let v = self.hyperplane.evaluate(p);
        match self.side {
            Side::AtLeast => v,
            Side::AtMost => -v,
        }
    }

    pub fn contains(&self, p: &[Rational]) -> bool {
        !self.slack(p).is_negative()
    }

    pub fn strictly_contains(&self, p: &[Rational]) -> bool {
        self.slack(p).is_positive()
    }
}

/// `Δ_m` cut by a list of halfspaces. The affine constraint `Σp = 1` is
/// implicit; the `m` constraints `p_i ≥ 0` always come first.
#[derive(Clone, Debug)]
pub struct Polytope {
    m: usize,
    constraints: Vec<Halfspace>,
    vertex_bound: Option<BitComplexity>,
    vertices: OnceLock<Vec<Point>>,
}

impl PartialEq for Polytope {
    fn eq(&self, other: &Self) -> bool {
        self.m == other.m && self.constraints == other.constraints
    }
}

impl Polytope {
    pub fn simplex(m: usize) -> Self {
        Polytope {
            m,
            constraints: (0..m).map(|i| Halfspace::nonnegative(m, i)).collect(),
            vertex_bound: None,
            vertices: OnceLock::new(),
        }
    }

    /// `Δ_m ∩ ⋂ extra`, skipping duplicates.
    pub fn from_halfspaces(m: usize, extra: impl IntoIterator<Item = Halfspace>) -> Self {
        extra.into_iter().fold(Self::simplex(m), |p, h| p.intersect(h))
    }

    /// Records that the constraints come from payoffs with `payoff_bits`
    /// bits, so every vertex must have at most `9·L·m²` bits.
    pub fn with_payoff_bits(mut self, payoff_bits: BitComplexity) -> Self {
        self.vertex_bound = Some(9 * payoff_bits * (self.m * self.m) as u64);
        self
    }

    pub fn dim(&self) -> usize {
        self.m
    }

    pub fn constraints(&self) -> &[Halfspace] {
        &self.constraints
    }

    /// Constraints other than the simplex boundary.
    pub fn cuts(&self) -> &[Halfspace] {
        &self.constraints[self.m..]
    }

    pub fn has_constraint(&self, h: &Halfspace) -> bool {
        self.constraints.contains(h)
    }

    pub fn intersect(&self, h: Halfspace) -> Polytope {
        assert_eq!(h.hyperplane.dim(), self.m, "halfspace dimension mismatch");
        if self.has_constraint(&h) {
            return self.clone();
        }
        let mut constraints = self.constraints.clone();
        constraints.push(h);
        Polytope { m: self.m, constraints, vertex_bound: self.vertex_bound, vertices: OnceLock::new() }
    }

    /// Vertices in descending lexicographic order.
    pub fn vertices(&self) -> &[Point] {
        self.vertices.get_or_init(|| {
            let vs = enumerate_vertices(self.m, &self.constraints);
            if let Some(bound) = self.vertex_bound {
                for v in &vs {
                    let bits = v.iter().map(Rational::bit_complexity).max().unwrap_or(0);
                    debug_assert!(bits <= bound, "vertex {v:?} has {bits} bits, above {bound}");
                }
            }
            vs
        })
    }

    pub fn contains(&self, p: &[Rational]) -> bool {
        on_simplex_plane(p) && self.constraints.iter().all(|h| h.contains(p))
    }

    /// Strict on every constraint (interior relative to the simplex plane).
    pub fn strictly_contains(&self, p: &[Rational]) -> bool {
        on_simplex_plane(p) && self.constraints.iter().all(|h| h.strictly_contains(p))
    }

    /// First `d` linearly independent vertices in vertex order.
    pub fn independent_vertices(&self, d: usize) -> Option<Vec<Point>> {
        first_independent(self.vertices(), d)
    }

    /// Positive `(m−1)`-volume, decided by the affine rank of the vertices.
    pub fn is_full_dimensional(&self) -> bool {
        self.independent_vertices(self.m).is_some()
    }
}

fn on_simplex_plane(p: &[Rational]) -> bool {
    p.iter().sum::<Rational>() == Rational::one()
}

/// Greedy scan for `d` linearly independent points, preserving order.
pub fn first_independent(points: &[Point], d: usize) -> Option<Vec<Point>> {
    let mut chosen: Vec<Point> = Vec::with_capacity(d);
    for v in points {
        if chosen.len() == d {
            break;
        }
        chosen.push(v.clone());
        if rank(&chosen) < chosen.len() {
            chosen.pop();
        }
    }
    (chosen.len() == d).then_some(chosen)
}

/// All vertices of `{Σp = 1} ∩ constraints`, by solving every choice of
/// `m − 1` constraint hyperplanes together with `Σp = 1` and keeping the
/// feasible solutions. Descending lexicographic order, no duplicates.
pub fn enumerate_vertices(m: usize, constraints: &[Halfspace]) -> Vec<Point> {
    let mut found = BTreeSet::new();
    let k = m.saturating_sub(1);
    let mut subset: Vec<usize> = (0..k).collect();
    if k > constraints.len() {
        return Vec::new();
    }
    loop {
        let mut a: Vec<Vec<Rational>> = vec![vec![Rational::one(); m]];
        let mut b = vec![Rational::one()];
        for &i in &subset {
            let h = &constraints[i].hyperplane;
            a.push(h.coefficients.clone());
            b.push(h.offset.clone());
        }
        if let Some(x) = solve_square_system(&a, &b) {
            if constraints.iter().all(|h| h.contains(&x)) {
                found.insert(x);
            }
        }
        if !next_combination(&mut subset, constraints.len()) {
            break;
        }
    }
    found.into_iter().rev().collect()
}

/// Advances `subset` to the next k-combination of `0..n` in lexicographic order.
pub(crate) fn next_combination(subset: &mut [usize], n: usize) -> bool {
    let k = subset.len();
    for i in (0..k).rev() {
        if subset[i] < n - k + i {
            subset[i] += 1;
            for j in i + 1..k {
                subset[j] = subset[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

pub fn linearly_independent(points: &[Point]) -> bool {
    rank(points) == points.len()
}

/// The homogeneous hyperplane spanned by `m − 1` points and the origin.
pub fn hyperplane_from_points(points: &[Point]) -> Result<Hyperplane, GeometryError> {
    let rows: Vec<Vec<BigInt>> = points.iter().map(|p| integer_row(p)).collect();
    let m = points.first().map_or(0, Vec::len);
    hyperplane_from_integer_rows(&rows, m)
}

/// Same as [`hyperplane_from_points`] on integer multiples of the points.
pub fn hyperplane_from_integer_rows(rows: &[Vec<BigInt>], m: usize) -> Result<Hyperplane, GeometryError> {
    if let Some(r) = rows.iter().find(|r| r.len() != m) {
        return Err(GeometryError::DimensionMismatch { expected: m, got: r.len() });
    }
    if rows.len() + 1 != m {
        return Err(GeometryError::Degenerate);
    }
    let normal = linalg::null_vector(rows, m).ok_or(GeometryError::Degenerate)?;
    Hyperplane::through_origin(normal, HyperplaneKind::Separating)
}
