//! Integer lattice vectors, nonsingular simplicial cones and star subdivisions
//! along a valuation vector.

pub mod feasibility;
pub mod matrix;

use std::fmt;
use std::sync::{Arc, OnceLock};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::formal_real::{integer_combine, FormalReal, RealBasis, Sign};
use matrix::IntMatrix;

/// Which of the two cones a step belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    #[default]
    Sigma,
    Tau,
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::Sigma => "sigma",
            Side::Tau => "tau",
        })
    }
}

/// A vector of the lattice `Z^n`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LatticeVector(Vec<BigInt>);

impl LatticeVector {
    pub fn new(entries: Vec<BigInt>) -> Self {
        LatticeVector(entries)
    }

    pub fn from_i64(entries: &[i64]) -> Self {
        LatticeVector(entries.iter().map(|&x| BigInt::from(x)).collect())
    }

    pub fn zero(n: usize) -> Self {
        LatticeVector(vec![BigInt::zero(); n])
    }

    pub fn unit(n: usize, i: usize) -> Self {
        let mut v = Self::zero(n);
        v.0[i] = BigInt::one();
        v
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn entries(&self) -> &[BigInt] {
        &self.0
    }

    pub fn into_entries(self) -> Vec<BigInt> {
        self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(Zero::is_zero)
    }

    pub fn is_primitive(&self) -> bool {
        self.0.iter().fold(BigInt::zero(), |g, x| g.gcd(x)).is_one()
    }

    pub fn add(&self, other: &LatticeVector) -> LatticeVector {
        LatticeVector(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &LatticeVector) -> LatticeVector {
        LatticeVector(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    pub fn scale(&self, k: &BigInt) -> LatticeVector {
        LatticeVector(self.0.iter().map(|a| a * k).collect())
    }
}

impl fmt::Debug for LatticeVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for LatticeVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (k, x) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{x}")?;
        }
        write!(f, ")")
    }
}

impl Serialize for LatticeVector {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_seq(self.0.iter().map(ToString::to_string))
    }
}

impl<'de> Deserialize<'de> for LatticeVector {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let raw = Vec::<crate::json::IntLiteral>::deserialize(deserializer)?;
        Ok(LatticeVector(raw.into_iter().map(|x| x.0).collect()))
    }
}

/// A nonsingular `n`-dimensional cone: an ordered list of `n` generators whose
/// matrix has determinant `+1` or `-1`.
#[derive(Clone)]
pub struct UnimodularCone {
    generators: Vec<LatticeVector>,
    inverse: OnceLock<IntMatrix>,
}

impl PartialEq for UnimodularCone {
    fn eq(&self, other: &Self) -> bool {
        self.generators == other.generators
    }
}
impl Eq for UnimodularCone {}

impl fmt::Debug for UnimodularCone {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for UnimodularCone {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<")?;
        for (k, g) in self.generators.iter().enumerate() {
            if k > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{g}")?;
        }
        write!(f, ">")
    }
}

/// Matrix with the generators as columns.
fn generator_matrix(generators: &[LatticeVector]) -> IntMatrix {
    let n = generators.len();
    (0..n)
        .map(|r| generators.iter().map(|g| g.0[r].clone()).collect())
        .collect()
}

/// Exact determinant of the generator matrix; fails unless it is `+-1`.
pub fn check_unimodular(generators: &[LatticeVector]) -> Result<BigInt> {
    let n = generators.len();
    if let Some(g) = generators.iter().find(|g| g.dim() != n) {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: g.dim(),
        });
    }
    let det = matrix::determinant(&generator_matrix(generators));
    if det.abs().is_one() {
        Ok(det)
    } else {
        Err(Error::SingularCone { det })
    }
}

impl UnimodularCone {
    pub fn new(generators: Vec<LatticeVector>) -> Result<Self> {
        if generators.is_empty() {
            return Err(Error::DimensionMismatch { expected: 1, found: 0 });
        }
        check_unimodular(&generators)?;
        Ok(Self::new_unchecked(generators))
    }

    /// Caller guarantees unimodularity (e.g. the result of column operations).
    pub(crate) fn new_unchecked(generators: Vec<LatticeVector>) -> Self {
        UnimodularCone {
            generators,
            inverse: OnceLock::new(),
        }
    }

    pub fn from_rows(rows: &[&[i64]]) -> Result<Self> {
        Self::new(rows.iter().map(|r| LatticeVector::from_i64(r)).collect())
    }

    pub fn identity(n: usize) -> Self {
        Self::new_unchecked((0..n).map(|i| LatticeVector::unit(n, i)).collect())
    }

    pub fn dim(&self) -> usize {
        self.generators.len()
    }

    pub fn generators(&self) -> &[LatticeVector] {
        &self.generators
    }

    pub fn into_generators(self) -> Vec<LatticeVector> {
        self.generators
    }

    pub fn determinant(&self) -> BigInt {
        matrix::determinant(&generator_matrix(&self.generators))
    }

    /// Integer matrix taking ambient coordinates to generator coordinates.
    pub fn inverse(&self) -> &IntMatrix {
        self.inverse.get_or_init(|| {
            matrix::unimodular_inverse(&generator_matrix(&self.generators))
                .expect("unimodular cone has an integer inverse")
        })
    }

    /// Integer coordinates of a lattice vector in the generator basis.
    pub fn lattice_coordinates(&self, x: &LatticeVector) -> Vec<BigInt> {
        matrix::mat_vec(self.inverse(), &x.0)
    }

    pub fn contains_vector(&self, x: &LatticeVector) -> bool {
        self.lattice_coordinates(x).iter().all(|c| !c.is_negative())
    }

    /// Every generator of `other` is a nonnegative combination of ours.
    pub fn contains_cone(&self, other: &UnimodularCone) -> bool {
        other.generators.iter().all(|g| self.contains_vector(g))
    }

    /// Same generators, possibly in another order.
    pub fn same_generator_set(&self, other: &UnimodularCone) -> bool {
        let mut a = self.generators.clone();
        let mut b = other.generators.clone();
        a.sort();
        b.sort();
        a == b
    }

    /// Cone with the generator at `index` replaced.
    pub fn with_generator(&self, index: usize, g: LatticeVector) -> UnimodularCone {
        let mut gens = self.generators.clone();
        gens[index] = g;
        UnimodularCone::new_unchecked(gens)
    }

    /// Cone whose generator `k` is our generator `perm[k]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<UnimodularCone> {
        check_permutation(perm, self.dim())?;
        Ok(UnimodularCone::new_unchecked(perm.iter().map(|&k| self.generators[k].clone()).collect()))
    }

    fn check_pair(&self, i: usize, j: usize) -> Result<()> {
        let dim = self.dim();
        if i == j || i >= dim || j >= dim {
            return Err(Error::InvalidPair { i, j, dim });
        }
        Ok(())
    }
}

pub(crate) fn check_permutation(perm: &[usize], n: usize) -> Result<()> {
    let mut seen = vec![false; n];
    if perm.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: perm.len(),
        });
    }
    for &k in perm {
        if k >= n || seen[k] {
            return Err(Error::InvalidPair { i: k, j: k, dim: n });
        }
        seen[k] = true;
    }
    Ok(())
}

#[derive(Serialize, Deserialize)]
struct ConeJson {
    dim: usize,
    generators: Vec<LatticeVector>,
}

impl Serialize for UnimodularCone {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        ConeJson {
            dim: self.dim(),
            generators: self.generators.clone(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for UnimodularCone {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let raw = ConeJson::deserialize(deserializer)?;
        if raw.generators.len() != raw.dim {
            return Err(serde::de::Error::custom(format!(
                "cone declares dim {} but has {} generators",
                raw.dim,
                raw.generators.len()
            )));
        }
        UnimodularCone::new(raw.generators).map_err(serde::de::Error::custom)
    }
}

/// Ambient coordinates of a valuation vector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValuationVector {
    basis: Arc<RealBasis>,
    ambient: Vec<FormalReal>,
}

impl ValuationVector {
    pub fn new(ambient: Vec<FormalReal>) -> Result<Self> {
        let Some(first) = ambient.first() else {
            return Err(Error::DimensionMismatch { expected: 1, found: 0 });
        };
        let basis = first.basis().clone();
        if ambient.iter().any(|x| !x.same_basis(&ambient[0])) {
            return Err(Error::MixedBasis);
        }
        Ok(ValuationVector { basis, ambient })
    }

    pub fn zero(basis: &Arc<RealBasis>, n: usize) -> Self {
        ValuationVector {
            basis: basis.clone(),
            ambient: vec![FormalReal::zero(basis); n],
        }
    }

    pub fn dim(&self) -> usize {
        self.ambient.len()
    }

    pub fn basis(&self) -> &Arc<RealBasis> {
        &self.basis
    }

    pub fn ambient(&self) -> &[FormalReal] {
        &self.ambient
    }

    pub fn is_zero(&self) -> bool {
        self.ambient.iter().all(FormalReal::is_zero)
    }

    /// `sum_k coords_k * generators_k`.
    pub fn from_cone_coordinates(cone: &UnimodularCone, coords: &[FormalReal]) -> Result<Self> {
        let n = cone.dim();
        if coords.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: coords.len(),
            });
        }
        let basis = coords[0].basis().clone();
        let ambient = (0..n)
            .map(|r| {
                integer_combine(
                    &basis,
                    cone.generators()
                        .iter()
                        .zip(coords)
                        .map(|(g, c)| (g.0[r].clone(), c.clone())),
                )
            })
            .collect::<Result<Vec<_>>>()?;
        ValuationVector::new(ambient)
    }
}

/// Coordinates of a valuation vector in the generator basis of a cone.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConeCoordinates {
    coords: Vec<FormalReal>,
}

impl ConeCoordinates {
    pub fn coords(&self) -> &[FormalReal] {
        &self.coords
    }

    pub fn into_coords(self) -> Vec<FormalReal> {
        self.coords
    }

    pub fn signs(&self) -> Result<Vec<Sign>> {
        self.coords.iter().map(FormalReal::sign).collect()
    }
}

/// Exact solve `coords = M^{-1} v`; the inverse of a unimodular matrix is integral.
pub fn cone_coordinates(v: &ValuationVector, cone: &UnimodularCone) -> Result<ConeCoordinates> {
    if v.dim() != cone.dim() {
        return Err(Error::DimensionMismatch {
            expected: cone.dim(),
            found: v.dim(),
        });
    }
    let coords = cone
        .inverse()
        .iter()
        .map(|row| integer_combine(&v.basis, row.iter().cloned().zip(v.ambient.iter().cloned())))
        .collect::<Result<Vec<_>>>()?;
    Ok(ConeCoordinates { coords })
}

/// `true` iff every coordinate of `v` is positive. A zero coordinate is an
/// error: it contradicts rational independence.
pub fn interior_contains(cone: &UnimodularCone, v: &ValuationVector) -> Result<bool> {
    let coords = cone_coordinates(v, cone)?;
    let mut inside = true;
    for (index, c) in coords.coords.iter().enumerate() {
        match c.sign()? {
            Sign::Zero => return Err(Error::DegenerateValuation { index }),
            Sign::Negative => inside = false,
            Sign::Positive => {}
        }
    }
    Ok(inside)
}

/// Relaxed membership: every coordinate nonnegative.
pub fn contains_valuation(cone: &UnimodularCone, v: &ValuationVector) -> Result<bool> {
    for c in cone_coordinates(v, cone)?.coords {
        if c.sign()? == Sign::Negative {
            return Ok(false);
        }
    }
    Ok(true)
}

/// One star subdivision: `new_generator = g_i + g_j` took the place of `g_replaced`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepRecord {
    #[serde(default)]
    pub side: Side,
    pub pair: (usize, usize),
    pub replaced: usize,
    pub new_generator: LatticeVector,
}

/// A trace entry: a star subdivision or an explicit reordering of generators.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum TraceStep {
    Star(StepRecord),
    /// New generator `k` is old generator `perm[k]`.
    Permute { perm: Vec<usize> },
}

impl TraceStep {
    pub fn as_star(&self) -> Option<&StepRecord> {
        match self {
            TraceStep::Star(s) => Some(s),
            TraceStep::Permute { .. } => None,
        }
    }
}

/// Star subdivision of `cone` at `g_i + g_j` along `v`: of the two candidate cones
/// exactly one contains `v` in its interior.
pub fn star_subdivide(
    cone: &UnimodularCone,
    i: usize,
    j: usize,
    v: &ValuationVector,
    side: Side,
) -> Result<(UnimodularCone, StepRecord)> {
    cone.check_pair(i, j)?;
    let g = cone.generators[i].add(&cone.generators[j]);
    let mut chosen = None;
    for replaced in [i, j] {
        let candidate = cone.with_generator(replaced, g.clone());
        let coords = cone_coordinates(v, &candidate)?;
        let mut positive = true;
        for c in coords.coords() {
            if !c.sign()?.is_positive() {
                positive = false;
                break;
            }
        }
        if positive {
            if chosen.is_some() {
                return Err(Error::AmbiguousChoice { i, j });
            }
            chosen = Some((candidate, replaced));
        }
    }
    let (cone, replaced) = chosen.ok_or(Error::AmbiguousChoice { i, j })?;
    Ok((
        cone,
        StepRecord {
            side,
            pair: (i, j),
            replaced,
            new_generator: g,
        },
    ))
}

/// Quotient by the span of some generators of a nonsingular cone, realised in
/// that cone's coordinates with the axis coordinates dropped.
#[derive(Debug, Clone)]
pub struct ProjectionContext {
    sigma: UnimodularCone,
    axes: Vec<usize>,
}

/// Projection killing generator `axis` of `sigma`.
pub fn make_projection(sigma: &UnimodularCone, axis: usize) -> Result<ProjectionContext> {
    ProjectionContext::new(sigma, vec![axis])
}

impl ProjectionContext {
    pub fn new(sigma: &UnimodularCone, mut axes: Vec<usize>) -> Result<Self> {
        axes.sort_unstable();
        axes.dedup();
        if axes.iter().any(|&a| a >= sigma.dim()) {
            return Err(Error::InvalidPair {
                i: axes[axes.len() - 1],
                j: axes[axes.len() - 1],
                dim: sigma.dim(),
            });
        }
        Ok(ProjectionContext {
            sigma: sigma.clone(),
            axes,
        })
    }

    pub fn sigma(&self) -> &UnimodularCone {
        &self.sigma
    }

    pub fn quotient_dim(&self) -> usize {
        self.sigma.dim() - self.axes.len()
    }

    fn keep<T: Clone>(&self, xs: &[T]) -> Vec<T> {
        xs.iter()
            .enumerate()
            .filter(|(k, _)| !self.axes.contains(k))
            .map(|(_, x)| x.clone())
            .collect()
    }

    pub fn project_vector(&self, x: &LatticeVector) -> LatticeVector {
        LatticeVector(self.keep(&self.sigma.lattice_coordinates(x)))
    }

    /// Images of the listed generators.
    pub fn project_generators(&self, gens: &[LatticeVector]) -> Vec<LatticeVector> {
        gens.iter().map(|g| self.project_vector(g)).collect()
    }

    /// Image of `sigma` itself: the standard orthant of the quotient.
    pub fn projected_sigma(&self) -> UnimodularCone {
        UnimodularCone::identity(self.quotient_dim())
    }

    pub fn project_valuation(&self, v: &ValuationVector) -> Result<ValuationVector> {
        let coords = cone_coordinates(v, &self.sigma)?;
        let kept = self.keep(coords.coords());
        if kept.is_empty() {
            return Err(Error::DimensionMismatch { expected: 1, found: 0 });
        }
        ValuationVector::new(kept)
    }
}

/// Whether the relative interiors of the cones spanned by `a` and `b` meet
/// (exact Fourier-Motzkin feasibility). Works for faces as well as full cones.
pub fn interior_intersects(a: &[LatticeVector], b: &[LatticeVector]) -> bool {
    interior_witness(a, b).is_some()
}

/// A rational point in both relative interiors, when one exists.
pub fn interior_witness(a: &[LatticeVector], b: &[LatticeVector]) -> Option<Vec<BigRational>> {
    let a: Vec<Vec<BigInt>> = a.iter().map(|g| g.0.clone()).collect();
    let b: Vec<Vec<BigInt>> = b.iter().map(|g| g.0.clone()).collect();
    feasibility::interior_witness(&a, &b)
}
