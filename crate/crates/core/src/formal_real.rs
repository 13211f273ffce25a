//! Exact reals of the form `q_0 + q_1 r_1 + ... + q_{k-1} r_{k-1}` over a basis of
//! reals that are trusted to be linearly independent over the rationals.
//!
//! Zero testing is symbolic: a value is zero exactly when all of its rational
//! coefficients vanish. Only the *sign* of a nonzero value is computed
//! numerically, by exact interval evaluation over truncated decimal embeddings
//! of the basis reals, refined until the interval excludes zero.

use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Smallest accepted declared precision.
pub const MIN_PRECISION_DIGITS: usize = 64;
/// Precision of the shipped square-root basis.
pub const DEFAULT_PRECISION_DIGITS: usize = 128;
/// First refinement level of the interval evaluation.
const INITIAL_DIGITS: usize = 16;

/// Sign of a real number.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Sign {
    Negative,
    Zero,
    Positive,
}

impl Sign {
    pub fn as_i32(self) -> i32 {
        match self {
            Sign::Negative => -1,
            Sign::Zero => 0,
            Sign::Positive => 1,
        }
    }

    pub fn is_positive(self) -> bool {
        self == Sign::Positive
    }
}

impl std::ops::Neg for Sign {
    type Output = Sign;
    fn neg(self) -> Sign {
        match self {
            Sign::Negative => Sign::Positive,
            Sign::Zero => Sign::Zero,
            Sign::Positive => Sign::Negative,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct Embedding {
    /// `true` when the decimal string is the exact value (an integer literal).
    exact: bool,
    int_part: BigInt,
    frac_digits: Vec<u8>,
}

impl Embedding {
    fn parse(s: &str, precision: usize) -> Result<Self> {
        let s = s.trim();
        let (int_str, frac_str) = match s.split_once('.') {
            Some((a, b)) => (a, b),
            None => (s, ""),
        };
        let digits_ok = |t: &str| t.bytes().all(|c| c.is_ascii_digit());
        if int_str.is_empty() || !digits_ok(int_str) || !digits_ok(frac_str) {
            return Err(Error::InvalidBasis(format!("embedding {s:?} is not a positive decimal")));
        }
        let int_part: BigInt = int_str.parse().expect("validated digits");
        let frac_digits: Vec<u8> = frac_str.bytes().map(|c| c - b'0').collect();
        let exact = frac_str.is_empty();
        if !exact && frac_digits.len() < precision {
            return Err(Error::InvalidBasis(format!(
                "embedding {s:?} has {} fractional digits, fewer than the declared precision {precision}",
                frac_digits.len()
            )));
        }
        if int_part.is_zero() && frac_digits.iter().all(|&d| d == 0) {
            return Err(Error::InvalidBasis(format!("embedding {s:?} is not positive")));
        }
        Ok(Embedding {
            exact,
            int_part,
            frac_digits,
        })
    }

    /// `floor(x * 10^digits)` of the decimal string; the true value times
    /// `10^digits` lies in `[N, N + 1]` unless the embedding is exact.
    fn scaled_floor(&self, digits: usize) -> BigInt {
        let mut n = &self.int_part * BigInt::from(10u32).pow(digits as u32);
        let mut frac = BigInt::zero();
        for k in 0..digits {
            let d = self.frac_digits.get(k).copied().unwrap_or(0);
            frac = frac * 10u32 + d;
        }
        n += frac;
        n
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct Level {
    digits: usize,
    scaled: Vec<BigInt>,
}

/// A finite list of reals, trusted to be linearly independent over the rationals,
/// given by labels and decimal embeddings. The first element is the constant 1.
#[derive(Debug, Clone)]
pub struct RealBasis {
    labels: Vec<String>,
    embeddings: Vec<String>,
    precision_digits: usize,
    parsed: Vec<Embedding>,
    levels: Vec<Level>,
}

impl PartialEq for RealBasis {
    fn eq(&self, other: &Self) -> bool {
        self.labels == other.labels
            && self.embeddings == other.embeddings
            && self.precision_digits == other.precision_digits
    }
}
impl Eq for RealBasis {}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct RealBasisJson {
    labels: Vec<String>,
    embeddings: Vec<String>,
    precision_digits: usize,
}

impl Serialize for RealBasis {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        RealBasisJson {
            labels: self.labels.clone(),
            embeddings: self.embeddings.clone(),
            precision_digits: self.precision_digits,
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for RealBasis {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let raw = RealBasisJson::deserialize(deserializer)?;
        RealBasis::new(raw.labels, raw.embeddings, raw.precision_digits).map_err(serde::de::Error::custom)
    }
}

impl RealBasis {
    pub fn new(labels: Vec<String>, embeddings: Vec<String>, precision_digits: usize) -> Result<Self> {
        Self::with_min_precision(labels, embeddings, precision_digits, MIN_PRECISION_DIGITS)
    }

    pub fn with_min_precision(
        labels: Vec<String>,
        embeddings: Vec<String>,
        precision_digits: usize,
        min_precision: usize,
    ) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::InvalidBasis("basis is empty".into()));
        }
        if labels.len() != embeddings.len() {
            return Err(Error::InvalidBasis(format!(
                "{} labels but {} embeddings",
                labels.len(),
                embeddings.len()
            )));
        }
        if precision_digits < min_precision {
            return Err(Error::InvalidBasis(format!(
                "declared precision {precision_digits} is below the minimum {min_precision}"
            )));
        }
        if embeddings[0].trim() != "1" {
            return Err(Error::InvalidBasis("first basis element must be the constant 1".into()));
        }
        let parsed = embeddings
            .iter()
            .map(|e| Embedding::parse(e, precision_digits))
            .collect::<Result<Vec<_>>>()?;
        let mut levels = Vec::new();
        let mut digits = INITIAL_DIGITS.min(precision_digits);
        loop {
            levels.push(Level {
                digits,
                scaled: parsed.iter().map(|e| e.scaled_floor(digits)).collect(),
            });
            if digits == precision_digits {
                break;
            }
            digits = (digits * 2).min(precision_digits);
        }
        Ok(RealBasis {
            labels,
            embeddings,
            precision_digits,
            parsed,
            levels,
        })
    }

    /// `{1, sqrt(2), sqrt(3), sqrt(5), ...}` with `size` elements: square roots of
    /// the first `size - 1` primes, which are linearly independent over the rationals.
    pub fn sqrt_primes(size: usize, digits: usize) -> Result<Self> {
        if size == 0 {
            return Err(Error::InvalidBasis("basis is empty".into()));
        }
        let mut labels = vec!["1".to_string()];
        let mut embeddings = vec!["1".to_string()];
        for p in primes(size - 1) {
            labels.push(format!("sqrt({p})"));
            embeddings.push(sqrt_decimal(p, digits));
        }
        Self::with_min_precision(labels, embeddings, digits, digits.min(MIN_PRECISION_DIGITS))
    }

    /// Shipped default: square roots of primes at 128 digits.
    pub fn default_sqrt(size: usize) -> Arc<Self> {
        Arc::new(Self::sqrt_primes(size, DEFAULT_PRECISION_DIGITS).expect("generated basis is valid"))
    }

    pub fn size(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn embeddings(&self) -> &[String] {
        &self.embeddings
    }

    pub fn precision_digits(&self) -> usize {
        self.precision_digits
    }

    /// Interval sign of `sum_i (numerators_i / common_denominator) * r_i` at one level.
    fn interval_sign(&self, level: &Level, numerators: &[BigInt]) -> Option<Sign> {
        let mut center = BigInt::zero();
        let mut slack_low = BigInt::zero();
        let mut slack_high = BigInt::zero();
        for ((p, n), emb) in numerators.iter().zip(&level.scaled).zip(&self.parsed) {
            if p.is_zero() {
                continue;
            }
            center += p * n;
            if !emb.exact {
                if p.is_negative() {
                    slack_low += p;
                } else {
                    slack_high += p;
                }
            }
        }
        let low = &center + slack_low;
        let high = center + slack_high;
        if low.is_positive() {
            Some(Sign::Positive)
        } else if high.is_negative() {
            Some(Sign::Negative)
        } else {
            None
        }
    }
}

impl fmt::Display for RealBasis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}}}", self.labels.join(", "))
    }
}

fn primes(count: usize) -> Vec<u64> {
    let mut out: Vec<u64> = Vec::with_capacity(count);
    let mut candidate = 2u64;
    while out.len() < count {
        if out.iter().take_while(|&&p| p * p <= candidate).all(|&p| !candidate.is_multiple_of(p)) {
            out.push(candidate);
        }
        candidate += 1;
    }
    out
}

/// Truncated decimal expansion of `sqrt(n)` with `digits` fractional digits.
fn sqrt_decimal(n: u64, digits: usize) -> String {
    let scaled = BigInt::from(n) * BigInt::from(10u32).pow(2 * digits as u32);
    let root = scaled.sqrt().to_string();
    let split = root.len() - digits;
    format!("{}.{}", &root[..split], &root[split..])
}

/// A rational linear combination of the elements of a [`RealBasis`].
#[derive(Clone, PartialEq, Eq)]
pub struct FormalReal {
    basis: Arc<RealBasis>,
    coeffs: Vec<BigRational>,
}

impl fmt::Debug for FormalReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FormalReal({self})")
    }
}

impl fmt::Display for FormalReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (c, label) in self.coeffs.iter().zip(self.basis.labels()) {
            if c.is_zero() {
                continue;
            }
            let neg = c.is_negative();
            let mag = c.abs();
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { '-' } else { '+' })?;
            }
            first = false;
            let is_one = label == "1";
            match (mag.is_one(), is_one) {
                (true, true) => write!(f, "1")?,
                (true, false) => write!(f, "{label}")?,
                (false, true) => write!(f, "{mag}")?,
                (false, false) => write!(f, "{mag}*{label}")?,
            }
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

impl FormalReal {
    pub fn zero(basis: &Arc<RealBasis>) -> Self {
        FormalReal {
            basis: basis.clone(),
            coeffs: vec![BigRational::zero(); basis.size()],
        }
    }

    /// The basis element with the given index.
    pub fn basis_element(basis: &Arc<RealBasis>, index: usize) -> Self {
        let mut x = Self::zero(basis);
        x.coeffs[index] = BigRational::one();
        x
    }

    pub fn from_rational(basis: &Arc<RealBasis>, q: BigRational) -> Self {
        let mut x = Self::zero(basis);
        x.coeffs[0] = q;
        x
    }

    pub fn from_coeffs(basis: &Arc<RealBasis>, coeffs: Vec<BigRational>) -> Result<Self> {
        if coeffs.len() != basis.size() {
            return Err(Error::DimensionMismatch {
                expected: basis.size(),
                found: coeffs.len(),
            });
        }
        Ok(FormalReal {
            basis: basis.clone(),
            coeffs,
        })
    }

    /// Convenience constructor from integer coefficients.
    pub fn from_ints(basis: &Arc<RealBasis>, coeffs: &[i64]) -> Result<Self> {
        Self::from_coeffs(
            basis,
            coeffs.iter().map(|&c| BigRational::from_integer(c.into())).collect(),
        )
    }

    /// Parses `"p/q"` (or `"p"`) coefficient strings.
    pub fn from_strings<S: AsRef<str>>(basis: &Arc<RealBasis>, coeffs: &[S]) -> Result<Self> {
        let parsed = coeffs
            .iter()
            .map(|s| parse_rational(s.as_ref()))
            .collect::<Result<Vec<_>>>()?;
        Self::from_coeffs(basis, parsed)
    }

    pub fn to_strings(&self) -> Vec<String> {
        self.coeffs.iter().map(format_rational).collect()
    }

    pub fn basis(&self) -> &Arc<RealBasis> {
        &self.basis
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    pub fn same_basis(&self, other: &FormalReal) -> bool {
        Arc::ptr_eq(&self.basis, &other.basis) || self.basis == other.basis
    }

    fn check_basis(&self, other: &FormalReal) -> Result<()> {
        if self.same_basis(other) {
            Ok(())
        } else {
            Err(Error::MixedBasis)
        }
    }

    pub fn try_add(&self, other: &FormalReal) -> Result<FormalReal> {
        self.check_basis(other)?;
        Ok(self.zip_with(other, |a, b| a + b))
    }

    pub fn try_sub(&self, other: &FormalReal) -> Result<FormalReal> {
        self.check_basis(other)?;
        Ok(self.zip_with(other, |a, b| a - b))
    }

    fn zip_with(&self, other: &FormalReal, f: impl Fn(&BigRational, &BigRational) -> BigRational) -> FormalReal {
        FormalReal {
            basis: self.basis.clone(),
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| f(a, b)).collect(),
        }
    }

    pub fn scale(&self, q: &BigRational) -> FormalReal {
        FormalReal {
            basis: self.basis.clone(),
            coeffs: self.coeffs.iter().map(|c| c * q).collect(),
        }
    }

    pub fn scale_int(&self, k: &BigInt) -> FormalReal {
        self.scale(&BigRational::from_integer(k.clone()))
    }

    /// `self - k * other`.
    pub fn sub_multiple(&self, k: &BigInt, other: &FormalReal) -> Result<FormalReal> {
        self.check_basis(other)?;
        let k = BigRational::from_integer(k.clone());
        Ok(self.zip_with(other, |a, b| a - &k * b))
    }

    /// Exact sign. Zero is decided from the coefficients; a nonzero value is
    /// bracketed with interval arithmetic at doubling precision.
    pub fn sign(&self) -> Result<Sign> {
        if self.is_zero() {
            return Ok(Sign::Zero);
        }
        let numerators = self.common_numerators();
        for level in &self.basis.levels {
            if let Some(s) = self.basis.interval_sign(level, &numerators) {
                return Ok(s);
            }
        }
        Err(Error::PrecisionExhausted {
            digits: self.basis.precision_digits,
        })
    }

    /// Sign of `self - other`.
    pub fn compare(&self, other: &FormalReal) -> Result<Sign> {
        self.try_sub(other)?.sign()
    }

    /// Coefficients over the common denominator.
    fn common_numerators(&self) -> Vec<BigInt> {
        let denom = self
            .coeffs
            .iter()
            .fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
        self.coeffs
            .iter()
            .map(|c| c.numer() * (&denom / c.denom()))
            .collect()
    }

    /// Rational approximation at full declared precision (lower end of the interval).
    pub fn approximate(&self) -> BigRational {
        let level = self.basis.levels.last().expect("at least one level");
        let scale = BigInt::from(10u32).pow(level.digits as u32);
        self.coeffs
            .iter()
            .zip(&level.scaled)
            .map(|(c, n)| c * BigRational::new(n.clone(), scale.clone()))
            .fold(BigRational::zero(), |a, b| a + b)
    }

    pub fn to_f64(&self) -> f64 {
        self.approximate().to_f64().unwrap_or(f64::NAN)
    }
}

/// Coefficient-wise exact combination `sum_k q_k x_k`.
pub fn linear_combine(terms: &[(BigRational, &FormalReal)]) -> Result<FormalReal> {
    let Some((_, first)) = terms.first() else {
        return Err(Error::InvalidBasis("empty combination has no basis".into()));
    };
    let mut acc = FormalReal::zero(first.basis());
    for (q, x) in terms {
        acc.check_basis(x)?;
        for (a, c) in acc.coeffs.iter_mut().zip(&x.coeffs) {
            if !c.is_zero() {
                *a += q * c;
            }
        }
    }
    Ok(acc)
}

/// Integer combination `sum_k m_k x_k`; all terms must share one basis.
pub fn integer_combine(basis: &Arc<RealBasis>, terms: impl IntoIterator<Item = (BigInt, FormalReal)>) -> Result<FormalReal> {
    let mut acc = FormalReal::zero(basis);
    for (m, x) in terms {
        acc.check_basis(&x)?;
        if m.is_zero() {
            continue;
        }
        let m = BigRational::from_integer(m);
        for (a, c) in acc.coeffs.iter_mut().zip(&x.coeffs) {
            if !c.is_zero() {
                *a += &m * c;
            }
        }
    }
    Ok(acc)
}

/// The `k >= 0` with `k*y < x < (k+1)*y`, certified by two sign evaluations.
pub fn floor_ratio(x: &FormalReal, y: &FormalReal) -> Result<BigInt> {
    x.check_basis(y)?;
    if !x.sign()?.is_positive() || !y.sign()?.is_positive() {
        return Err(Error::BoundaryHit);
    }
    let ratio = x.approximate() / y.approximate();
    let mut k = ratio.floor().to_integer().max(BigInt::zero());
    // The approximation is off by at most one in either direction; a few
    // corrections are enough.
    for _ in 0..8 {
        let low = x.sub_multiple(&k, y)?.sign()?;
        let high = y.scale_int(&(&k + 1u32)).try_sub(x)?.sign()?;
        match (low, high) {
            (Sign::Zero, _) | (_, Sign::Zero) => return Err(Error::BoundaryHit),
            (Sign::Positive, Sign::Positive) => return Ok(k),
            (Sign::Negative, _) => k -= 1u32,
            (_, Sign::Negative) => k += 1u32,
        }
        if k.is_negative() {
            return Err(Error::BoundaryHit);
        }
    }
    Err(Error::PrecisionExhausted {
        digits: x.basis.precision_digits,
    })
}

/// Rank of the coefficient vectors of `values` over their basis.
pub fn coefficient_rank(values: &[FormalReal]) -> usize {
    let rows: Vec<Vec<BigRational>> = values.iter().map(|x| x.coeffs.clone()).collect();
    crate::lattice::matrix::rational_rank(rows)
}

/// `true` when the values are linearly independent over the rationals
/// (under the basis independence contract).
pub fn rationally_independent(values: &[FormalReal]) -> bool {
    coefficient_rank(values) == values.len()
}

pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let bad = || Error::InvalidBasis(format!("{s:?} is not a rational"));
    match s.split_once('/') {
        Some((p, q)) => {
            let p: BigInt = p.trim().parse().map_err(|_| bad())?;
            let q: BigInt = q.trim().parse().map_err(|_| bad())?;
            if q.is_zero() {
                return Err(bad());
            }
            Ok(BigRational::new(p, q))
        }
        None => Ok(BigRational::from_integer(s.parse().map_err(|_| bad())?)),
    }
}

pub fn format_rational(q: &BigRational) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn basis() -> Arc<RealBasis> {
        RealBasis::default_sqrt(5)
    }

    fn r(basis: &Arc<RealBasis>, c: &[i64]) -> FormalReal {
        FormalReal::from_ints(basis, c).unwrap()
    }

    #[test]
    fn default_basis_embeddings() {
        let b = basis();
        assert_eq!(b.labels()[1], "sqrt(2)");
        assert!(b.embeddings()[1].starts_with("1.41421356237309504880168872420969807856967187537694"));
        assert!(b.embeddings()[4].starts_with("2.6457513110645905905016157536392604257102"));
        assert_eq!(b.embeddings()[2].split_once('.').unwrap().1.len(), 128);
    }

    #[test]
    fn linear_combine_examples() {
        let b = basis();
        let x = r(&b, &[0, 1, 1, 0, 0]);
        let one = BigRational::one();
        let z = linear_combine(&[(one.clone(), &x), (-one.clone(), &x)]).unwrap();
        assert!(z.is_zero());

        let b2 = Arc::new(RealBasis::sqrt_primes(2, 64).unwrap());
        let e1 = r(&b2, &[0, 1]);
        let e0 = r(&b2, &[1, 0]);
        let two = BigRational::from_integer(2.into());
        let three = BigRational::from_integer(3.into());
        let y = linear_combine(&[(two, &e1), (three, &e0)]).unwrap();
        assert_eq!(y, r(&b2, &[3, 2]));

        let s3 = r(&b, &[0, 0, 1, 0, 0]);
        let w = linear_combine(&[(one.clone(), &x), (-one, &s3)]).unwrap();
        assert_eq!(w, r(&b, &[0, 1, 0, 0, 0]));
    }

    #[test]
    fn mixed_basis_rejected() {
        let a = r(&basis(), &[0, 1, 0, 0, 0]);
        let other = RealBasis::default_sqrt(3);
        let c = r(&other, &[0, 1, 0]);
        assert_eq!(linear_combine(&[(BigRational::one(), &a), (BigRational::one(), &c)]), Err(Error::MixedBasis));
        assert_eq!(a.try_add(&c), Err(Error::MixedBasis));
    }

    #[test]
    fn equal_bases_are_compatible_across_allocations() {
        let a = r(&RealBasis::default_sqrt(3), &[0, 1, 0]);
        let c = r(&RealBasis::default_sqrt(3), &[0, 0, 1]);
        assert!(a.try_add(&c).is_ok());
    }

    #[test]
    fn sign_examples() {
        let b = basis();
        assert_eq!(FormalReal::zero(&b).sign().unwrap(), Sign::Zero);
        assert_eq!(r(&b, &[-1, 1, 0, 0, 0]).sign().unwrap(), Sign::Positive);
        assert_eq!(r(&b, &[3, -2, 0, 0, 0]).sign().unwrap(), Sign::Positive);
        assert_eq!(r(&b, &[-3, 2, 0, 0, 0]).sign().unwrap(), Sign::Negative);
    }

    #[test]
    fn sign_needs_refinement_for_close_values() {
        // 665857/470832 is a convergent of sqrt(2) accurate to ~2e-12.
        let b = basis();
        let x = FormalReal::from_coeffs(
            &b,
            vec![
                BigRational::new((-665857).into(), 470832.into()),
                BigRational::one(),
                BigRational::zero(),
                BigRational::zero(),
                BigRational::zero(),
            ],
        )
        .unwrap();
        assert_eq!(x.sign().unwrap(), Sign::Negative);
        // A convergent accurate to ~1e-70 needs the full 128 digits.
        let (p, q) = sqrt2_convergent(90);
        let y = FormalReal::from_coeffs(
            &b,
            vec![-BigRational::new(p, q), BigRational::one(), BigRational::zero(), BigRational::zero(), BigRational::zero()],
        )
        .unwrap();
        assert_ne!(y.sign().unwrap(), Sign::Zero);
    }

    fn sqrt2_convergent(steps: usize) -> (BigInt, BigInt) {
        let (mut p, mut q) = (BigInt::one(), BigInt::one());
        for _ in 0..steps {
            let np = &p + 2 * &q;
            let nq = &p + &q;
            p = np;
            q = nq;
        }
        (p, q)
    }

    #[test]
    fn precision_exhausted_on_inconsistent_embedding() {
        // An "irrational" whose embedding is exactly 3/2 to 64 digits.
        let emb = format!("1.5{}", "0".repeat(63));
        let b = Arc::new(RealBasis::new(vec!["1".into(), "fake".into()], vec!["1".into(), emb], 64).unwrap());
        let x = FormalReal::from_coeffs(
            &b,
            vec![BigRational::new((-3).into(), 2.into()), BigRational::one()],
        )
        .unwrap();
        assert_eq!(x.sign(), Err(Error::PrecisionExhausted { digits: 64 }));
    }

    #[test]
    fn floor_ratio_examples() {
        let b = basis();
        let s2 = r(&b, &[0, 1, 0, 0, 0]);
        let s3 = r(&b, &[0, 0, 1, 0, 0]);
        let three_plus_s2 = r(&b, &[3, 1, 0, 0, 0]);
        assert_eq!(floor_ratio(&three_plus_s2, &s2).unwrap(), BigInt::from(3));
        assert_eq!(floor_ratio(&s3, &s2).unwrap(), BigInt::from(1));
        assert_eq!(floor_ratio(&s2, &three_plus_s2).unwrap(), BigInt::from(0));
        let two_s2 = r(&b, &[0, 2, 0, 0, 0]);
        assert_eq!(floor_ratio(&two_s2, &s2), Err(Error::BoundaryHit));
    }

    #[test]
    fn floor_ratio_large_quotient() {
        let b = basis();
        let x = r(&b, &[1_000_000, 0, 1, 0, 0]);
        let y = r(&b, &[0, 1, 0, 0, 0]);
        let k = floor_ratio(&x, &y).unwrap();
        // (10^6 + sqrt 3) / sqrt 2 = 707108.0059...
        assert_eq!(k, BigInt::from(707108));
    }

    #[test]
    fn basis_validation() {
        let p = 64;
        assert!(RealBasis::new(vec!["x".into()], vec!["2".into()], p).is_err());
        assert!(RealBasis::new(vec!["1".into(), "x".into()], vec!["1".into(), "1.41".into()], p).is_err());
        assert!(RealBasis::new(vec!["1".into(), "x".into()], vec!["1".into(), format!("0.{}", "0".repeat(64))], p).is_err());
        assert!(RealBasis::new(vec!["1".into()], vec!["1".into()], 10).is_err());
        assert!(RealBasis::new(vec!["1".into(), "x".into()], vec!["1".into(), "-1".into()], p).is_err());
    }

    #[test]
    fn basis_json_roundtrip() {
        let b = RealBasis::sqrt_primes(3, 64).unwrap();
        let s = serde_json::to_string(&b).unwrap();
        let back: RealBasis = serde_json::from_str(&s).unwrap();
        assert_eq!(b, back);
    }

    #[test]
    fn strings_roundtrip() {
        let b = basis();
        let x = FormalReal::from_strings(&b, &["1/2", "-3", "0", "4/6", "7"]).unwrap();
        assert_eq!(x.to_strings(), vec!["1/2", "-3", "0", "2/3", "7"]);
        assert!(FormalReal::from_strings(&b, &["1/0", "0", "0", "0", "0"]).is_err());
        assert!(FormalReal::from_strings(&b, &["1"]).is_err());
    }

    #[test]
    fn display() {
        let b = basis();
        assert_eq!(r(&b, &[3, -2, 0, 0, 0]).to_string(), "3 - 2*sqrt(2)");
        assert_eq!(FormalReal::zero(&b).to_string(), "0");
    }

    #[test]
    fn rank_detects_dependence() {
        let b = basis();
        let a = r(&b, &[0, 1, 1, 0, 0]);
        let c = r(&b, &[0, 0, 1, 0, 0]);
        let d = r(&b, &[0, 1, 0, 0, 0]);
        assert!(rationally_independent(&[a.clone(), c.clone()]));
        assert!(!rationally_independent(&[a, c, d]));
    }
}
