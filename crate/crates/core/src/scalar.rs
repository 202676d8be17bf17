//! Scalars of the two supported optimization domains.
//!
//! Exact rationals carry all structural data (span legs, pullbacks,
//! polynomial coefficients). 64-bit floats are the evaluation domain of
//! smooth terms. Evaluation code is generic over [`Ring`], which both kinds
//! implement.

use alloc::string::String;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;
use core::str::FromStr;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Arbitrary-precision rational, always in lowest terms with positive denominator.
pub type Rational = BigRational;

/// Object of the underlying category: a dimension count. `0` is terminal, products add.
pub type Dim = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum ScalarError {
    #[error("scalar kind mismatch")]
    KindMismatch,
    #[error("float result is not finite")]
    NonFinite,
    #[error("rational magnitude exceeds the float range")]
    OutOfRange,
    #[error("invalid numeric literal")]
    Parse,
}

/// The kind of a [`Scalar`] or [`Vector`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ScalarKind {
    Rational,
    Real64,
}

/// A finite 64-bit float. NaN and infinities are rejected by [`Real64::new`].
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Real64(f64);

impl Real64 {
    pub fn new(value: f64) -> Result<Self, ScalarError> {
        if value.is_finite() {
            Ok(Real64(value))
        } else {
            Err(ScalarError::NonFinite)
        }
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Scalar {
    Rational(Rational),
    Real(Real64),
}

impl Scalar {
    pub fn rational(num: i64, den: i64) -> Scalar {
        Scalar::Rational(Rational::new(num.into(), den.into()))
    }

    pub fn real(value: f64) -> Result<Scalar, ScalarError> {
        Real64::new(value).map(Scalar::Real)
    }

    pub fn kind(&self) -> ScalarKind {
        match self {
            Scalar::Rational(_) => ScalarKind::Rational,
            Scalar::Real(_) => ScalarKind::Real64,
        }
    }

    pub fn zero(kind: ScalarKind) -> Scalar {
        match kind {
            ScalarKind::Rational => Scalar::Rational(<Rational as Zero>::zero()),
            ScalarKind::Real64 => Scalar::Real(Real64(0.0)),
        }
    }

    pub fn add(&self, other: &Scalar) -> Result<Scalar, ScalarError> {
        match (self, other) {
            (Scalar::Rational(a), Scalar::Rational(b)) => Ok(Scalar::Rational(a + b)),
            (Scalar::Real(a), Scalar::Real(b)) => Scalar::real(a.0 + b.0),
            _ => Err(ScalarError::KindMismatch),
        }
    }

    pub fn mul(&self, other: &Scalar) -> Result<Scalar, ScalarError> {
        match (self, other) {
            (Scalar::Rational(a), Scalar::Rational(b)) => Ok(Scalar::Rational(a * b)),
            (Scalar::Real(a), Scalar::Real(b)) => Scalar::real(a.0 * b.0),
            _ => Err(ScalarError::KindMismatch),
        }
    }

    pub fn neg(&self) -> Scalar {
        match self {
            Scalar::Rational(a) => Scalar::Rational(-a),
            Scalar::Real(a) => Scalar::Real(Real64(-a.0)),
        }
    }

    pub fn try_cmp(&self, other: &Scalar) -> Result<Ordering, ScalarError> {
        match (self, other) {
            (Scalar::Rational(a), Scalar::Rational(b)) => Ok(a.cmp(b)),
            (Scalar::Real(a), Scalar::Real(b)) => Ok(a.0.total_cmp(&b.0)),
            _ => Err(ScalarError::KindMismatch),
        }
    }

    /// Float view of the scalar (nearest double for rationals).
    pub fn to_f64(&self) -> Result<f64, ScalarError> {
        match self {
            Scalar::Rational(q) => rational_to_f64(q),
            Scalar::Real(r) => Ok(r.0),
        }
    }

    /// Converts a rational to the nearest `Real64`; reals pass through.
    pub fn to_real(&self) -> Result<Scalar, ScalarError> {
        self.to_f64().and_then(Scalar::real)
    }

    /// Parses a literal in the requested kind. Rationals accept `p/q`,
    /// integers and exact decimals such as `0.25` or `1e-3`.
    pub fn parse_as(text: &str, kind: ScalarKind) -> Result<Scalar, ScalarError> {
        match kind {
            ScalarKind::Rational => parse_rational(text).map(Scalar::Rational),
            ScalarKind::Real64 => {
                let q = text.trim();
                if q.contains('/') {
                    parse_rational(q).and_then(|r| Scalar::Rational(r).to_real())
                } else {
                    f64::from_str(q).map_err(|_| ScalarError::Parse).and_then(Scalar::real)
                }
            }
        }
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Rational(q) => write!(f, "{}/{}", q.numer(), q.denom()),
            Scalar::Real(r) => write!(f, "{:?}", r.0),
        }
    }
}

/// Nearest-even rounding of `num/den` to a double.
pub fn rational_to_f64(q: &Rational) -> Result<f64, ScalarError> {
    if Zero::is_zero(q) {
        return Ok(0.0);
    }
    let negative = q.is_negative();
    let num = q.numer().magnitude();
    let den = q.denom().magnitude();
    let (nb, db) = (num.bits() as i64, den.bits() as i64);

    let divide = |shift: i64| -> (BigUint, BigUint, BigUint) {
        if shift >= 0 {
            let n = num << (shift as usize);
            let (quot, rem) = n.div_rem(den);
            (quot, rem, den.clone())
        } else {
            let d = den << ((-shift) as usize);
            let (quot, rem) = num.div_rem(&d);
            (quot, rem, d)
        }
    };

    // The quotient num * 2^shift / den has 53 or 54 bits for this shift.
    let mut shift = 53 - (nb - db);
    let (mut quot, mut rem, mut divisor) = divide(shift);
    if quot.bits() > 53 {
        shift -= 1;
        (quot, rem, divisor) = divide(shift);
    }
    // Below the normal range the mantissa loses bits.
    if shift > 1074 {
        shift = 1074;
        (quot, rem, divisor) = divide(shift);
    }
    let twice_rem = rem << 1usize;
    let round_up = match twice_rem.cmp(&divisor) {
        Ordering::Greater => true,
        Ordering::Equal => quot.is_odd(),
        Ordering::Less => false,
    };
    if round_up {
        quot += 1u32;
    }
    let mantissa = quot.to_u64().ok_or(ScalarError::OutOfRange)? as f64;
    if shift < i32::MIN as i64 || shift > i32::MAX as i64 {
        return Err(ScalarError::OutOfRange);
    }
    let value = libm::scalbn(mantissa, -(shift as i32));
    if !value.is_finite() {
        return Err(ScalarError::OutOfRange);
    }
    Ok(if negative { -value } else { value })
}

/// Exact rational value of a finite double.
pub fn f64_to_rational(value: f64) -> Option<Rational> {
    Rational::from_float(value)
}

/// Parses `p/q`, an integer, or an exact decimal with optional exponent.
pub fn parse_rational(text: &str) -> Result<Rational, ScalarError> {
    let text = text.trim();
    if let Some((p, q)) = text.split_once('/') {
        let p = BigInt::from_str(p.trim()).map_err(|_| ScalarError::Parse)?;
        let q = BigInt::from_str(q.trim()).map_err(|_| ScalarError::Parse)?;
        if q.is_zero() {
            return Err(ScalarError::Parse);
        }
        return Ok(Rational::new(p, q));
    }
    let (mantissa, exponent) = match text.find(['e', 'E']) {
        Some(i) => {
            let e = i64::from_str(&text[i + 1..]).map_err(|_| ScalarError::Parse)?;
            (&text[..i], e)
        }
        None => (text, 0),
    };
    let (negative, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(ScalarError::Parse);
    }
    if !int_part.bytes().chain(frac_part.bytes()).all(|b| b.is_ascii_digit()) {
        return Err(ScalarError::Parse);
    }
    let mut all = String::with_capacity(int_part.len() + frac_part.len());
    all.push_str(int_part);
    all.push_str(frac_part);
    let magnitude = BigInt::from_str(&all).map_err(|_| ScalarError::Parse)?;
    let scale = exponent - frac_part.len() as i64;
    if scale.unsigned_abs() > 10_000 {
        return Err(ScalarError::Parse);
    }
    let ten_pow = num_traits::pow(BigInt::from(10u32), scale.unsigned_abs() as usize);
    let mut value = if scale >= 0 {
        Rational::from_integer(magnitude * ten_pow)
    } else {
        Rational::new(magnitude, ten_pow)
    };
    if negative {
        value = -value;
    }
    Ok(value)
}

/// Ring operations shared by the evaluation domains.
///
/// `f64` implements the smooth domain; `Rational` the polynomial domains, where
/// the transcendental primitives are unavailable.
pub trait Ring: Clone + PartialEq + fmt::Debug + Send + Sync + 'static {
    const KIND: ScalarKind;

    fn zero() -> Self;
    fn one() -> Self;
    fn add(&self, other: &Self) -> Self;
    fn mul(&self, other: &Self) -> Self;
    fn neg(&self) -> Self;
    fn abs(&self) -> Self;
    fn total_cmp(&self, other: &Self) -> Ordering;
    fn is_finite(&self) -> bool;
    fn sin(&self) -> Option<Self>;
    fn cos(&self) -> Option<Self>;
    fn exp(&self) -> Option<Self>;
    fn from_rational(q: &Rational) -> Self;
    fn into_scalar(self) -> Result<Scalar, ScalarError>;
    fn from_scalar(s: &Scalar) -> Option<Self>;

    fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    fn is_zero(&self) -> bool {
        *self == Self::zero()
    }

    /// Picks this ring's copy of a coefficient slice whose exact and float
    /// views are stored side by side.
    fn coefficients(coeffs: &Coefficients) -> &[Self];
}

impl Ring for f64 {
    const KIND: ScalarKind = ScalarKind::Real64;

    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn neg(&self) -> Self {
        -self
    }
    fn abs(&self) -> Self {
        libm::fabs(*self)
    }
    fn total_cmp(&self, other: &Self) -> Ordering {
        f64::total_cmp(self, other)
    }
    fn is_finite(&self) -> bool {
        f64::is_finite(*self)
    }
    fn sin(&self) -> Option<Self> {
        Some(libm::sin(*self))
    }
    fn cos(&self) -> Option<Self> {
        Some(libm::cos(*self))
    }
    fn exp(&self) -> Option<Self> {
        Some(libm::exp(*self))
    }
    fn from_rational(q: &Rational) -> Self {
        match rational_to_f64(q) {
            Ok(v) => v,
            Err(_) if q.is_negative() => f64::NEG_INFINITY,
            Err(_) => f64::INFINITY,
        }
    }
    fn into_scalar(self) -> Result<Scalar, ScalarError> {
        Scalar::real(self)
    }
    fn from_scalar(s: &Scalar) -> Option<Self> {
        match s {
            Scalar::Real(r) => Some(r.0),
            Scalar::Rational(_) => None,
        }
    }
    fn coefficients(coeffs: &Coefficients) -> &[Self] {
        &coeffs.approx
    }
}

impl Ring for Rational {
    const KIND: ScalarKind = ScalarKind::Rational;

    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn neg(&self) -> Self {
        -self
    }
    fn abs(&self) -> Self {
        Signed::abs(self)
    }
    fn total_cmp(&self, other: &Self) -> Ordering {
        self.cmp(other)
    }
    fn is_finite(&self) -> bool {
        true
    }
    fn sin(&self) -> Option<Self> {
        None
    }
    fn cos(&self) -> Option<Self> {
        None
    }
    fn exp(&self) -> Option<Self> {
        None
    }
    fn from_rational(q: &Rational) -> Self {
        q.clone()
    }
    fn into_scalar(self) -> Result<Scalar, ScalarError> {
        Ok(Scalar::Rational(self))
    }
    fn from_scalar(s: &Scalar) -> Option<Self> {
        match s {
            Scalar::Rational(q) => Some(q.clone()),
            Scalar::Real(_) => None,
        }
    }
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn coefficients(coeffs: &Coefficients) -> &[Self] {
        &coeffs.exact
    }
}

/// Exact coefficients with a precomputed float view (nearest doubles,
/// saturating to infinity outside the float range).
#[derive(Debug, Clone)]
pub struct Coefficients {
    exact: Vec<Rational>,
    approx: Vec<f64>,
}

impl Coefficients {
    pub fn new(exact: Vec<Rational>) -> Self {
        let approx = exact.iter().map(<f64 as Ring>::from_rational).collect();
        Coefficients { exact, approx }
    }

    pub fn exact(&self) -> &[Rational] {
        &self.exact
    }

    pub fn approx(&self) -> &[f64] {
        &self.approx
    }

    pub fn len(&self) -> usize {
        self.exact.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exact.is_empty()
    }

    pub fn into_exact(self) -> Vec<Rational> {
        self.exact
    }
}

impl PartialEq for Coefficients {
    fn eq(&self, other: &Self) -> bool {
        self.exact == other.exact
    }
}

impl Eq for Coefficients {}

/// A vector of scalars of a single kind.
#[derive(Debug, Clone, PartialEq)]
pub enum Vector {
    Rational(Vec<Rational>),
    Real(Vec<f64>),
}

impl Vector {
    pub fn real(entries: Vec<f64>) -> Result<Vector, ScalarError> {
        if entries.iter().all(|v| v.is_finite()) {
            Ok(Vector::Real(entries))
        } else {
            Err(ScalarError::NonFinite)
        }
    }

    pub fn from_ints(kind: ScalarKind, entries: &[i64]) -> Vector {
        match kind {
            ScalarKind::Rational => {
                Vector::Rational(entries.iter().map(|&v| Rational::from_integer(v.into())).collect())
            }
            ScalarKind::Real64 => Vector::Real(entries.iter().map(|&v| v as f64).collect()),
        }
    }

    pub fn zeros(kind: ScalarKind, dim: Dim) -> Vector {
        match kind {
            ScalarKind::Rational => Vector::Rational(alloc::vec![<Rational as Zero>::zero(); dim]),
            ScalarKind::Real64 => Vector::Real(alloc::vec![0.0; dim]),
        }
    }

    pub fn dim(&self) -> Dim {
        match self {
            Vector::Rational(v) => v.len(),
            Vector::Real(v) => v.len(),
        }
    }

    pub fn kind(&self) -> ScalarKind {
        match self {
            Vector::Rational(_) => ScalarKind::Rational,
            Vector::Real(_) => ScalarKind::Real64,
        }
    }

    pub fn get(&self, i: usize) -> Option<Scalar> {
        match self {
            Vector::Rational(v) => v.get(i).cloned().map(Scalar::Rational),
            Vector::Real(v) => v.get(i).map(|&x| Scalar::Real(Real64(x))),
        }
    }

    pub fn entries(&self) -> Vec<Scalar> {
        (0..self.dim()).filter_map(|i| self.get(i)).collect()
    }

    /// Float view of every entry.
    pub fn to_f64(&self) -> Result<Vec<f64>, ScalarError> {
        match self {
            Vector::Rational(v) => v.iter().map(rational_to_f64).collect(),
            Vector::Real(v) => Ok(v.clone()),
        }
    }

    /// Typed view for ring-generic code.
    pub fn as_ring<R: Ring>(&self) -> Option<Vec<R>> {
        match (R::KIND, self) {
            (ScalarKind::Rational, Vector::Rational(v)) => {
                Some(v.iter().map(|q| R::from_rational(q)).collect())
            }
            (ScalarKind::Real64, Vector::Real(v)) => v
                .iter()
                .map(|&x| R::from_scalar(&Scalar::Real(Real64(x))))
                .collect(),
            _ => None,
        }
    }

    pub fn from_ring<R: Ring>(entries: Vec<R>) -> Result<Vector, ScalarError> {
        let scalars: Result<Vec<Scalar>, _> = entries.into_iter().map(R::into_scalar).collect();
        Vector::from_scalars(R::KIND, scalars?)
    }

    pub fn from_scalars(kind: ScalarKind, scalars: Vec<Scalar>) -> Result<Vector, ScalarError> {
        match kind {
            ScalarKind::Rational => scalars
                .into_iter()
                .map(|s| match s {
                    Scalar::Rational(q) => Ok(q),
                    Scalar::Real(_) => Err(ScalarError::KindMismatch),
                })
                .collect::<Result<Vec<_>, _>>()
                .map(Vector::Rational),
            ScalarKind::Real64 => scalars
                .into_iter()
                .map(|s| match s {
                    Scalar::Real(r) => Ok(r.0),
                    Scalar::Rational(_) => Err(ScalarError::KindMismatch),
                })
                .collect::<Result<Vec<_>, _>>()
                .map(Vector::Real),
        }
    }

    /// Maximum absolute entry; zero for the empty vector.
    pub fn norm_inf(&self) -> Scalar {
        match self {
            Vector::Rational(v) => Scalar::Rational(linf(v)),
            Vector::Real(v) => Scalar::Real(Real64(linf(v))),
        }
    }
}

pub(crate) fn linf<R: Ring>(v: &[R]) -> R {
    v.iter().fold(R::zero(), |m, x| {
        let a = x.abs();
        if a.total_cmp(&m) == Ordering::Greater {
            a
        } else {
            m
        }
    })
}

#[cfg(test)]
pub(crate) fn to_bigint(value: i64) -> BigInt {
    BigInt::from(value)
}

pub(crate) fn is_integral(q: &Rational) -> bool {
    q.denom().sign() == Sign::Plus && q.denom().is_one()
}
