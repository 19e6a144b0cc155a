//! Field values: exact arithmetic in a real quadratic field `Q(sqrt d)` or plain `f64`.
//!
//! Every breakpoint and level of the constructed invariant systems lives in some
//! `Q(sqrt(n^2 ± 1))`, so the exact backend decides invariance by equality
//! rather than by a tolerance. The float backend exists for random systems and
//! for simulation.

mod surd;

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

pub use surd::QuadSurd;

/// Which arithmetic a value (or a whole step function) uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Backend {
    /// Exact arithmetic; radicand 1 means purely rational.
    Exact(u64),
    Float,
}

impl Backend {
    /// The backend able to hold values of both `self` and `other`.
    pub fn join(self, other: Backend) -> Result<Backend> {
        match (self, other) {
            (Backend::Float, Backend::Float) => Ok(Backend::Float),
            (Backend::Exact(1), Backend::Exact(d)) | (Backend::Exact(d), Backend::Exact(1)) => {
                Ok(Backend::Exact(d))
            }
            (Backend::Exact(d), Backend::Exact(e)) if d == e => Ok(Backend::Exact(d)),
            (Backend::Exact(d), Backend::Exact(e)) => Err(Error::MixedRadicand(d, e)),
            _ => Err(Error::MixedBackend),
        }
    }

    pub fn is_exact(self) -> bool {
        matches!(self, Backend::Exact(_))
    }
}

impl fmt::Display for Backend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Backend::Exact(d) => write!(f, "exact-{d}"),
            Backend::Float => f.write_str("float"),
        }
    }
}

impl FromStr for Backend {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "float" {
            return Ok(Backend::Float);
        }
        if s == "exact" {
            return Ok(Backend::Exact(1));
        }
        s.strip_prefix("exact-")
            .and_then(|d| d.parse::<u64>().ok())
            .filter(|&d| d > 0)
            .map(Backend::Exact)
            .ok_or_else(|| Error::Parse(format!("unknown backend {s:?}")))
    }
}

/// A field value on one of the two backends.
#[derive(Clone, Debug)]
pub enum Scalar {
    Exact(QuadSurd),
    Float(f64),
}

impl PartialEq for Scalar {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Scalar::Exact(x), Scalar::Exact(y)) => x == y,
            (Scalar::Float(x), Scalar::Float(y)) => x == y,
            _ => false,
        }
    }
}

impl Scalar {
    pub fn int(i: i64) -> Self {
        Scalar::Exact(QuadSurd::from_integer(i))
    }

    /// Exact `num/den`. Panics on a zero denominator.
    pub fn ratio(num: i64, den: i64) -> Self {
        Scalar::Exact(QuadSurd::ratio(num, den).expect("nonzero denominator"))
    }

    pub fn float(v: f64) -> Self {
        Scalar::Float(v)
    }

    pub fn sqrt_of(n: u64) -> Self {
        Scalar::Exact(QuadSurd::sqrt(n))
    }

    pub fn from_rational(r: BigRational) -> Self {
        Scalar::Exact(QuadSurd::from_rational(r))
    }

    pub fn backend(&self) -> Backend {
        match self {
            Scalar::Exact(q) => Backend::Exact(q.radicand()),
            Scalar::Float(_) => Backend::Float,
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Scalar::Exact(_))
    }

    /// An integer on the same backend as `self`.
    pub fn int_like(&self, i: i64) -> Scalar {
        match self {
            Scalar::Exact(_) => Scalar::int(i),
            Scalar::Float(_) => Scalar::Float(i as f64),
        }
    }

    pub fn zero_like(&self) -> Scalar {
        self.int_like(0)
    }

    pub fn one_like(&self) -> Scalar {
        self.int_like(1)
    }

    /// Converts to the given backend. Exact to float always succeeds; float to
    /// exact is refused.
    pub fn to_backend(&self, backend: Backend) -> Result<Scalar> {
        match (self, backend) {
            (Scalar::Float(_), Backend::Exact(_)) => Err(Error::MixedBackend),
            (Scalar::Exact(q), Backend::Float) => Ok(Scalar::Float(q.to_f64())),
            (s, b) => {
                s.backend().join(b)?;
                Ok(s.clone())
            }
        }
    }

    pub fn to_float(&self) -> Scalar {
        Scalar::Float(self.to_f64())
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Scalar::Exact(q) => q.to_f64(),
            Scalar::Float(v) => *v,
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Scalar::Exact(q) => q.is_zero(),
            Scalar::Float(v) => *v == 0.0,
        }
    }

    pub fn signum(&self) -> i8 {
        match self {
            Scalar::Exact(q) => q.signum(),
            Scalar::Float(v) if *v > 0.0 => 1,
            Scalar::Float(v) if *v < 0.0 => -1,
            Scalar::Float(_) => 0,
        }
    }

    pub fn try_add(&self, other: &Scalar) -> Result<Scalar> {
        match (self, other) {
            (Scalar::Exact(x), Scalar::Exact(y)) => Ok(Scalar::Exact(x.checked_add(y)?)),
            (Scalar::Float(x), Scalar::Float(y)) => Ok(Scalar::Float(x + y)),
            _ => Err(Error::MixedBackend),
        }
    }

    pub fn try_sub(&self, other: &Scalar) -> Result<Scalar> {
        match (self, other) {
            (Scalar::Exact(x), Scalar::Exact(y)) => Ok(Scalar::Exact(x.checked_sub(y)?)),
            (Scalar::Float(x), Scalar::Float(y)) => Ok(Scalar::Float(x - y)),
            _ => Err(Error::MixedBackend),
        }
    }

    pub fn try_mul(&self, other: &Scalar) -> Result<Scalar> {
        match (self, other) {
            (Scalar::Exact(x), Scalar::Exact(y)) => Ok(Scalar::Exact(x.checked_mul(y)?)),
            (Scalar::Float(x), Scalar::Float(y)) => Ok(Scalar::Float(x * y)),
            _ => Err(Error::MixedBackend),
        }
    }

    pub fn try_div(&self, other: &Scalar) -> Result<Scalar> {
        match (self, other) {
            (Scalar::Exact(x), Scalar::Exact(y)) => Ok(Scalar::Exact(x.checked_div(y)?)),
            (Scalar::Float(_), Scalar::Float(y)) if *y == 0.0 => Err(Error::DivisionByZero),
            (Scalar::Float(x), Scalar::Float(y)) => Ok(Scalar::Float(x / y)),
            _ => Err(Error::MixedBackend),
        }
    }

    pub fn neg(&self) -> Scalar {
        match self {
            Scalar::Exact(q) => Scalar::Exact(q.neg()),
            Scalar::Float(v) => Scalar::Float(-v),
        }
    }

    pub fn abs(&self) -> Scalar {
        match self {
            Scalar::Exact(q) => Scalar::Exact(q.abs()),
            Scalar::Float(v) => Scalar::Float(v.abs()),
        }
    }

    /// Total order of the real embedding; floats use `total_cmp`.
    pub fn try_cmp(&self, other: &Scalar) -> Result<Ordering> {
        match (self, other) {
            (Scalar::Exact(x), Scalar::Exact(y)) => x.checked_cmp(y),
            (Scalar::Float(x), Scalar::Float(y)) => Ok(x.total_cmp(y)),
            _ => Err(Error::MixedBackend),
        }
    }

    pub fn try_lt(&self, other: &Scalar) -> Result<bool> {
        Ok(self.try_cmp(other)? == Ordering::Less)
    }

    pub fn try_le(&self, other: &Scalar) -> Result<bool> {
        Ok(self.try_cmp(other)? != Ordering::Greater)
    }

    pub fn try_max(&self, other: &Scalar) -> Result<Scalar> {
        Ok(if self.try_lt(other)? {
            other.clone()
        } else {
            self.clone()
        })
    }

    pub fn try_min(&self, other: &Scalar) -> Result<Scalar> {
        Ok(if other.try_lt(self)? {
            other.clone()
        } else {
            self.clone()
        })
    }

    /// Largest integer `<= self`.
    pub fn floor(&self) -> BigInt {
        match self {
            Scalar::Exact(q) => q.floor(),
            Scalar::Float(v) => BigInt::from(v.floor() as i64),
        }
    }

    /// Parses with a target backend: exact forms are kept exact unless the
    /// backend is float; decimals are refused by the exact backend.
    pub fn parse_for(s: &str, backend: Backend) -> Result<Scalar> {
        let value: Scalar = s.parse()?;
        value.to_backend(backend)
    }
}

fn looks_decimal(s: &str) -> bool {
    let t = s.trim();
    !t.contains("sqrt")
        && (t.contains('.')
            || t.contains('e')
            || t.contains('E')
            || t.eq_ignore_ascii_case("inf")
            || t.eq_ignore_ascii_case("nan"))
}

impl FromStr for Scalar {
    type Err = Error;

    /// `p/q` and `q0 + q1*sqrt(d)` parse exactly; decimals parse as floats.
    fn from_str(s: &str) -> Result<Self> {
        if looks_decimal(s) {
            let v: f64 = s
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("not a number: {s:?}")))?;
            if !v.is_finite() {
                return Err(Error::Parse(format!("non-finite value {s:?}")));
            }
            return Ok(Scalar::Float(v));
        }
        Ok(Scalar::Exact(s.parse()?))
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Exact(q) => write!(f, "{q}"),
            // shortest round-trip representation, always with a '.' or exponent
            Scalar::Float(v) => write!(f, "{v:?}"),
        }
    }
}

impl Serialize for Scalar {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Scalar {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        text.parse().map_err(serde::de::Error::custom)
    }
}

/// A subinterval of `[0, 1]`. Left-closed; `closed_right` marks `[lo, hi]`.
///
/// Endpoints only matter up to measure zero everywhere in this crate, the flag
/// is kept for reporting.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: Scalar,
    pub hi: Scalar,
    pub closed_right: bool,
}

impl Interval {
    pub fn new(lo: Scalar, hi: Scalar, closed_right: bool) -> Result<Self> {
        if hi.try_lt(&lo)? {
            return Err(Error::OutOfRange(format!(
                "interval [{lo}, {hi}) is reversed"
            )));
        }
        Ok(Interval {
            lo,
            hi,
            closed_right,
        })
    }

    /// `[lo, hi)`; a reversed pair collapses to the empty interval at `lo`.
    pub fn half_open(lo: Scalar, hi: Scalar) -> Result<Self> {
        let hi = hi.try_max(&lo)?;
        Ok(Interval {
            lo,
            hi,
            closed_right: false,
        })
    }

    pub fn closed(lo: Scalar, hi: Scalar) -> Result<Self> {
        Self::new(lo, hi, true)
    }

    pub fn unit(backend: Backend) -> Self {
        let one = match backend {
            Backend::Float => Scalar::Float(1.0),
            Backend::Exact(_) => Scalar::int(1),
        };
        Interval {
            lo: one.zero_like(),
            hi: one,
            closed_right: true,
        }
    }

    /// Lebesgue-null: `lo >= hi`.
    pub fn is_null(&self) -> Result<bool> {
        self.hi.try_le(&self.lo)
    }

    pub fn length(&self) -> Result<Scalar> {
        self.hi.try_sub(&self.lo)
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let close = if self.closed_right { ']' } else { ')' };
        write!(f, "[{}, {}{}", self.lo, self.hi, close)
    }
}
