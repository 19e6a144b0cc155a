use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// An element `rational + irrational * sqrt(radicand)` of a real quadratic field.
///
/// The radicand is square-free. A value whose irrational coefficient is zero is
/// stored with radicand 1, so two equal numbers always have equal fields and the
/// derived `PartialEq` is exact equality.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct QuadSurd {
    rational: BigRational,
    irrational: BigRational,
    radicand: u64,
}

/// Splits `n` into `(k, d)` with `n = k^2 * d` and `d` square-free.
fn square_free_part(mut n: u64) -> (u64, u64) {
    let mut k = 1u64;
    let mut p = 2u64;
    while p * p <= n {
        while n.is_multiple_of(p * p) {
            n /= p * p;
            k *= p;
        }
        p += 1;
    }
    (k, n)
}

fn rational_sign(r: &BigRational) -> i8 {
    if r.is_zero() {
        0
    } else if r.is_positive() {
        1
    } else {
        -1
    }
}

impl QuadSurd {
    /// Builds `q0 + q1 * sqrt(n)`; square factors of `n` are moved into `q1`.
    pub fn new(q0: BigRational, q1: BigRational, n: u64) -> Result<Self> {
        if n == 0 {
            return Ok(Self::from_rational(q0));
        }
        let (k, d) = square_free_part(n);
        let q1 = q1 * BigRational::from_integer(BigInt::from(k));
        if d == 1 {
            return Ok(Self::from_rational(q0 + q1));
        }
        Ok(Self::normalized(q0, q1, d))
    }

    fn normalized(rational: BigRational, irrational: BigRational, radicand: u64) -> Self {
        if irrational.is_zero() || radicand == 1 {
            let rational = if radicand == 1 {
                rational + irrational
            } else {
                rational
            };
            return QuadSurd {
                rational,
                irrational: BigRational::zero(),
                radicand: 1,
            };
        }
        QuadSurd {
            rational,
            irrational,
            radicand,
        }
    }

    pub fn from_rational(r: BigRational) -> Self {
        QuadSurd {
            rational: r,
            irrational: BigRational::zero(),
            radicand: 1,
        }
    }

    pub fn from_integer(i: i64) -> Self {
        Self::from_rational(BigRational::from_integer(BigInt::from(i)))
    }

    pub fn ratio(num: i64, den: i64) -> Result<Self> {
        if den == 0 {
            return Err(Error::DivisionByZero);
        }
        Ok(Self::from_rational(BigRational::new(
            BigInt::from(num),
            BigInt::from(den),
        )))
    }

    /// `sqrt(n)` in reduced form.
    pub fn sqrt(n: u64) -> Self {
        Self::new(BigRational::zero(), BigRational::one(), n).expect("n > 0 never fails")
    }

    pub fn rational_part(&self) -> &BigRational {
        &self.rational
    }

    pub fn irrational_part(&self) -> &BigRational {
        &self.irrational
    }

    /// Square-free radicand; 1 for rational values.
    pub fn radicand(&self) -> u64 {
        self.radicand
    }

    pub fn is_rational(&self) -> bool {
        self.irrational.is_zero()
    }

    pub fn is_zero(&self) -> bool {
        self.rational.is_zero() && self.irrational.is_zero()
    }

    fn common_radicand(&self, other: &Self) -> Result<u64> {
        match (self.radicand, other.radicand) {
            (1, d) | (d, 1) => Ok(d),
            (d, e) if d == e => Ok(d),
            (d, e) => Err(Error::MixedRadicand(d, e)),
        }
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        let d = self.common_radicand(other)?;
        Ok(Self::normalized(
            &self.rational + &other.rational,
            &self.irrational + &other.irrational,
            d,
        ))
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self> {
        let d = self.common_radicand(other)?;
        Ok(Self::normalized(
            &self.rational - &other.rational,
            &self.irrational - &other.irrational,
            d,
        ))
    }

    pub fn checked_mul(&self, other: &Self) -> Result<Self> {
        let d = self.common_radicand(other)?;
        let dd = BigRational::from_integer(BigInt::from(d));
        let rational = &self.rational * &other.rational + &self.irrational * &other.irrational * dd;
        let irrational = &self.rational * &other.irrational + &self.irrational * &other.rational;
        Ok(Self::normalized(rational, irrational, d))
    }

    /// `q0^2 - q1^2 d`, the field norm. Zero only for zero since `d` is not a square.
    pub fn norm(&self) -> BigRational {
        let dd = BigRational::from_integer(BigInt::from(self.radicand));
        &self.rational * &self.rational - &self.irrational * &self.irrational * dd
    }

    pub fn conjugate(&self) -> Self {
        Self::normalized(
            self.rational.clone(),
            -self.irrational.clone(),
            self.radicand,
        )
    }

    pub fn checked_div(&self, other: &Self) -> Result<Self> {
        if other.is_zero() {
            return Err(Error::DivisionByZero);
        }
        self.common_radicand(other)?;
        if other.is_rational() {
            return Ok(Self::normalized(
                &self.rational / &other.rational,
                &self.irrational / &other.rational,
                self.radicand,
            ));
        }
        let norm = other.norm();
        let num = self.checked_mul(&other.conjugate())?;
        Ok(Self::normalized(
            num.rational / &norm,
            num.irrational / &norm,
            num.radicand,
        ))
    }

    pub fn neg(&self) -> Self {
        Self::normalized(
            -self.rational.clone(),
            -self.irrational.clone(),
            self.radicand,
        )
    }

    /// Sign of the real number, decided without rounding.
    pub fn signum(&self) -> i8 {
        let s0 = rational_sign(&self.rational);
        let s1 = rational_sign(&self.irrational);
        if s1 == 0 {
            return s0;
        }
        if s0 == 0 || s0 == s1 {
            return s1;
        }
        // opposite signs: the larger of q0^2 and q1^2 d wins
        let dd = BigRational::from_integer(BigInt::from(self.radicand));
        let lhs = &self.rational * &self.rational;
        let rhs = &self.irrational * &self.irrational * dd;
        if lhs > rhs {
            s0
        } else {
            s1
        }
    }

    pub fn checked_cmp(&self, other: &Self) -> Result<Ordering> {
        Ok(match self.checked_sub(other)?.signum() {
            -1 => Ordering::Less,
            0 => Ordering::Equal,
            _ => Ordering::Greater,
        })
    }

    pub fn abs(&self) -> Self {
        if self.signum() < 0 {
            self.neg()
        } else {
            self.clone()
        }
    }

    /// Nearest double. When the two parts have opposite signs the value is
    /// evaluated as `norm / (q0 - q1 sqrt d)` to avoid cancellation.
    pub fn to_f64(&self) -> f64 {
        let q0 = self.rational.to_f64().unwrap_or(f64::NAN);
        if self.is_rational() {
            return q0;
        }
        let root = (self.radicand as f64).sqrt();
        let q1 = self.irrational.to_f64().unwrap_or(f64::NAN);
        if rational_sign(&self.rational) * rational_sign(&self.irrational) < 0 {
            let norm = self.norm().to_f64().unwrap_or(f64::NAN);
            norm / (q0 - q1 * root)
        } else {
            q0 + q1 * root
        }
    }

    /// Largest integer not exceeding the value.
    pub fn floor(&self) -> BigInt {
        let guess = self.to_f64().floor();
        let mut k = BigInt::from(guess as i64);
        loop {
            let kq = Self::from_rational(BigRational::from_integer(k.clone()));
            if self.checked_cmp(&kq).expect("rational operand") == Ordering::Less {
                k -= 1;
                continue;
            }
            let next = Self::from_rational(BigRational::from_integer(&k + 1));
            if self.checked_cmp(&next).expect("rational operand") != Ordering::Less {
                k += 1;
                continue;
            }
            return k;
        }
    }
}

impl fmt::Display for QuadSurd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_rational() {
            return write!(f, "{}", self.rational);
        }
        let sign = if self.irrational.is_negative() {
            '-'
        } else {
            '+'
        };
        write!(
            f,
            "{} {} {}*sqrt({})",
            self.rational,
            sign,
            self.irrational.abs(),
            self.radicand
        )
    }
}

pub(crate) fn parse_rational(s: &str) -> Result<BigRational> {
    let bad = || Error::Parse(format!("not a rational: {s:?}"));
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n, d),
        None => (s, "1"),
    };
    let num = BigInt::from_str(num).map_err(|_| bad())?;
    let den = BigInt::from_str(den).map_err(|_| bad())?;
    if den.is_zero() {
        return Err(Error::DivisionByZero);
    }
    Ok(BigRational::new(num, den))
}

impl FromStr for QuadSurd {
    type Err = Error;

    /// Accepts `p/q`, `q0 + q1*sqrt(d)`, `q0 - q1*sqrt(d)`, `q1*sqrt(d)` and `sqrt(d)`.
    fn from_str(s: &str) -> Result<Self> {
        let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let Some(root_at) = compact.find("sqrt(") else {
            return Ok(Self::from_rational(parse_rational(&compact)?));
        };
        let radicand_text = compact[root_at + 5..]
            .strip_suffix(')')
            .ok_or_else(|| Error::Parse(format!("unterminated sqrt in {s:?}")))?;
        let radicand: u64 = radicand_text
            .parse()
            .map_err(|_| Error::Parse(format!("bad radicand in {s:?}")))?;
        let head = &compact[..root_at];
        let split = head
            .char_indices()
            .filter(|&(i, c)| i > 0 && (c == '+' || c == '-'))
            .map(|(i, _)| i)
            .next_back();
        let (q0, coeff) = match split {
            Some(i) => (parse_rational(&head[..i])?, &head[i..]),
            None => (BigRational::zero(), head),
        };
        let coeff = coeff.strip_suffix('*').unwrap_or(coeff);
        let coeff = coeff.strip_prefix('+').unwrap_or(coeff);
        let q1 = match coeff {
            "" => BigRational::one(),
            "-" => -BigRational::one(),
            c => parse_rational(c)?,
        };
        if radicand == 0 {
            return Err(Error::Parse(format!("radicand must be positive in {s:?}")));
        }
        Self::new(q0, q1, radicand)
    }
}
