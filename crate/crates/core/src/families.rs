//! Explicit invariant systems.
//!
//! * [`lebesgue_family`]: `a = 1/n`, `p ≡ 1` with the staircase equipment.
//! * [`nonconstant_family`]: a three-level step density for every `n >= 2`,
//!   with `a` a quadratic irrational in `(1/(n+1), 1/n)`.
//! * [`renyi_system`]: the golden-ratio member with `α1 ≡ 0`, which restricts
//!   to the classical map `x ↦ x/(1-a) mod (1-a)` on `[0, 1-a]`.
//!
//! Density levels are called `beta_level` and `gamma_level` to keep them apart
//! from the expansion base `1/(1-a)`.

use num_bigint::BigInt;
use num_rational::BigRational;

use crate::error::{Error, Result};
use crate::numerics::{Backend, Interval, QuadSurd, Scalar};
use crate::piecewise::StepFunction;
use crate::system::{AffineBranch, EquippedSystem, PiecewiseAffineMap};

/// Parameters of a member of the non-constant family.
#[derive(Clone, Debug, PartialEq)]
pub struct FamilyParams {
    pub n: u32,
    pub beta_level: Scalar,
    pub gamma_level: Scalar,
    pub fill: Scalar,
}

impl FamilyParams {
    pub fn build(&self) -> Result<EquippedSystem> {
        nonconstant_family(self.n, &self.beta_level, &self.gamma_level, &self.fill)
    }
}

fn check_n(n: u32) -> Result<()> {
    if n < 2 {
        return Err(Error::OutOfRange(format!("n = {n} must be at least 2")));
    }
    Ok(())
}

fn check_fill(fill: &Scalar) -> Result<()> {
    if fill.signum() < 0 || fill.one_like().try_lt(fill)? {
        return Err(Error::OutOfRange(format!("fill {fill} must lie in [0, 1]")));
    }
    Ok(())
}

fn check_level(level: &Scalar) -> Result<()> {
    if level.signum() < 0 {
        return Err(Error::OutOfRange(format!(
            "density level {level} is negative"
        )));
    }
    Ok(())
}

/// Moves an exact value onto the float backend when any companion is a float.
fn align(value: Scalar, companions: &[&Scalar]) -> Scalar {
    if companions.iter().any(|c| !c.is_exact()) {
        value.to_float()
    } else {
        value
    }
}

fn rational(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// `a = 1/n`, `p ≡ 1`, `α1 = (n-k)/(n-1)` on `[(k-1)/n, k/n)` for `k = 2..n-1`
/// and `fill` elsewhere.
pub fn lebesgue_family(n: u32, fill: &Scalar) -> Result<EquippedSystem> {
    check_n(n)?;
    check_fill(fill)?;
    let n = n as i64;
    let at = |k: i64| align(Scalar::ratio(k, n), &[fill]);
    let mut breakpoints = vec![at(0)];
    let mut values = Vec::new();
    if n > 2 {
        breakpoints.push(at(1));
        values.push(fill.clone());
        for k in 2..n {
            breakpoints.push(at(k));
            values.push(align(Scalar::ratio(n - k, n - 1), &[fill]));
        }
    }
    breakpoints.push(at(n));
    values.push(fill.clone());
    let alpha1 = StepFunction::new(breakpoints, values)?;
    EquippedSystem::new(at(1), StepFunction::constant(fill.one_like()), alpha1)
}

/// The parameter of the non-constant family: `(n+1-√(n²+1))/n` for even `n`,
/// `(n+1-√(n²-1))/(n+1)` for odd `n`.
pub fn family_parameter(n: u32) -> Result<Scalar> {
    check_n(n)?;
    let nn = n as i64;
    let surd = if n.is_multiple_of(2) {
        QuadSurd::new(
            rational(nn + 1, nn),
            rational(-1, nn),
            (n as u64).pow(2) + 1,
        )?
    } else {
        QuadSurd::new(rational(1, 1), rational(-1, nn + 1), (n as u64).pow(2) - 1)?
    };
    Ok(Scalar::Exact(surd))
}

/// `m` with `n = 2m` or `n = 2m - 1`.
fn half_index(n: u32) -> i64 {
    (n as i64 + 1) / 2
}

/// The three-level density of the family.
pub fn family_density(
    n: u32,
    a: &Scalar,
    beta_level: &Scalar,
    gamma_level: &Scalar,
) -> Result<StepFunction> {
    let m = half_index(n);
    let one = a.one_like();
    let ma = a.try_mul(&a.int_like(m))?;
    let one_minus_ma = one.try_sub(&ma)?;
    let middle = beta_level.try_add(gamma_level)?.try_mul(&one_minus_ma)?;
    let (first_break, second_break) = if n.is_multiple_of(2) {
        (ma.clone(), one_minus_ma.clone())
    } else {
        (one_minus_ma.clone(), ma.clone())
    };
    StepFunction::new(
        vec![a.zero_like(), first_break, second_break, one],
        vec![beta_level.clone(), middle, gamma_level.clone()],
    )
}

/// Value of `α1` on one piece of the overlap and the level it was divided by.
enum Piece {
    /// `s + 2 - (s+1)/(1-a)`, determined when `beta_level > 0`.
    Beta(Scalar),
    /// `γ/(β+γ)`, determined when `β + γ > 0`.
    Mixed,
    /// `a(n-s-k)/(1-a)`, determined when `gamma_level > 0`.
    Gamma(Scalar),
}

/// The nonconstant invariant family for `n >= 2` and levels `β, γ >= 0`.
///
/// Even `n = 2m`: `p = β on [0, ma), (β+γ)(1-ma) on [ma, 1-ma), γ on [1-ma, 1]`.
/// Odd `n = 2m-1`: `p = β on [0, 1-ma), (β+γ)(1-ma) on [1-ma, ma), γ on [ma, 1]`.
///
/// On the overlap, `α1(x + s a)` is read off the closed forms for `x` in
/// `[a, 1-(n-1)a)` (`s = 0..n-2`) and in `[1-(n-1)a, 2a)` (`s = 0..n-3`).
/// Where the level a formula divides by is zero, `α1 = fill`.
pub fn nonconstant_family(
    n: u32,
    beta_level: &Scalar,
    gamma_level: &Scalar,
    fill: &Scalar,
) -> Result<EquippedSystem> {
    check_n(n)?;
    check_level(beta_level)?;
    check_level(gamma_level)?;
    check_fill(fill)?;
    let inputs = [beta_level, gamma_level, fill];
    let (beta_level, gamma_level, fill) = (
        &align(beta_level.clone(), &inputs),
        &align(gamma_level.clone(), &inputs),
        &align(fill.clone(), &inputs),
    );
    let a = align(family_parameter(n)?, &[fill]);
    let p = family_density(n, &a, beta_level, gamma_level)?;

    let one = a.one_like();
    let inv = one.try_div(&one.try_sub(&a)?)?;
    let m = half_index(n);
    let n_i = n as i64;
    let even = n.is_multiple_of(2);
    let mult = |k: i64| a.try_mul(&a.int_like(k));
    let lead =
        |s: i64| -> Result<Scalar> { a.int_like(s + 2).try_sub(&a.int_like(s + 1).try_mul(&inv)?) };
    let tail = |s: i64, k: i64| -> Result<Scalar> { mult(n_i - s - k)?.try_mul(&inv) };

    let level_sum = beta_level.try_add(gamma_level)?;
    let resolve = |piece: Piece| -> Result<Scalar> {
        Ok(match piece {
            Piece::Beta(v) if !beta_level.is_zero() => v,
            Piece::Gamma(v) if !gamma_level.is_zero() => v,
            Piece::Mixed if !level_sum.is_zero() => gamma_level.try_div(&level_sum)?,
            _ => fill.clone(),
        })
    };

    let gamma_split = one.try_sub(&mult(n_i - 1)?)?;
    let mut breakpoints = vec![a.zero_like(), a.clone()];
    let mut values = vec![fill.clone()];
    for s in 0..=(n_i - 2) {
        // x in [a, 1-(n-1)a)
        let upper = if even {
            match s {
                s if s <= m - 2 => Piece::Beta(lead(s)?),
                s if s == m - 1 => Piece::Mixed,
                s => Piece::Gamma(tail(s, 1)?),
            }
        } else if s <= m - 2 {
            Piece::Beta(lead(s)?)
        } else {
            Piece::Gamma(tail(s, 1)?)
        };
        breakpoints.push(gamma_split.try_add(&mult(s)?)?);
        values.push(resolve(upper)?);
        if s == n_i - 2 {
            break;
        }
        // x in [1-(n-1)a, 2a)
        let lower = if even {
            if s <= m - 2 {
                Piece::Beta(lead(s)?)
            } else {
                Piece::Gamma(tail(s, 2)?)
            }
        } else {
            match s {
                s if s <= m - 3 => Piece::Beta(lead(s)?),
                s if s == m - 2 => Piece::Mixed,
                s => Piece::Gamma(tail(s, 2)?),
            }
        };
        breakpoints.push(mult(s + 2)?);
        values.push(resolve(lower)?);
    }
    breakpoints.push(one.clone());
    values.push(fill.clone());
    let alpha1 = StepFunction::new(breakpoints, values)?;
    EquippedSystem::new(a, p, alpha1)
}

/// `μ([0, 1])` of the family: `(1+n²-n√(n²+1))(β+γ)` for even `n`,
/// `(1-n²+n√(n²-1))(β+γ)` for odd `n`.
pub fn total_mass(n: u32, beta_level: &Scalar, gamma_level: &Scalar) -> Result<Scalar> {
    check_n(n)?;
    check_level(beta_level)?;
    check_level(gamma_level)?;
    let nn = n as i64;
    let factor = if n.is_multiple_of(2) {
        QuadSurd::new(
            rational(1 + nn * nn, 1),
            rational(-nn, 1),
            (n as u64).pow(2) + 1,
        )?
    } else {
        QuadSurd::new(
            rational(1 - nn * nn, 1),
            rational(nn, 1),
            (n as u64).pow(2) - 1,
        )?
    };
    let levels = [beta_level, gamma_level];
    let sum = align(beta_level.clone(), &levels).try_add(&align(gamma_level.clone(), &levels))?;
    align(Scalar::Exact(factor), &levels).try_mul(&sum)
}

/// Rescales `p` to unit mass; `α1` and invariance are unchanged.
pub fn normalize(sys: &EquippedSystem) -> Result<EquippedSystem> {
    let mass = sys.p().total_mass()?;
    if mass.is_zero() {
        return Err(Error::ZeroMass);
    }
    let p = sys.p().scale(&mass.one_like().try_div(&mass)?)?;
    sys.with_density(p)
}

/// The golden-ratio system in both views.
#[derive(Clone, Debug)]
pub struct RenyiSystem {
    /// Full system on `[0, 1]` with `α1 ≡ 0`; the density vanishes on `(1-a, 1]`.
    pub system: EquippedSystem,
    /// `T x = x/(1-a) mod (1-a)` on `[0, 1-a]`.
    pub map: PiecewiseAffineMap,
    /// `[0, 1-a]`.
    pub support: Interval,
}

/// `a = (3-√5)/2`, density `(5+3√5)/10` on `[0, a)` and `(5+√5)/10` on
/// `[a, 1-a]`, normalized so that `μ([0, 1-a]) = 1-a`.
pub fn renyi_system() -> Result<RenyiSystem> {
    let level = Scalar::Exact(QuadSurd::new(rational(1, 2), rational(3, 10), 5)?);
    let zero = Scalar::int(0);
    let system = nonconstant_family(2, &level, &zero, &zero)?;
    let a = system.a().clone();
    let one_minus_a = system.one_minus_a();
    let slope = system.beta();
    let map = PiecewiseAffineMap::new(vec![
        AffineBranch {
            domain: Interval::half_open(zero.clone(), a.clone())?,
            slope: slope.clone(),
            offset: zero.clone(),
        },
        AffineBranch {
            domain: Interval::closed(a.clone(), one_minus_a.clone())?,
            slope: slope.clone(),
            offset: a.try_mul(&slope)?.neg(),
        },
    ])?;
    let support = Interval::closed(zero, one_minus_a)?;
    debug_assert_eq!(system.backend(), Backend::Exact(5));
    Ok(RenyiSystem {
        system,
        map,
        support,
    })
}
