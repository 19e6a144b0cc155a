//! Invariance criterion for an equipped system.
//!
//! Two equivalent views are computed independently:
//!
//! * the functional equation on `[0, 1]`: the pushforward density equals `p`
//!   almost everywhere ([`lemma_residual`]);
//! * three conditions on shifted copies of `p` ([`check_theorem_conditions`]):
//!   two constraints on `p` alone, over `[a, 1-(n-1)a)` and `[1-(n-1)a, 2a)`,
//!   and one formula prescribing `A1 = α1 p` on the overlap `[a, 1-a)`.
//!
//! Off the overlap `α1` is unconstrained.

use std::ops::RangeInclusive;

use serde::Serialize;

use crate::error::{Error, Result, Violation};
use crate::numerics::{Interval, Scalar};
use crate::piecewise::StepFunction;
use crate::system::{derive_n, EquippedSystem};

/// One condition evaluated as a step-function identity over its domain.
#[derive(Clone, Debug, Serialize)]
pub struct ConditionCheck {
    pub ok: bool,
    /// The domain is Lebesgue-null, so the condition holds trivially.
    pub vacuous: bool,
    pub domain: Interval,
    pub max_deviation: Scalar,
    /// Piece where the deviation is attained, when nonzero.
    pub worst_interval: Option<Interval>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConditionReport {
    pub n: u32,
    pub lemma_residual: StepFunction,
    pub lemma_ok: bool,
    pub lemma_max_deviation: Scalar,
    pub eq3: ConditionCheck,
    pub eq4: ConditionCheck,
    pub eq5: ConditionCheck,
    /// Some equipment in `[0, 1]` makes `p` invariant for this `a`.
    pub feasible: bool,
}

impl ConditionReport {
    pub fn conditions_hold(&self) -> bool {
        self.eq3.ok && self.eq4.ok && self.eq5.ok
    }
}

/// Pushforward density minus `p`; zero almost everywhere iff `μ_S = μ`.
pub fn lemma_residual(sys: &EquippedSystem) -> Result<StepFunction> {
    sys.pushforward_density()?.sub(sys.p())
}

/// `Σ_{k ∈ ks} p(x + (k + shift) a)`.
fn shifted_sum(
    p: &StepFunction,
    a: &Scalar,
    ks: RangeInclusive<i64>,
    shift: i64,
) -> Result<StepFunction> {
    let one = a.one_like();
    let mut total = StepFunction::zero(p.backend().join(a.backend())?);
    for k in ks {
        let b = a.try_mul(&a.int_like(k + shift))?;
        total = total.add(&p.affine_pullback(&one, &b)?)?;
    }
    Ok(total)
}

/// `(1/(1-a)) Σ_{k ∈ ks} p((x + (k + shift) a) / (1-a))`.
fn compressed_sum(
    p: &StepFunction,
    a: &Scalar,
    ks: RangeInclusive<i64>,
    shift: i64,
) -> Result<StepFunction> {
    let beta = a.one_like().try_div(&a.one_like().try_sub(a)?)?;
    let mut total = StepFunction::zero(p.backend().join(a.backend())?);
    for k in ks {
        let b = a.try_mul(&a.int_like(k + shift))?.try_mul(&beta)?;
        total = total.add(&p.affine_pullback(&beta, &b)?)?;
    }
    total.scale(&beta)
}

fn check_on(residual: &StepFunction, domain: Interval, tol: f64) -> Result<ConditionCheck> {
    if domain.is_null()? {
        return Ok(ConditionCheck {
            ok: true,
            vacuous: true,
            max_deviation: domain.lo.zero_like(),
            domain,
            worst_interval: None,
        });
    }
    let (dev, piece) = residual.restrict(&domain)?.max_abs()?;
    let ok = if dev.is_exact() {
        dev.is_zero()
    } else {
        dev.to_f64() <= tol
    };
    let worst_interval = (!dev.is_zero()).then_some(piece);
    Ok(ConditionCheck {
        ok,
        vacuous: false,
        domain,
        max_deviation: dev,
        worst_interval,
    })
}

fn scaled(a: &Scalar, k: i64) -> Result<Scalar> {
    a.try_mul(&a.int_like(k))
}

/// `[a, 1-(n-1)a)`.
pub fn eq3_domain(a: &Scalar, n: u32) -> Result<Interval> {
    let hi = a.one_like().try_sub(&scaled(a, n as i64 - 1)?)?;
    Interval::half_open(a.clone(), hi)
}

/// `[1-(n-1)a, 2a)`.
pub fn eq4_domain(a: &Scalar, n: u32) -> Result<Interval> {
    let lo = a.one_like().try_sub(&scaled(a, n as i64 - 1)?)?;
    Interval::half_open(lo, scaled(a, 2)?)
}

/// Where the `m`-th instance of the `A1` formula lives: `[(m+1)a, (m+2)a)`,
/// except `[(n-1)a, 1-a)` for the last one.
pub fn eq5_domain(a: &Scalar, n: u32, m: u32) -> Result<Interval> {
    let lo = scaled(a, m as i64 + 1)?;
    let hi = if m + 2 == n {
        a.one_like().try_sub(a)?
    } else {
        scaled(a, m as i64 + 2)?
    };
    Interval::half_open(lo, hi)
}

/// Residual of the first `p`-only constraint in the variable `x0`.
fn eq3_residual(p: &StepFunction, a: &Scalar, n: u32) -> Result<StepFunction> {
    let n = n as i64;
    shifted_sum(p, a, -1..=n - 1, 0)?.sub(&compressed_sum(p, a, -1..=n - 2, 0)?)
}

/// Residual of the second `p`-only constraint in the variable `x1`.
fn eq4_residual(p: &StepFunction, a: &Scalar, n: u32) -> Result<StepFunction> {
    let n = n as i64;
    shifted_sum(p, a, -1..=n - 2, 0)?.sub(&compressed_sum(p, a, -1..=n - 3, 0)?)
}

/// The `A1` prescribed on the overlap by `p` and `a`, zero elsewhere.
///
/// In the variable `y = x + m a`:
/// `A1(y) = Σ_{k=-1}^{m} p(y + (k-m)a) - (1/(1-a)) Σ_{k=-1}^{m-1} p((y + (k-m)a)/(1-a))`.
pub fn prescribed_a1(p: &StepFunction, a: &Scalar) -> Result<StepFunction> {
    let n = derive_n(a)?;
    let mut total = StepFunction::zero(p.backend().join(a.backend())?);
    for m in 0..=(n - 2) {
        let domain = eq5_domain(a, n, m)?;
        if domain.is_null()? {
            continue;
        }
        let m = m as i64;
        let rhs = shifted_sum(p, a, -1..=m, -m)?.sub(&compressed_sum(p, a, -1..=m - 1, -m)?)?;
        total = total.add(&rhs.restrict(&domain)?)?;
    }
    Ok(total)
}

fn overlap(a: &Scalar) -> Result<Interval> {
    Interval::half_open(a.clone(), a.one_like().try_sub(a)?)
}

/// Evaluates every condition on `sys`; `tol` applies to the float backend only.
pub fn check_theorem_conditions(sys: &EquippedSystem, tol: f64) -> Result<ConditionReport> {
    let a = sys.a();
    let n = sys.n();
    let p = sys.p();

    let eq3 = check_on(&eq3_residual(p, a, n)?, eq3_domain(a, n)?, tol)?;
    let eq4 = check_on(&eq4_residual(p, a, n)?, eq4_domain(a, n)?, tol)?;
    let prescribed = prescribed_a1(p, a)?;
    let eq5 = check_on(&sys.a1()?.sub(&prescribed)?, overlap(a)?, tol)?;

    let residual = lemma_residual(sys)?;
    let (lemma_dev, _) = residual.max_abs()?;
    let lemma_ok = if lemma_dev.is_exact() {
        lemma_dev.is_zero()
    } else {
        lemma_dev.to_f64() <= tol
    };
    let feasible =
        eq3.ok && eq4.ok && range_deviation(p, &prescribed, a)?.to_f64() <= tolerance_for(a, tol);

    Ok(ConditionReport {
        n,
        lemma_residual: residual,
        lemma_ok,
        lemma_max_deviation: lemma_dev,
        eq3,
        eq4,
        eq5,
        feasible,
    })
}

fn tolerance_for(a: &Scalar, tol: f64) -> f64 {
    if a.is_exact() {
        0.0
    } else {
        tol
    }
}

/// How far `A1` leaves `[0, p]` on the overlap (zero when it stays inside).
fn range_deviation(p: &StepFunction, prescribed: &StepFunction, a: &Scalar) -> Result<Scalar> {
    let excess = prescribed.combine(p, |a1, pv| {
        let below = a1.neg();
        let above = a1.try_sub(pv)?;
        below.try_max(&above)?.try_max(&a1.zero_like())
    })?;
    Ok(excess.restrict(&overlap(a)?)?.max_abs()?.0)
}

/// Reconstructs an invariant equipment for density `p` and parameter `a`.
///
/// `α1 = A1 / p` on the overlap where `p > 0`; `fill` on the free intervals
/// `[0, a)`, `[1-a, 1]` and wherever `p` vanishes, since only `A1` enters the
/// criterion there.
pub fn solve_equipment(
    p: &StepFunction,
    a: &Scalar,
    fill: &Scalar,
    tol: f64,
) -> Result<EquippedSystem> {
    let n = derive_n(a)?;
    if fill.signum() < 0 || fill.one_like().try_lt(fill)? {
        return Err(Error::OutOfRange(format!("fill {fill} must lie in [0, 1]")));
    }
    let tol = tolerance_for(a, tol);

    // eq4 first: its domain is never empty, so it is the informative failure
    let eq4 = check_on(&eq4_residual(p, a, n)?, eq4_domain(a, n)?, tol)?;
    if !eq4.ok {
        return Err(Error::Infeasible {
            which: Violation::Eq4,
            deviation: eq4.max_deviation.to_f64(),
        });
    }
    let eq3 = check_on(&eq3_residual(p, a, n)?, eq3_domain(a, n)?, tol)?;
    if !eq3.ok {
        return Err(Error::Infeasible {
            which: Violation::Eq3,
            deviation: eq3.max_deviation.to_f64(),
        });
    }
    let prescribed = prescribed_a1(p, a)?;
    let range_dev = range_deviation(p, &prescribed, a)?;
    if range_dev.to_f64() > tol || (a.is_exact() && !range_dev.is_zero()) {
        return Err(Error::Infeasible {
            which: Violation::Range,
            deviation: range_dev.to_f64(),
        });
    }

    let fill = fill.to_backend(p.backend().join(a.backend())?)?;
    let zero = fill.zero_like();
    let one = fill.one_like();
    let on_overlap = prescribed.combine(p, |a1, pv| {
        if pv.is_zero() {
            return Ok(fill.clone());
        }
        a1.try_div(pv)?.try_max(&zero)?.try_min(&one)
    })?;
    let mask = StepFunction::indicator(&overlap(a)?)?;
    let alpha1 = on_overlap.combine(&mask, |v, m| {
        Ok(if m.is_zero() { fill.clone() } else { v.clone() })
    })?;
    EquippedSystem::new(a.clone(), p.clone(), alpha1)
}
