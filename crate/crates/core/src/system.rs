//! The equipped 2-valued transformation `S = S1 ∪ S2` on `[0, 1]`.
//!
//! Both branches have slope `1/(1-a)`. `S1` switches to its second affine
//! piece at `1-a`, `S2` at `a`, so the branches differ only on the overlap
//! `[a, 1-a)`. The equipment `α1` is the probability of taking `S1`; the
//! complementary weight `α2 = 1 - α1` is never stored.

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::numerics::{Backend, Interval, Scalar};
use crate::piecewise::{StepFunction, StepTable};

/// Which branch of `S` to follow.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Branch {
    Branch1,
    Branch2,
}

/// The unique `n >= 2` with `1/(n+1) < a <= 1/n`.
pub fn derive_n(a: &Scalar) -> Result<u32> {
    let zero = a.zero_like();
    let half = match a {
        Scalar::Exact(_) => Scalar::ratio(1, 2),
        Scalar::Float(_) => Scalar::float(0.5),
    };
    if a.try_le(&zero)? || half.try_lt(a)? {
        return Err(Error::OutOfRange(format!("a = {a} must lie in (0, 1/2]")));
    }
    let inv = a.one_like().try_div(a)?;
    let n = inv.floor();
    u32::try_from(n).map_err(|_| Error::OutOfRange(format!("a = {a} is too small")))
}

/// `(a, p, α1)` with the derived `n`.
#[derive(Clone, Debug, PartialEq)]
pub struct EquippedSystem {
    a: Scalar,
    p: StepFunction,
    alpha1: StepFunction,
    n: u32,
}

impl EquippedSystem {
    /// Checks `0 < a <= 1/2`, `p >= 0`, `0 <= α1 <= 1` and backend compatibility.
    pub fn new(a: Scalar, p: StepFunction, alpha1: StepFunction) -> Result<Self> {
        a.backend().join(p.backend())?.join(alpha1.backend())?;
        let n = derive_n(&a)?;
        if !p.is_nonnegative() {
            return Err(Error::OutOfRange("density must be nonnegative".into()));
        }
        if !alpha1.is_weight()? {
            return Err(Error::OutOfRange("weights must lie in [0, 1]".into()));
        }
        Ok(EquippedSystem { a, p, alpha1, n })
    }

    pub fn a(&self) -> &Scalar {
        &self.a
    }

    pub fn p(&self) -> &StepFunction {
        &self.p
    }

    pub fn alpha1(&self) -> &StepFunction {
        &self.alpha1
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn backend(&self) -> Backend {
        self.a
            .backend()
            .join(self.p.backend())
            .and_then(|b| b.join(self.alpha1.backend()))
            .expect("checked at construction")
    }

    pub fn one_minus_a(&self) -> Scalar {
        self.a.one_like().try_sub(&self.a).expect("same backend")
    }

    /// The expansion base `1/(1-a)`.
    pub fn beta(&self) -> Scalar {
        self.a
            .one_like()
            .try_div(&self.one_minus_a())
            .expect("a <= 1/2")
    }

    /// `A1 = α1 p`.
    pub fn a1(&self) -> Result<StepFunction> {
        self.alpha1.multiply(&self.p)
    }

    /// `A2 = p - A1`, so that `A1 + A2 = p` holds by construction.
    pub fn a2(&self) -> Result<StepFunction> {
        self.p.sub(&self.a1()?)
    }

    /// The overlap `[a, 1-a)` where the branches differ.
    pub fn overlap(&self) -> Interval {
        Interval {
            lo: self.a.clone(),
            hi: self.one_minus_a(),
            closed_right: false,
        }
    }

    pub fn with_density(&self, p: StepFunction) -> Result<Self> {
        Self::new(self.a.clone(), p, self.alpha1.clone())
    }

    pub fn with_alpha1(&self, alpha1: StepFunction) -> Result<Self> {
        Self::new(self.a.clone(), self.p.clone(), alpha1)
    }

    pub fn to_float(&self) -> EquippedSystem {
        EquippedSystem {
            a: self.a.to_float(),
            p: self.p.to_float(),
            alpha1: self.alpha1.to_float(),
            n: self.n,
        }
    }

    /// `S_b(x)`.
    pub fn apply_branch(&self, x: &Scalar, branch: Branch) -> Result<Scalar> {
        let zero = self.a.zero_like();
        if x.try_lt(&zero)? || x.one_like().try_lt(x)? {
            return Err(Error::OutOfDomain(format!("{x} is outside [0, 1]")));
        }
        let switch = match branch {
            Branch::Branch1 => self.one_minus_a(),
            Branch::Branch2 => self.a.clone(),
        };
        let shifted = if x.try_lt(&switch)? {
            x.clone()
        } else {
            x.try_sub(&self.a)?
        };
        shifted.try_div(&self.one_minus_a())
    }

    /// `S_b` as a piecewise-affine map.
    pub fn branch_map(&self, branch: Branch) -> Result<PiecewiseAffineMap> {
        let zero = self.a.zero_like();
        let one = self.a.one_like();
        let beta = self.beta();
        let switch = match branch {
            Branch::Branch1 => self.one_minus_a(),
            Branch::Branch2 => self.a.clone(),
        };
        PiecewiseAffineMap::new(vec![
            AffineBranch {
                domain: Interval::half_open(zero.clone(), switch.clone())?,
                slope: beta.clone(),
                offset: zero,
            },
            AffineBranch {
                domain: Interval::closed(switch, one)?,
                slope: beta.clone(),
                offset: self.a.try_mul(&beta)?.neg(),
            },
        ])
    }

    /// Density of the pushforward measure `μ_S`:
    ///
    /// `q(x) = (1-a)[A1((1-a)x) + χ_C1(x) A1((1-a)x+a) + χ_C2(x) A2((1-a)x) + A2((1-a)x+a)]`
    ///
    /// with `C1 = [(1-2a)/(1-a), 1]` and `C2 = [0, a/(1-a))`.
    pub fn pushforward_density(&self) -> Result<StepFunction> {
        let one_minus_a = self.one_minus_a();
        let zero = self.a.zero_like();
        let one = self.a.one_like();
        let a1 = self.a1()?;
        let a2 = self.a2()?;
        let c1 = Interval::closed(
            one_minus_a.try_sub(&self.a)?.try_div(&one_minus_a)?,
            one.clone(),
        )?;
        let c2 = Interval::half_open(zero.clone(), self.a.try_div(&one_minus_a)?)?;

        let low_a1 = a1.affine_pullback(&one_minus_a, &zero)?;
        let high_a1 = a1.affine_pullback(&one_minus_a, &self.a)?.restrict(&c1)?;
        let low_a2 = a2.affine_pullback(&one_minus_a, &zero)?.restrict(&c2)?;
        let high_a2 = a2.affine_pullback(&one_minus_a, &self.a)?;
        low_a1
            .add(&high_a1)?
            .add(&low_a2)?
            .add(&high_a2)?
            .scale(&one_minus_a)
    }

    pub fn kernel(&self) -> MarkovKernel {
        MarkovKernel {
            a: self.a.to_f64(),
            one_minus_a: self.one_minus_a().to_f64(),
            alpha1: self.alpha1.table(),
        }
    }

    /// One step of the induced Markov chain: `S1(x)` if `u < α1(x)`, else `S2(x)`.
    /// Builds a float kernel on every call; use [`Self::kernel`] in loops.
    pub fn markov_step(&self, x: f64, u: f64) -> Result<f64> {
        self.kernel().step(x, u)
    }
}

/// Float-only transition kernel of an equipped system.
#[derive(Clone, Debug)]
pub struct MarkovKernel {
    a: f64,
    one_minus_a: f64,
    alpha1: StepTable,
}

impl MarkovKernel {
    pub fn step(&self, x: f64, u: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&x) {
            return Err(Error::OutOfDomain(format!("{x} is outside [0, 1]")));
        }
        let take_low = if x < self.a {
            true
        } else if x >= self.one_minus_a {
            false
        } else {
            u < self.alpha1.eval(x)
        };
        let y = if take_low {
            x / self.one_minus_a
        } else {
            (x - self.a) / self.one_minus_a
        };
        Ok(y.clamp(0.0, 1.0))
    }
}

/// `x ↦ slope·x + offset` on `domain`.
#[derive(Clone, Debug, PartialEq)]
pub struct AffineBranch {
    pub domain: Interval,
    pub slope: Scalar,
    pub offset: Scalar,
}

/// A single-valued map of `[0, 1]` made of increasing affine branches with
/// disjoint domains.
#[derive(Clone, Debug, PartialEq)]
pub struct PiecewiseAffineMap {
    branches: Vec<AffineBranch>,
}

impl PiecewiseAffineMap {
    pub fn new(branches: Vec<AffineBranch>) -> Result<Self> {
        for b in &branches {
            if b.slope.signum() <= 0 {
                return Err(Error::NonpositiveSlope);
            }
        }
        Ok(PiecewiseAffineMap { branches })
    }

    pub fn branches(&self) -> &[AffineBranch] {
        &self.branches
    }

    pub fn apply(&self, x: &Scalar) -> Result<Scalar> {
        for b in &self.branches {
            let inside = b.domain.lo.try_le(x)?
                && if b.domain.closed_right {
                    x.try_le(&b.domain.hi)?
                } else {
                    x.try_lt(&b.domain.hi)?
                };
            if inside {
                return b.slope.try_mul(x)?.try_add(&b.offset);
            }
        }
        Err(Error::OutOfDomain(format!(
            "{x} is not in any branch domain"
        )))
    }

    /// Perron–Frobenius operator: `(Pf)(y) = Σ_b f(g_b⁻¹(y)) / slope_b` over
    /// branches whose domain contains the preimage.
    pub fn transfer(&self, f: &StepFunction) -> Result<StepFunction> {
        let mut total = StepFunction::zero(f.backend());
        for b in &self.branches {
            let inv_slope = b.slope.one_like().try_div(&b.slope)?;
            let shift = b.offset.try_mul(&inv_slope)?.neg();
            let term = f
                .restrict(&b.domain)?
                .affine_pullback(&inv_slope, &shift)?
                .scale(&inv_slope)?;
            total = total.add(&term)?;
        }
        Ok(total)
    }
}

#[derive(Serialize, Deserialize)]
struct SystemRepr {
    a: Scalar,
    p: StepFunction,
    alpha1: StepFunction,
}

impl Serialize for EquippedSystem {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        SystemRepr {
            a: self.a.clone(),
            p: self.p.clone(),
            alpha1: self.alpha1.clone(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for EquippedSystem {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let repr = SystemRepr::deserialize(deserializer)?;
        let a = if repr.p.backend() == Backend::Float {
            repr.a.to_float()
        } else {
            repr.a
        };
        EquippedSystem::new(a, repr.p, repr.alpha1).map_err(D::Error::custom)
    }
}
