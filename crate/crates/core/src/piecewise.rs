//! Piecewise-constant functions on `[0, 1]`.
//!
//! Piece `i` is `[t_i, t_{i+1})`, the last piece is closed at 1. Values at
//! breakpoints are never stored: every identity checked here is an almost
//! everywhere identity.

use std::fmt::Write as _;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::numerics::{Backend, Interval, Scalar};

/// Float pieces narrower than this are rounding artifacts of merged grids and
/// are absorbed into their right neighbour.
pub const FLOAT_SLIVER: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct StepFunction {
    breakpoints: Vec<Scalar>,
    values: Vec<Scalar>,
    backend: Backend,
}

/// Outcome of an almost-everywhere comparison.
#[derive(Clone, Debug, Serialize)]
pub struct AeComparison {
    pub equal: bool,
    pub max_deviation: Scalar,
    /// Piece where the deviation is attained, if it is nonzero.
    pub worst_piece: Option<Interval>,
}

impl StepFunction {
    /// Validates and canonicalizes. Breakpoints must run strictly from 0 to 1
    /// and there must be one value per piece.
    pub fn new(breakpoints: Vec<Scalar>, values: Vec<Scalar>) -> Result<Self> {
        if breakpoints.len() < 2 || breakpoints.len() != values.len() + 1 {
            return Err(Error::InvalidStepFunction(format!(
                "{} breakpoints for {} values",
                breakpoints.len(),
                values.len()
            )));
        }
        let mut backend = breakpoints[0].backend();
        for s in breakpoints.iter().chain(values.iter()) {
            backend = backend.join(s.backend())?;
        }
        let first = &breakpoints[0];
        let last = &breakpoints[breakpoints.len() - 1];
        if !first.is_zero() || last.try_cmp(&first.one_like())?.is_ne() {
            return Err(Error::InvalidStepFunction(format!(
                "breakpoints must start at 0 and end at 1, got {first} .. {last}"
            )));
        }
        for w in breakpoints.windows(2) {
            if !w[0].try_lt(&w[1])? {
                return Err(Error::InvalidStepFunction(format!(
                    "breakpoints not increasing at {} >= {}",
                    w[0], w[1]
                )));
            }
        }
        Ok(Self::canonical(breakpoints, values, backend))
    }

    /// Merges equal neighbours and, on the float backend, absorbs slivers.
    fn canonical(breakpoints: Vec<Scalar>, values: Vec<Scalar>, backend: Backend) -> Self {
        let (breakpoints, values) = if backend == Backend::Float {
            drop_slivers(breakpoints, values)
        } else {
            (breakpoints, values)
        };
        let mut bps = Vec::with_capacity(breakpoints.len());
        let mut vals: Vec<Scalar> = Vec::with_capacity(values.len());
        bps.push(breakpoints[0].clone());
        for (i, v) in values.into_iter().enumerate() {
            if vals.last() == Some(&v) {
                *bps.last_mut().expect("nonempty") = breakpoints[i + 1].clone();
            } else {
                vals.push(v);
                bps.push(breakpoints[i + 1].clone());
            }
        }
        StepFunction {
            breakpoints: bps,
            values: vals,
            backend,
        }
    }

    /// Builds from consecutive `(right end, value)` segments starting at 0.
    fn from_segments(zero: &Scalar, segments: Vec<(Scalar, Scalar)>, backend: Backend) -> Self {
        let mut bps = vec![zero.clone()];
        let mut vals = Vec::with_capacity(segments.len());
        for (hi, v) in segments {
            bps.push(hi);
            vals.push(v);
        }
        Self::canonical(bps, vals, backend)
    }

    pub fn constant(c: Scalar) -> Self {
        let backend = c.backend();
        let bps = vec![c.zero_like(), c.one_like()];
        StepFunction {
            breakpoints: bps,
            values: vec![c],
            backend,
        }
    }

    pub fn zero(backend: Backend) -> Self {
        let zero = match backend {
            Backend::Float => Scalar::Float(0.0),
            Backend::Exact(_) => Scalar::int(0),
        };
        Self::constant(zero)
    }

    /// Indicator of `interval ∩ [0, 1]`.
    pub fn indicator(interval: &Interval) -> Result<Self> {
        let backend = interval.lo.backend().join(interval.hi.backend())?;
        let zero = interval.lo.zero_like();
        let one = interval.lo.one_like();
        let lo = interval.lo.try_max(&zero)?;
        let hi = interval.hi.try_min(&one)?;
        if hi.try_le(&lo)? {
            return Ok(Self::constant(zero));
        }
        let mut segments = Vec::new();
        if zero.try_lt(&lo)? {
            segments.push((lo, zero.clone()));
        }
        segments.push((hi.clone(), one.clone()));
        if hi.try_lt(&one)? {
            segments.push((one, zero.clone()));
        }
        Ok(Self::from_segments(&zero, segments, backend))
    }

    pub fn breakpoints(&self) -> &[Scalar] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[Scalar] {
        &self.values
    }

    pub fn backend(&self) -> Backend {
        self.backend
    }

    pub fn piece_count(&self) -> usize {
        self.values.len()
    }

    /// `(left, right, value)` for every piece.
    pub fn pieces(&self) -> impl Iterator<Item = (&Scalar, &Scalar, &Scalar)> {
        self.values
            .iter()
            .enumerate()
            .map(move |(i, v)| (&self.breakpoints[i], &self.breakpoints[i + 1], v))
    }

    fn zero_scalar(&self) -> Scalar {
        self.breakpoints[0].clone()
    }

    fn one_scalar(&self) -> Scalar {
        self.breakpoints[self.breakpoints.len() - 1].clone()
    }

    /// Value at `x ∈ [0, 1]` (left-closed pieces, last piece closed at 1).
    pub fn eval(&self, x: &Scalar) -> Result<Scalar> {
        if x.try_lt(&self.zero_scalar())? || self.one_scalar().try_lt(x)? {
            return Err(Error::OutOfDomain(format!("{x} is outside [0, 1]")));
        }
        let mut idx = 0;
        for (i, t) in self.breakpoints[1..self.breakpoints.len() - 1]
            .iter()
            .enumerate()
        {
            if t.try_le(x)? {
                idx = i + 1;
            } else {
                break;
            }
        }
        Ok(self.values[idx].clone())
    }

    /// Pointwise `op(f, g)` on the merged breakpoint grid.
    pub fn combine<F>(&self, other: &StepFunction, mut op: F) -> Result<StepFunction>
    where
        F: FnMut(&Scalar, &Scalar) -> Result<Scalar>,
    {
        let backend = self.backend.join(other.backend)?;
        let (mut i, mut j) = (0, 0);
        let mut segments = Vec::with_capacity(self.values.len() + other.values.len());
        while i < self.values.len() && j < other.values.len() {
            let value = op(&self.values[i], &other.values[j])?;
            let a = &self.breakpoints[i + 1];
            let b = &other.breakpoints[j + 1];
            match a.try_cmp(b)? {
                std::cmp::Ordering::Less => {
                    segments.push((a.clone(), value));
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    segments.push((b.clone(), value));
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    segments.push((a.clone(), value));
                    i += 1;
                    j += 1;
                }
            }
        }
        // float grids may end a hair apart; the tail belongs to the last piece
        if let Some(last) = segments.last_mut() {
            last.0 = self.one_scalar();
        }
        Ok(Self::from_segments(&self.zero_scalar(), segments, backend))
    }

    /// Applies `op` to every value.
    pub fn map_values<F>(&self, mut op: F) -> Result<StepFunction>
    where
        F: FnMut(&Scalar) -> Result<Scalar>,
    {
        let mut backend = self.backend;
        let mut values = Vec::with_capacity(self.values.len());
        for v in &self.values {
            let w = op(v)?;
            backend = backend.join(w.backend())?;
            values.push(w);
        }
        Ok(Self::canonical(self.breakpoints.clone(), values, backend))
    }

    pub fn add(&self, other: &StepFunction) -> Result<StepFunction> {
        self.combine(other, |x, y| x.try_add(y))
    }

    pub fn sub(&self, other: &StepFunction) -> Result<StepFunction> {
        self.combine(other, |x, y| x.try_sub(y))
    }

    pub fn multiply(&self, other: &StepFunction) -> Result<StepFunction> {
        self.combine(other, |x, y| x.try_mul(y))
    }

    pub fn scale(&self, c: &Scalar) -> Result<StepFunction> {
        self.map_values(|v| v.try_mul(c))
    }

    /// `x ↦ f(c·x + b)` on `[0, 1]`, zero where `c·x + b` leaves `[0, 1]`.
    pub fn affine_pullback(&self, c: &Scalar, b: &Scalar) -> Result<StepFunction> {
        if c.signum() <= 0 {
            return Err(Error::NonpositiveSlope);
        }
        let backend = self.backend.join(c.backend())?.join(b.backend())?;
        let zero = self.zero_scalar();
        let one = self.one_scalar();
        let preimage = |t: &Scalar| t.try_sub(b)?.try_div(c);

        let pre: Vec<Scalar> = self
            .breakpoints
            .iter()
            .map(preimage)
            .collect::<Result<_>>()?;
        let mut segments: Vec<(Scalar, Scalar)> = Vec::new();
        let mut cursor = zero.clone();
        let mut push =
            |hi: Scalar, v: Scalar, segments: &mut Vec<(Scalar, Scalar)>| -> Result<()> {
                if cursor.try_lt(&hi)? {
                    cursor = hi.clone();
                    segments.push((hi, v));
                }
                Ok(())
            };
        push(pre[0].try_min(&one)?, zero.clone(), &mut segments)?;
        for (i, v) in self.values.iter().enumerate() {
            let hi = pre[i + 1].try_min(&one)?;
            push(hi, v.clone(), &mut segments)?;
        }
        push(one.clone(), zero.clone(), &mut segments)?;
        Ok(Self::from_segments(&zero, segments, backend))
    }

    /// `f · χ_I`.
    pub fn restrict(&self, interval: &Interval) -> Result<StepFunction> {
        let mask = Self::indicator(interval)?;
        self.combine(&mask, |v, m| {
            Ok(if m.is_zero() {
                v.zero_like()
            } else {
                v.clone()
            })
        })
    }

    /// `∫_I f dλ`, exact on the exact backend.
    pub fn integrate(&self, interval: &Interval) -> Result<Scalar> {
        let mut total = self.zero_scalar().to_backend(self.backend)?;
        for (lo, hi, v) in self.pieces() {
            let l = lo.try_max(&interval.lo)?;
            let h = hi.try_min(&interval.hi)?;
            if l.try_lt(&h)? {
                total = total.try_add(&v.try_mul(&h.try_sub(&l)?)?)?;
            }
        }
        Ok(total)
    }

    pub fn total_mass(&self) -> Result<Scalar> {
        self.integrate(&Interval::unit(self.backend))
    }

    /// Largest `|value|` and the piece attaining it.
    pub fn max_abs(&self) -> Result<(Scalar, Interval)> {
        let mut best = 0;
        let mut best_value = self.values[0].abs();
        for (i, v) in self.values.iter().enumerate().skip(1) {
            let a = v.abs();
            if best_value.try_lt(&a)? {
                best = i;
                best_value = a;
            }
        }
        let piece = Interval {
            lo: self.breakpoints[best].clone(),
            hi: self.breakpoints[best + 1].clone(),
            closed_right: best + 1 == self.values.len(),
        };
        Ok((best_value, piece))
    }

    /// Identically zero almost everywhere (exactly, with no tolerance).
    pub fn is_zero_ae(&self) -> bool {
        self.values.iter().all(Scalar::is_zero)
    }

    /// `|f - g| <= tol` on every piece; `tol` is ignored on the exact backend.
    pub fn compare_ae(&self, other: &StepFunction, tol: f64) -> Result<AeComparison> {
        let diff = self.sub(other)?;
        let (dev, piece) = diff.max_abs()?;
        let equal = if diff.backend.is_exact() {
            dev.is_zero()
        } else {
            dev.to_f64() <= tol
        };
        let worst_piece = (!dev.is_zero()).then_some(piece);
        Ok(AeComparison {
            equal,
            max_deviation: dev,
            worst_piece,
        })
    }

    pub fn is_nonnegative(&self) -> bool {
        self.values.iter().all(|v| v.signum() >= 0)
    }

    /// Values in `[0, 1]`.
    pub fn is_weight(&self) -> Result<bool> {
        for v in &self.values {
            if v.signum() < 0 || v.one_like().try_lt(v)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn to_backend(&self, backend: Backend) -> Result<StepFunction> {
        let bps = self
            .breakpoints
            .iter()
            .map(|s| s.to_backend(backend))
            .collect::<Result<Vec<_>>>()?;
        let vals = self
            .values
            .iter()
            .map(|s| s.to_backend(backend))
            .collect::<Result<Vec<_>>>()?;
        StepFunction::new(bps, vals)
    }

    pub fn to_float(&self) -> StepFunction {
        self.to_backend(Backend::Float)
            .expect("conversion to float cannot fail")
    }

    /// Double-precision view for fast pointwise evaluation.
    pub fn table(&self) -> StepTable {
        StepTable {
            breakpoints: self.breakpoints.iter().map(Scalar::to_f64).collect(),
            values: self.values.iter().map(Scalar::to_f64).collect(),
        }
    }

    /// `x_left,x_right,value` rows with 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x_left,x_right,value\n");
        for (lo, hi, v) in self.pieces() {
            let _ = writeln!(
                out,
                "{:.16e},{:.16e},{:.16e}",
                lo.to_f64(),
                hi.to_f64(),
                v.to_f64()
            );
        }
        out
    }
}

fn drop_slivers(breakpoints: Vec<Scalar>, values: Vec<Scalar>) -> (Vec<Scalar>, Vec<Scalar>) {
    let n = values.len();
    let mut bps = vec![breakpoints[0].clone()];
    let mut vals = Vec::with_capacity(n);
    for i in 0..n {
        let width = breakpoints[i + 1].to_f64() - bps.last().expect("nonempty").to_f64();
        if width < FLOAT_SLIVER {
            continue;
        }
        vals.push(values[i].clone());
        bps.push(breakpoints[i + 1].clone());
    }
    if vals.is_empty() {
        return (
            vec![breakpoints[0].clone(), breakpoints[n].clone()],
            vec![values[n - 1].clone()],
        );
    }
    *bps.last_mut().expect("nonempty") = breakpoints[n].clone();
    (bps, vals)
}

/// `f64` copy of a step function.
#[derive(Clone, Debug)]
pub struct StepTable {
    breakpoints: Vec<f64>,
    values: Vec<f64>,
}

impl StepTable {
    pub fn eval(&self, x: f64) -> f64 {
        let i = self.breakpoints[1..self.breakpoints.len() - 1].partition_point(|&t| t <= x);
        self.values[i]
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

#[derive(Serialize, Deserialize)]
struct StepFunctionRepr {
    breakpoints: Vec<String>,
    values: Vec<String>,
    backend: String,
}

impl Serialize for StepFunction {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        StepFunctionRepr {
            breakpoints: self.breakpoints.iter().map(ToString::to_string).collect(),
            values: self.values.iter().map(ToString::to_string).collect(),
            backend: self.backend.to_string(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for StepFunction {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let repr = StepFunctionRepr::deserialize(deserializer)?;
        let backend: Backend = repr.backend.parse().map_err(D::Error::custom)?;
        let parse = |items: &[String]| -> Result<Vec<Scalar>> {
            items
                .iter()
                .map(|s| Scalar::parse_for(s, backend))
                .collect()
        };
        let bps = parse(&repr.breakpoints).map_err(D::Error::custom)?;
        let vals = parse(&repr.values).map_err(D::Error::custom)?;
        StepFunction::new(bps, vals).map_err(D::Error::custom)
    }
}
