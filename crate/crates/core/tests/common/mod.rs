//! Helpers shared by the integration tests: random systems and an
//! independent quadrature of the pushforward measure.
#![allow(dead_code)]

use rand::Rng;
use twovalued::{EquippedSystem, Scalar, StepFunction};

/// Random float step function with `pieces` pieces and values in `[lo, hi]`.
pub fn random_float_step<R: Rng>(rng: &mut R, pieces: usize, lo: f64, hi: f64) -> StepFunction {
    let mut cuts: Vec<f64> = (1..pieces).map(|_| rng.gen_range(0.001..0.999)).collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup_by(|x, y| (*x - *y).abs() < 1e-6);
    let mut breakpoints = vec![Scalar::float(0.0)];
    breakpoints.extend(cuts.into_iter().map(Scalar::float));
    breakpoints.push(Scalar::float(1.0));
    let values = (1..breakpoints.len())
        .map(|_| Scalar::float(rng.gen_range(lo..=hi)))
        .collect();
    StepFunction::new(breakpoints, values).unwrap()
}

/// Random exact step function on a grid of denominator `den`, values `k/den_v` with `k` in `0..=den_v * top`.
pub fn random_exact_step<R: Rng>(rng: &mut R, den: i64, value_den: i64, top: i64) -> StepFunction {
    let mut cuts: Vec<i64> = (0..rng.gen_range(0..6))
        .map(|_| rng.gen_range(1..den))
        .collect();
    cuts.sort_unstable();
    cuts.dedup();
    let mut breakpoints = vec![Scalar::int(0)];
    breakpoints.extend(cuts.into_iter().map(|c| Scalar::ratio(c, den)));
    breakpoints.push(Scalar::int(1));
    let values = (1..breakpoints.len())
        .map(|_| Scalar::ratio(rng.gen_range(0..=value_den * top), value_den))
        .collect();
    StepFunction::new(breakpoints, values).unwrap()
}

/// Random float system with `a` in `[0.06, 0.5]`, positive `p` and arbitrary `α1`.
pub fn random_float_system<R: Rng>(rng: &mut R) -> EquippedSystem {
    let a = rng.gen_range(0.06..=0.5);
    let (p_pieces, alpha_pieces) = (rng.gen_range(1..8), rng.gen_range(1..8));
    let p = random_float_step(rng, p_pieces, 0.1, 3.0);
    let alpha1 = random_float_step(rng, alpha_pieces, 0.0, 1.0);
    EquippedSystem::new(Scalar::float(a), p, alpha1).unwrap()
}

type Weight<'a> = &'a dyn Fn(f64) -> f64;

/// `∫ f` over `[lo, hi)` by midpoint evaluation on cells cut at `cuts`.
fn integrate_cells(f: &dyn Fn(f64) -> f64, lo: f64, hi: f64, cuts: &[f64]) -> f64 {
    if hi <= lo {
        return 0.0;
    }
    let mut points = vec![lo, hi];
    points.extend(cuts.iter().copied().filter(|&t| t > lo && t < hi));
    points.sort_by(f64::total_cmp);
    points
        .windows(2)
        .map(|w| f(0.5 * (w[0] + w[1])) * (w[1] - w[0]))
        .sum()
}

/// `μ_S([c, d))` computed directly from the preimages of each affine branch,
/// using only pointwise evaluation of `p` and `α1`.
pub fn oracle_measure(sys: &EquippedSystem, c: f64, d: f64) -> f64 {
    let a = sys.a().to_f64();
    let s = 1.0 - a;
    let p = sys.p().table();
    let alpha = sys.alpha1().table();
    let mut cuts: Vec<f64> = p.breakpoints().to_vec();
    cuts.extend_from_slice(alpha.breakpoints());
    cuts.extend_from_slice(&[a, s]);
    let w1 = |x: f64| alpha.eval(x) * p.eval(x);
    let w2 = |x: f64| (1.0 - alpha.eval(x)) * p.eval(x);
    // (weight, domain, offset): the branch is x ↦ (x - offset)/(1 - a)
    let branches: [(Weight, f64, f64, f64); 4] = [
        (&w1, 0.0, s, 0.0),
        (&w1, s, 1.0, a),
        (&w2, 0.0, a, 0.0),
        (&w2, a, 1.0, a),
    ];
    branches
        .iter()
        .map(|&(w, dlo, dhi, offset)| {
            let lo = (s * c + offset).max(dlo);
            let hi = (s * d + offset).min(dhi);
            integrate_cells(w, lo, hi, &cuts)
        })
        .sum()
}
