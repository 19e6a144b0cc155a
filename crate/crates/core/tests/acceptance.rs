//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on failure.

mod common;

use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use twovalued::criterion::{check_theorem_conditions, lemma_residual};
use twovalued::expansion::{
    enumerate_expansions, evaluate_expansion, greedy_expansion, orbit_expansion_for_base,
    orbit_value, ChoicePolicy,
};
use twovalued::families::{lebesgue_family, nonconstant_family, renyi_system, total_mass};
use twovalued::simulate::one_step_stationarity_test;
use twovalued::{EquippedSystem, Interval, Scalar, StepFunction};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn r(p: i64, q: i64) -> Scalar {
    Scalar::ratio(p, q)
}

fn s(text: &str) -> Scalar {
    text.parse().unwrap()
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(limit: Duration, started: Instant) -> Result<(), String> {
    let took = started.elapsed();
    ensure(took < limit, || format!("took {took:.2?}, limit {limit:?}"))
}

fn exact_families() -> Outcome {
    let started = Instant::now();
    let mut count = 0;
    for n in 2..=12u32 {
        for (b, g) in [(1, 0), (0, 1), (1, 2), (3, 5)] {
            let sys =
                nonconstant_family(n, &r(b, 1), &r(g, 1), &r(1, 2)).map_err(|e| e.to_string())?;
            let residual = lemma_residual(&sys).map_err(|e| e.to_string())?;
            ensure(sys.backend().is_exact(), || format!("n={n}: not exact"))?;
            ensure(
                residual.piece_count() == 1 && residual.values()[0].is_zero(),
                || format!("n={n}, levels ({b},{g}): residual {residual:?}"),
            )?;
            count += 1;
        }
    }
    within(Duration::from_secs(5), started)?;
    Ok(format!(
        "{count} systems, residual identically 0, {:.2?}",
        started.elapsed()
    ))
}

fn lebesgue_criterion() -> Outcome {
    for n in 2..=12u32 {
        let sys = lebesgue_family(n, &r(1, 3)).map_err(|e| e.to_string())?;
        let q = sys.pushforward_density().map_err(|e| e.to_string())?;
        ensure(q == StepFunction::constant(r(1, 1)), || {
            format!("n={n}: pushforward {q:?}")
        })?;
    }
    let mut worst = Vec::new();
    for a in [r(9, 20), s("3/10").try_add(&r(1, 1000)).unwrap()] {
        let sys = EquippedSystem::new(
            a.clone(),
            StepFunction::constant(r(1, 1)),
            StepFunction::constant(r(1, 2)),
        )
        .map_err(|e| e.to_string())?;
        let report = check_theorem_conditions(&sys, 0.0).map_err(|e| e.to_string())?;
        let dev = report
            .eq3
            .max_deviation
            .to_f64()
            .max(report.eq4.max_deviation.to_f64());
        ensure(!report.conditions_hold() && !report.feasible, || {
            format!("a={a}: conditions hold")
        })?;
        ensure(dev > 1e-3, || format!("a={a}: deviation {dev}"))?;
        worst.push(format!("a={a}: {dev:.4}"));
    }
    Ok(format!(
        "pushforward = 1 for n=2..12; failing deviations {}",
        worst.join(", ")
    ))
}

fn dyadic_arbitrariness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for i in 0..10 {
        let alpha1 = common::random_exact_step(&mut rng, 16, 7, 1);
        let sys = EquippedSystem::new(r(1, 2), StepFunction::constant(r(1, 1)), alpha1)
            .map_err(|e| e.to_string())?;
        let residual = lemma_residual(&sys).map_err(|e| e.to_string())?;
        ensure(residual.is_zero_ae(), || {
            format!("equipment {i}: residual {residual:?}")
        })?;
    }
    Ok("10 random equipments, residual identically 0".into())
}

fn perturbed<R: Rng>(rng: &mut R, sys: &EquippedSystem) -> EquippedSystem {
    let lo = rng.gen_range(0.0..0.9);
    let hi = lo + rng.gen_range(0.02..0.1);
    let bump = StepFunction::indicator(
        &Interval::half_open(Scalar::float(lo), Scalar::float(hi)).unwrap(),
    )
    .unwrap()
    .scale(&Scalar::float(rng.gen_range(0.01..0.5)))
    .unwrap();
    sys.with_density(sys.p().add(&bump).unwrap()).unwrap()
}

fn lemma_theorem_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (mut passing, mut failing, mut discordant) = (0, 0, Vec::new());
    for i in 0..200 {
        let sys = match i % 5 {
            0 | 1 => common::random_float_system(&mut rng),
            2 => {
                let n = rng.gen_range(2..=12);
                let levels = (rng.gen_range(0.0..3.0), rng.gen_range(0.1..3.0));
                nonconstant_family(
                    n,
                    &Scalar::float(levels.0),
                    &Scalar::float(levels.1),
                    &Scalar::float(rng.gen()),
                )
                .unwrap()
            }
            3 => {
                let n = rng.gen_range(2..=12);
                let sys = nonconstant_family(
                    n,
                    &Scalar::float(1.0),
                    &Scalar::float(2.0),
                    &Scalar::float(0.5),
                )
                .unwrap();
                perturbed(&mut rng, &sys)
            }
            _ => {
                let n = rng.gen_range(2..=12);
                let sys = lebesgue_family(n, &Scalar::float(rng.gen())).unwrap();
                if rng.gen() {
                    perturbed(&mut rng, &sys)
                } else {
                    sys
                }
            }
        };
        let report = check_theorem_conditions(&sys, 1e-10).map_err(|e| e.to_string())?;
        let residual = lemma_residual(&sys).map_err(|e| e.to_string())?;
        let lemma_ok = residual.max_abs().map_err(|e| e.to_string())?.0.to_f64() <= 1e-10;
        if lemma_ok != report.conditions_hold() {
            discordant.push(i);
        }
        if lemma_ok {
            passing += 1;
        } else {
            failing += 1;
        }
    }
    ensure(discordant.is_empty(), || {
        format!("discordant systems {discordant:?}")
    })?;
    Ok(format!(
        "200 systems ({passing} invariant, {failing} not), 0 discordant"
    ))
}

fn masses() -> Outcome {
    let even = s("5 - 2*sqrt(5)");
    let odd = s("-8 + 6*sqrt(2)");
    for (b, g) in [(1, 0), (0, 1), (1, 2), (3, 5)] {
        let sum = r(b + g, 1);
        for (n, factor) in [(2u32, &even), (3, &odd)] {
            let mass = total_mass(n, &r(b, 1), &r(g, 1)).map_err(|e| e.to_string())?;
            let p =
                nonconstant_family(n, &r(b, 1), &r(g, 1), &r(0, 1)).map_err(|e| e.to_string())?;
            let integral = p.p().total_mass().map_err(|e| e.to_string())?;
            let want = factor.try_mul(&sum).unwrap();
            ensure(mass == want && integral == want, || {
                format!("n={n}, levels ({b},{g}): {mass} vs {integral}")
            })?;
        }
    }
    let f2 = total_mass(2, &r(1, 1), &r(0, 1)).unwrap().to_f64();
    let f3 = total_mass(3, &r(1, 1), &r(0, 1)).unwrap().to_f64();
    ensure((f2 - 0.527_864_045_000_420_6).abs() < 1e-14, || {
        format!("n=2 float {f2}")
    })?;
    ensure((f3 - 0.485_281_374_238_570_3).abs() < 1e-14, || {
        format!("n=3 float {f3}")
    })?;
    Ok(format!(
        "exact masses match integrals; floats {f2:.15}, {f3:.15}"
    ))
}

fn renyi() -> Outcome {
    let renyi = renyi_system().map_err(|e| e.to_string())?;
    let p = renyi.system.p();
    let image = renyi.map.transfer(p).map_err(|e| e.to_string())?;
    ensure(&image == p, || format!("transfer {image:?}"))?;
    ensure(
        p.values()[0] == s("1/2 + 3/10*sqrt(5)") && p.values()[1] == s("1/2 + 1/10*sqrt(5)"),
        || format!("levels {:?}", p.values()),
    )?;
    let residual = lemma_residual(&renyi.system).map_err(|e| e.to_string())?;
    ensure(residual.is_zero_ae(), || {
        "full system is not invariant".into()
    })?;
    Ok(format!(
        "transfer fixes p exactly, levels {} and {}",
        p.values()[0],
        p.values()[1]
    ))
}

fn quadrature_oracle() -> Outcome {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let sys = common::random_float_system(&mut rng);
        let q = sys.pushforward_density().map_err(|e| e.to_string())?;
        for _ in 0..1000 {
            let (x, y) = (rng.gen_range(0.0..=1.0), rng.gen_range(0.0..=1.0));
            let (c, d) = if x <= y { (x, y) } else { (y, x) };
            let direct = common::oracle_measure(&sys, c, d);
            let b = Interval::half_open(Scalar::float(c), Scalar::float(d)).unwrap();
            let via_density = q.integrate(&b).map_err(|e| e.to_string())?.to_f64();
            worst = worst.max((direct - via_density).abs());
        }
    }
    ensure(worst <= 1e-9, || format!("max difference {worst:e}"))?;
    within(Duration::from_secs(10), started)?;
    Ok(format!(
        "20000 intervals, max difference {worst:.2e}, {:.2?}",
        started.elapsed()
    ))
}

fn one_step_stationarity() -> Outcome {
    let started = Instant::now();
    let family = nonconstant_family(10, &r(1, 1), &r(2, 1), &r(1, 2)).map_err(|e| e.to_string())?;
    let dyadic = EquippedSystem::new(
        r(1, 2),
        StepFunction::constant(r(1, 1)),
        StepFunction::constant(r(1, 3)),
    )
    .map_err(|e| e.to_string())?;
    let control = EquippedSystem::new(
        r(9, 20),
        StepFunction::constant(r(1, 1)),
        StepFunction::constant(r(1, 2)),
    )
    .map_err(|e| e.to_string())?;
    let mut parts = Vec::new();
    for (name, sys, seed) in [("family", &family, 11), ("dyadic", &dyadic, 12)] {
        let report =
            one_step_stationarity_test(sys, 1_000_000, seed, 100).map_err(|e| e.to_string())?;
        let l1 = report.pre_post_l1.unwrap();
        ensure(l1 <= 0.01, || format!("{name}: L1 {l1}"))?;
        parts.push(format!("{name} {l1:.4}"));
    }
    let report =
        one_step_stationarity_test(&control, 1_000_000, 13, 100).map_err(|e| e.to_string())?;
    let l1 = report.pre_post_l1.unwrap();
    ensure(l1 >= 0.05, || format!("control: L1 {l1}"))?;
    parts.push(format!("control {l1:.4}"));
    within(Duration::from_secs(30), started)?;
    Ok(format!(
        "pre/post L1: {}, {:.2?}",
        parts.join(", "),
        started.elapsed()
    ))
}

fn expansions() -> Outcome {
    const PHI: f64 = 1.618_033_988_749_895;
    let bases = [PHI, 1.8, 2.0];
    let k = 40;
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..1000 {
        let x: f64 = rng.gen();
        let beta = bases[rng.gen_range(0..3)];
        let d = greedy_expansion(x, beta, k).map_err(|e| e.to_string())?;
        let err = (x - evaluate_expansion(&d)).abs();
        ensure(err < beta.powi(-(k as i32)), || {
            format!("greedy x={x}, beta={beta}: error {err:e}")
        })?;
    }
    for seed in 0..100 {
        let x: f64 = rng.gen();
        let beta = bases[rng.gen_range(0..3)];
        let out = orbit_expansion_for_base(beta, x, k, &ChoicePolicy::Random(seed))
            .map_err(|e| e.to_string())?;
        let err = (x - orbit_value(&out.digits)).abs();
        ensure(err < beta.powi(-(k as i32)), || {
            format!("orbit seed {seed}, beta={beta}: error {err:e}")
        })?;
    }
    let golden = enumerate_expansions(0.5, PHI, 8)
        .map_err(|e| e.to_string())?
        .len();
    let binary = enumerate_expansions(0.5, 2.0, 8)
        .map_err(|e| e.to_string())?
        .len();
    ensure(golden > 1 && binary == 1, || {
        format!("enumeration counts {golden}, {binary}")
    })?;
    Ok(format!("greedy and orbit round trips within beta^-40; prefixes: {golden} (golden), {binary} (binary)"))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        (
            "exact invariance of the non-constant families",
            exact_families,
        ),
        ("Lebesgue measure iff a = 1/n", lebesgue_criterion),
        ("dyadic case, arbitrary equipment", dyadic_arbitrariness),
        (
            "functional equation vs conditions",
            lemma_theorem_equivalence,
        ),
        ("total mass", masses),
        ("golden-ratio system", renyi),
        ("quadrature oracle", quadrature_oracle),
        ("one-step stationarity", one_step_stationarity),
        ("beta-expansion round trips", expansions),
    ];
    let mut failures = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        match run() {
            Ok(detail) => println!("AC{} PASS {name}: {detail}", i + 1),
            Err(detail) => {
                failures += 1;
                println!("AC{} FAIL {name}: {detail}", i + 1);
            }
        }
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failures,
        criteria.len()
    );
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
