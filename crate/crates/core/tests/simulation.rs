use twovalued::families::{nonconstant_family, renyi_system};
use twovalued::simulate::{
    histogram, l1_distance, one_step_stationarity_test, one_step_stationarity_test_with, run_chain,
    run_chain_with, sample_from_density, ChainOptions, HistogramReport, SamplingScheme,
};
use twovalued::{EquippedSystem, Interval, Scalar, StepFunction};

fn r(p: i64, q: i64) -> Scalar {
    Scalar::ratio(p, q)
}

#[test]
fn golden_density_piece_masses() {
    let sys = nonconstant_family(2, &r(1, 1), &r(0, 1), &r(0, 1)).unwrap();
    let p = sys.p();
    let count = 200_000;
    let samples = sample_from_density(p, count, 21).unwrap();
    let total = p.total_mass().unwrap().to_f64();
    for (lo, hi, _) in p.pieces() {
        let piece = Interval::half_open(lo.clone(), hi.clone()).unwrap();
        let m = p.integrate(&piece).unwrap().to_f64() / total;
        let (lo, hi) = (lo.to_f64(), hi.to_f64());
        let empirical = samples
            .values
            .iter()
            .filter(|&&x| x >= lo && x < hi)
            .count() as f64
            / count as f64;
        let sigma = (m * (1.0 - m) / count as f64).sqrt();
        assert!(
            (empirical - m).abs() <= 3.0 * sigma + 1e-12,
            "piece [{lo}, {hi}): {empirical} vs {m}"
        );
    }
}

#[test]
fn inverse_cdf_piece_masses_over_many_runs() {
    let p = StepFunction::new(
        vec![r(0, 1), r(1, 5), r(1, 2), r(1, 1)],
        vec![r(3, 1), r(1, 2), r(2, 1)],
    )
    .unwrap();
    let total = p.total_mass().unwrap().to_f64();
    let count = 5_000;
    let mut misses = 0;
    for seed in 0..100 {
        let samples = sample_from_density(&p, count, seed).unwrap();
        for (lo, hi, _) in p.pieces() {
            let m = p
                .integrate(&Interval::half_open(lo.clone(), hi.clone()).unwrap())
                .unwrap()
                .to_f64()
                / total;
            let (lo, hi) = (lo.to_f64(), hi.to_f64());
            let e = samples
                .values
                .iter()
                .filter(|&&x| x >= lo && x < hi)
                .count() as f64
                / count as f64;
            if (e - m).abs() > 4.0 * (m * (1.0 - m) / count as f64).sqrt() {
                misses += 1;
            }
        }
    }
    assert!(misses <= 3, "{misses} of 300 piece checks missed");
}

#[test]
fn reproducible_reports() {
    let sys = nonconstant_family(4, &r(1, 1), &r(1, 1), &r(1, 2)).unwrap();
    let a = one_step_stationarity_test(&sys, 20_000, 5, 50).unwrap();
    let b = one_step_stationarity_test(&sys, 20_000, 5, 50).unwrap();
    assert_eq!(a, b);
    assert!((a.bin_masses.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    let c = run_chain(&sys, 0.3, 1000, 10, 8).unwrap();
    assert_eq!(c, run_chain(&sys, 0.3, 1000, 10, 8).unwrap());
    let other = run_chain_with(
        &sys,
        0.3,
        1000,
        10,
        8,
        &ChainOptions {
            stream: 1,
            ..Default::default()
        },
    )
    .unwrap();
    assert_ne!(c.values, other.values);
}

#[test]
fn iid_one_step_statistics_are_noise_sized() {
    // calibration: the i.i.d. pre/post distance for an invariant system scales like bins/√count
    let uniform = EquippedSystem::new(r(1, 3), StepFunction::constant(r(1, 1)), {
        twovalued::families::lebesgue_family(3, &r(0, 1))
            .unwrap()
            .alpha1()
            .clone()
    })
    .unwrap();
    let count = 100_000;
    let bins = 20;
    let report =
        one_step_stationarity_test_with(&uniform, count, 3, bins, SamplingScheme::Iid).unwrap();
    let noise = 2.0 * bins as f64 / (count as f64).sqrt();
    assert!(report.pre_post_l1.unwrap() < noise);
    let control = EquippedSystem::new(
        r(9, 20),
        StepFunction::constant(r(1, 1)),
        StepFunction::constant(r(1, 2)),
    )
    .unwrap();
    let report =
        one_step_stationarity_test_with(&control, count, 3, bins, SamplingScheme::Iid).unwrap();
    let q = control.pushforward_density().unwrap();
    let gap = q.sub(control.p()).unwrap().to_float();
    let l1_exact: f64 = gap
        .pieces()
        .map(|(lo, hi, v)| v.to_f64().abs() * (hi.to_f64() - lo.to_f64()))
        .sum();
    assert!(report.pre_post_l1.unwrap() > l1_exact / 2.0);
}

/// Long-run histograms are reported as diagnostics; these two maps are known to be ergodic.
#[test]
fn ergodic_chains_match_their_densities() {
    let renyi = renyi_system().unwrap();
    let chain = run_chain(&renyi.system, 0.2, 1_000_000, 100, 17).unwrap();
    let report = HistogramReport::against_density(&chain, renyi.system.p(), 100).unwrap();
    assert!(
        report.l1_distance_to_reference <= 0.02,
        "golden: {}",
        report.l1_distance_to_reference
    );

    let dyadic = EquippedSystem::new(
        r(1, 2),
        StepFunction::constant(r(1, 1)),
        StepFunction::constant(r(1, 2)),
    )
    .unwrap();
    let chain = run_chain(&dyadic, 0.2, 1_000_000, 100, 18).unwrap();
    let uniform = vec![0.01; 100];
    let l1 = l1_distance(&histogram(&chain.values, 100), &uniform);
    assert!(l1 <= 0.02, "dyadic: {l1}");
}
