//! Monte Carlo checks of stationarity for the induced Markov chain.
//!
//! Random numbers come from ChaCha8 (`rand_chacha`), seeded with
//! `seed_from_u64(seed)`; independent substreams are selected with
//! `set_stream`. The sampler uses stream [`SAMPLE_STREAM`], the branch coins
//! of the one-step test use [`STEP_STREAM`], and chains use their own index.

use std::io::{Read, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::piecewise::StepFunction;
use crate::system::EquippedSystem;

/// Name recorded in every report.
pub const RNG_ALGORITHM: &str = "chacha8 (rand_chacha 0.3, seed_from_u64 + set_stream)";
pub const DEFAULT_BINS: usize = 100;
pub const SAMPLE_STREAM: u64 = 0;
pub const STEP_STREAM: u64 = 1;
/// Default noise added after each chain step; keeps float orbits of expanding
/// maps from collapsing onto dyadic rationals.
pub const DEFAULT_JITTER: f64 = 1e-12;

fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// SHA-256 of the canonical JSON of a serializable descriptor.
pub fn descriptor_hash<T: Serialize>(descriptor: &T) -> Result<String> {
    let json = serde_json::to_vec(descriptor)?;
    Ok(hex(&Sha256::digest(&json)))
}

/// A reproducible batch of points in `[0, 1]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleSet {
    pub values: Vec<f64>,
    pub seed: u64,
    /// Hash of the density or system the samples were drawn from.
    pub meta: String,
    pub rng: String,
}

/// How [`sample_from_density_with`] draws its uniforms.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SamplingScheme {
    /// Independent uniforms.
    #[default]
    Iid,
    /// One uniform in each cell `[i/N, (i+1)/N)`. Every sample is still
    /// marginally distributed as `p`, with far less histogram noise.
    Stratified,
}

/// Inverse CDF of a normalized nonnegative step density.
#[derive(Clone, Debug)]
pub struct InverseCdf {
    breakpoints: Vec<f64>,
    values: Vec<f64>,
    cumulative: Vec<f64>,
}

impl InverseCdf {
    pub fn new(p: &StepFunction) -> Result<Self> {
        if !p.is_nonnegative() {
            return Err(Error::InvalidStepFunction(
                "density takes negative values".into(),
            ));
        }
        let table = p.table();
        let breakpoints = table.breakpoints().to_vec();
        let values = table.values().to_vec();
        let mut cumulative = vec![0.0];
        for (i, v) in values.iter().enumerate() {
            let mass = v * (breakpoints[i + 1] - breakpoints[i]);
            cumulative.push(cumulative[i] + mass);
        }
        let total = *cumulative.last().expect("nonempty");
        if total <= 0.0 {
            return Err(Error::ZeroMass);
        }
        for c in &mut cumulative {
            *c /= total;
        }
        let values = values.into_iter().map(|v| v / total).collect();
        Ok(InverseCdf {
            breakpoints,
            values,
            cumulative,
        })
    }

    /// The point `x` with `F(x) = u`, for `u` in `[0, 1)`.
    pub fn quantile(&self, u: f64) -> f64 {
        let pieces = self.values.len();
        let mut i = self.cumulative[1..]
            .partition_point(|&c| c <= u)
            .min(pieces - 1);
        while self.values[i] <= 0.0 && i > 0 {
            i -= 1;
        }
        let (lo, hi) = (self.breakpoints[i], self.breakpoints[i + 1]);
        if self.values[i] <= 0.0 {
            return lo;
        }
        let x = lo + (u - self.cumulative[i]) / self.values[i];
        x.clamp(lo, hi)
    }

    /// `F(x)`.
    pub fn cdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        if x >= 1.0 {
            return 1.0;
        }
        let i = self.breakpoints[1..self.breakpoints.len() - 1].partition_point(|&t| t <= x);
        (self.cumulative[i] + self.values[i] * (x - self.breakpoints[i])).min(1.0)
    }

    /// Probability of each of `bins` equal-width bins.
    pub fn bin_masses(&self, bins: usize) -> Vec<f64> {
        let edges = bin_edges(bins);
        edges
            .windows(2)
            .map(|w| self.cdf(w[1]) - self.cdf(w[0]))
            .collect()
    }
}

/// Inverse-CDF samples from `p/∫p` with independent uniforms.
pub fn sample_from_density(p: &StepFunction, count: usize, seed: u64) -> Result<SampleSet> {
    sample_from_density_with(p, count, seed, SamplingScheme::Iid)
}

pub fn sample_from_density_with(
    p: &StepFunction,
    count: usize,
    seed: u64,
    scheme: SamplingScheme,
) -> Result<SampleSet> {
    let inverse = InverseCdf::new(p)?;
    let mut rng = rng_for(seed, SAMPLE_STREAM);
    let values = (0..count)
        .map(|i| {
            let u: f64 = rng.gen();
            let u = match scheme {
                SamplingScheme::Iid => u,
                SamplingScheme::Stratified => {
                    ((i as f64 + u) / count as f64).min(1.0 - f64::EPSILON)
                }
            };
            inverse.quantile(u)
        })
        .collect();
    Ok(SampleSet {
        values,
        seed,
        meta: descriptor_hash(p)?,
        rng: RNG_ALGORITHM.into(),
    })
}

/// `bins + 1` equally spaced edges on `[0, 1]`.
pub fn bin_edges(bins: usize) -> Vec<f64> {
    (0..=bins).map(|i| i as f64 / bins as f64).collect()
}

/// Fraction of `values` in each equal-width bin; `1.0` goes to the last bin.
pub fn histogram(values: &[f64], bins: usize) -> Vec<f64> {
    let mut counts = vec![0u64; bins];
    for &v in values {
        let i = ((v * bins as f64) as usize).min(bins - 1);
        counts[i] += 1;
    }
    let n = values.len().max(1) as f64;
    counts.into_iter().map(|c| c as f64 / n).collect()
}

/// `Σ |a_i - b_i|`.
pub fn l1_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
}

/// Kolmogorov–Smirnov distance between `values` and a reference CDF.
pub fn ks_statistic(values: &[f64], reference: &InverseCdf) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = reference.cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

/// Binned comparison of samples with a reference density.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HistogramReport {
    pub bin_edges: Vec<f64>,
    /// Histogram of the sample under test (after the step, for the one-step test).
    pub bin_masses: Vec<f64>,
    pub reference_masses: Vec<f64>,
    pub l1_distance_to_reference: f64,
    pub ks_statistic: f64,
    /// Histogram before the step; absent for chain reports.
    pub pre_bin_masses: Option<Vec<f64>>,
    /// `Σ |pre - post|` over bins; absent for chain reports.
    pub pre_post_l1: Option<f64>,
    pub count: usize,
    pub seed: u64,
    pub meta: String,
    pub rng: String,
    pub scheme: Option<SamplingScheme>,
}

impl HistogramReport {
    /// Compares a sample set with `p/∫p`.
    pub fn against_density(samples: &SampleSet, p: &StepFunction, bins: usize) -> Result<Self> {
        check_bins(bins)?;
        let reference = InverseCdf::new(p)?;
        let bin_masses = histogram(&samples.values, bins);
        let reference_masses = reference.bin_masses(bins);
        Ok(HistogramReport {
            bin_edges: bin_edges(bins),
            l1_distance_to_reference: l1_distance(&bin_masses, &reference_masses),
            ks_statistic: ks_statistic(&samples.values, &reference),
            bin_masses,
            reference_masses,
            pre_bin_masses: None,
            pre_post_l1: None,
            count: samples.values.len(),
            seed: samples.seed,
            meta: samples.meta.clone(),
            rng: samples.rng.clone(),
            scheme: None,
        })
    }
}

fn check_bins(bins: usize) -> Result<()> {
    if bins == 0 {
        return Err(Error::OutOfRange("bin count must be positive".into()));
    }
    Ok(())
}

/// One-step test with stratified initial samples.
pub fn one_step_stationarity_test(
    sys: &EquippedSystem,
    count: usize,
    seed: u64,
    bins: usize,
) -> Result<HistogramReport> {
    one_step_stationarity_test_with(sys, count, seed, bins, SamplingScheme::Stratified)
}

/// Draws `X ~ p/∫p`, applies one Markov step and compares the histograms of
/// `X` and of its image, and the image with `p/∫p`.
pub fn one_step_stationarity_test_with(
    sys: &EquippedSystem,
    count: usize,
    seed: u64,
    bins: usize,
    scheme: SamplingScheme,
) -> Result<HistogramReport> {
    check_bins(bins)?;
    if count == 0 {
        return Err(Error::OutOfRange("sample count must be positive".into()));
    }
    let pre = sample_from_density_with(sys.p(), count, seed, scheme)?;
    let kernel = sys.kernel();
    let mut coins = rng_for(seed, STEP_STREAM);
    let post_values = pre
        .values
        .iter()
        .map(|&x| kernel.step(x, coins.gen()))
        .collect::<Result<Vec<f64>>>()?;
    let post = SampleSet {
        values: post_values,
        seed,
        meta: descriptor_hash(sys)?,
        rng: RNG_ALGORITHM.into(),
    };
    let mut report = HistogramReport::against_density(&post, sys.p(), bins)?;
    let pre_masses = histogram(&pre.values, bins);
    report.pre_post_l1 = Some(l1_distance(&pre_masses, &report.bin_masses));
    report.pre_bin_masses = Some(pre_masses);
    report.scheme = Some(scheme);
    Ok(report)
}

/// Options for [`run_chain_with`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChainOptions {
    /// Substream index; chains with different indices are independent.
    pub stream: u64,
    /// Half-width of uniform noise added after each step (0 disables it).
    pub jitter: f64,
}

impl Default for ChainOptions {
    fn default() -> Self {
        ChainOptions {
            stream: 0,
            jitter: DEFAULT_JITTER,
        }
    }
}

/// Trajectory of the chain from `x0`, keeping the `steps` states after `burn_in`.
/// With `steps = 0` the result is `[x0]`.
pub fn run_chain(
    sys: &EquippedSystem,
    x0: f64,
    steps: usize,
    burn_in: usize,
    seed: u64,
) -> Result<SampleSet> {
    run_chain_with(sys, x0, steps, burn_in, seed, &ChainOptions::default())
}

pub fn run_chain_with(
    sys: &EquippedSystem,
    x0: f64,
    steps: usize,
    burn_in: usize,
    seed: u64,
    options: &ChainOptions,
) -> Result<SampleSet> {
    if !(0.0..=1.0).contains(&x0) {
        return Err(Error::OutOfDomain(format!("x0 = {x0} is outside [0, 1]")));
    }
    let meta = descriptor_hash(sys)?;
    if steps == 0 {
        return Ok(SampleSet {
            values: vec![x0],
            seed,
            meta,
            rng: RNG_ALGORITHM.into(),
        });
    }
    let kernel = sys.kernel();
    let mut rng = rng_for(seed, options.stream);
    let mut x = x0;
    let mut values = Vec::with_capacity(steps);
    for i in 0..burn_in + steps {
        x = kernel.step(x, rng.gen())?;
        if options.jitter > 0.0 {
            let noise: f64 = rng.gen_range(-options.jitter..=options.jitter);
            x = (x + noise).clamp(0.0, 1.0);
        }
        if i >= burn_in {
            values.push(x);
        }
    }
    Ok(SampleSet {
        values,
        seed,
        meta,
        rng: RNG_ALGORITHM.into(),
    })
}

/// Writes an 8-byte little-endian count followed by little-endian `f64` values.
pub fn write_samples_binary<W: Write>(values: &[f64], mut out: W) -> std::io::Result<()> {
    out.write_all(&(values.len() as u64).to_le_bytes())?;
    for v in values {
        out.write_all(&v.to_le_bytes())?;
    }
    out.flush()
}

/// Inverse of [`write_samples_binary`].
pub fn read_samples_binary<R: Read>(mut input: R) -> std::io::Result<Vec<f64>> {
    let mut header = [0u8; 8];
    input.read_exact(&mut header)?;
    let count = u64::from_le_bytes(header) as usize;
    let mut values = Vec::with_capacity(count.min(1 << 24));
    let mut buf = [0u8; 8];
    for _ in 0..count {
        input.read_exact(&mut buf)?;
        values.push(f64::from_le_bytes(buf));
    }
    Ok(values)
}
