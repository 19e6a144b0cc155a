//! β-expansions for bases `β = 1/(1-a)` in `(1, 2]`.
//!
//! Greedy digits and enumeration work in expansion coordinates, where a
//! remainder `r` lives in `[0, 1/(β-1)]` and a digit step is `r ↦ βr - σ`.
//! Orbits of the two-valued map live on `[0, 1]` and use
//! `h0(x) = βx` on `[0, 1/β]` and `h1(x) = βx - β + 1` on `[1 - 1/β, 1]`.
//! The two views differ by the factor `β - 1`: an orbit word `σ` started at
//! `x1` satisfies `x1 = (β-1) Σ σ_k β^-k + β^-K x_{K+1}`, see [`orbit_value`].
//! Everything here runs on `f64`.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::system::EquippedSystem;

/// Slack used when deciding whether a point is inside a branch domain.
pub const ADMISSIBILITY_EPSILON: f64 = 1e-12;
/// Default cap on visited nodes in [`enumerate_expansions`].
pub const DEFAULT_NODE_BUDGET: usize = 1_000_000;
/// Longest prefix [`enumerate_expansions`] accepts.
pub const MAX_ENUMERATION_DEPTH: usize = 30;

/// A finite 0/1 digit word together with its base.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DigitRepr", into = "DigitRepr")]
pub struct DigitSequence {
    digits: Vec<u8>,
    base: f64,
}

#[derive(Serialize, Deserialize)]
struct DigitRepr {
    digits: String,
    base: f64,
}

impl TryFrom<DigitRepr> for DigitSequence {
    type Error = Error;

    fn try_from(repr: DigitRepr) -> Result<Self> {
        DigitSequence::parse(&repr.digits, repr.base)
    }
}

impl From<DigitSequence> for DigitRepr {
    fn from(d: DigitSequence) -> Self {
        DigitRepr {
            digits: d.word(),
            base: d.base,
        }
    }
}

fn check_base(beta: f64) -> Result<()> {
    if !(beta > 1.0 && beta <= 2.0) {
        return Err(Error::OutOfDomain(format!(
            "base {beta} must lie in (1, 2]"
        )));
    }
    Ok(())
}

impl DigitSequence {
    pub fn new(digits: Vec<u8>, base: f64) -> Result<Self> {
        check_base(base)?;
        if digits.is_empty() {
            return Err(Error::OutOfDomain("digit word is empty".into()));
        }
        if let Some(d) = digits.iter().find(|&&d| d > 1) {
            return Err(Error::OutOfDomain(format!("digit {d} is not 0 or 1")));
        }
        Ok(DigitSequence { digits, base })
    }

    /// Parses a word such as `"110000"`.
    pub fn parse(word: &str, base: f64) -> Result<Self> {
        let digits = word
            .chars()
            .map(|c| match c {
                '0' => Ok(0),
                '1' => Ok(1),
                other => Err(Error::Parse(format!("bad digit {other:?} in {word:?}"))),
            })
            .collect::<Result<Vec<u8>>>()?;
        DigitSequence::new(digits, base)
    }

    pub fn digits(&self) -> &[u8] {
        &self.digits
    }

    pub fn base(&self) -> f64 {
        self.base
    }

    pub fn len(&self) -> usize {
        self.digits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.digits.is_empty()
    }

    /// The word as a string of `0`/`1`.
    pub fn word(&self) -> String {
        self.digits
            .iter()
            .map(|&d| if d == 1 { '1' } else { '0' })
            .collect()
    }
}

impl fmt::Display for DigitSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.word())
    }
}

fn check_unit(x: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::OutOfDomain(format!("x = {x} must lie in [0, 1]")));
    }
    Ok(())
}

fn check_length(k: usize) -> Result<()> {
    if k == 0 {
        return Err(Error::OutOfDomain("K must be at least 1".into()));
    }
    Ok(())
}

/// First `k` greedy digits of `x`. Digits are capped at 1, so `greedy(1, 2)` is `11…1`.
pub fn greedy_expansion(x: f64, beta: f64, k: usize) -> Result<DigitSequence> {
    check_unit(x)?;
    check_base(beta)?;
    check_length(k)?;
    let mut r = x;
    let mut digits = Vec::with_capacity(k);
    for _ in 0..k {
        let scaled = beta * r;
        let digit = u8::from(scaled >= 1.0 - ADMISSIBILITY_EPSILON);
        digits.push(digit);
        r = (scaled - f64::from(digit)).max(0.0);
    }
    DigitSequence::new(digits, beta)
}

/// `Σ σ_k β^-k` by backward Horner evaluation.
pub fn evaluate_expansion(d: &DigitSequence) -> f64 {
    d.digits
        .iter()
        .rev()
        .fold(0.0, |acc, &digit| (acc + f64::from(digit)) / d.base)
}

/// The starting point encoded by an orbit digit word: `(β-1) Σ σ_k β^-k`.
pub fn orbit_value(d: &DigitSequence) -> f64 {
    (d.base - 1.0) * evaluate_expansion(d)
}

/// How the orbit chooses a map on the overlap `[1 - 1/β, 1/β]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ChoicePolicy {
    /// Take `h1` whenever it is admissible.
    Greedy,
    /// Fair coin on the overlap, from a seeded ChaCha8 stream.
    Random(u64),
    /// Follow the given digits; an inadmissible digit is an error.
    Fixed(Vec<u8>),
}

impl FromStr for ChoicePolicy {
    type Err = Error;

    /// `greedy`, `random:<seed>` or `fixed:<word>`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "greedy" {
            return Ok(ChoicePolicy::Greedy);
        }
        if let Some(seed) = s.strip_prefix("random:") {
            let seed = seed
                .parse()
                .map_err(|_| Error::Parse(format!("bad seed in {s:?}")))?;
            return Ok(ChoicePolicy::Random(seed));
        }
        if let Some(word) = s.strip_prefix("fixed:") {
            let digits = DigitSequence::parse(word, 2.0)?;
            return Ok(ChoicePolicy::Fixed(digits.digits));
        }
        Err(Error::Parse(format!("unknown policy {s:?}")))
    }
}

/// An orbit `x_1..x_{K+1}` and the digits that produced it.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OrbitExpansion {
    pub orbit: Vec<f64>,
    pub digits: DigitSequence,
}

/// Follows one orbit of the two-valued map of `sys` for `k` steps.
pub fn orbit_expansion(
    sys: &EquippedSystem,
    x1: f64,
    k: usize,
    policy: &ChoicePolicy,
) -> Result<OrbitExpansion> {
    orbit_expansion_for_base(sys.beta().to_f64(), x1, k, policy)
}

/// [`orbit_expansion`] for a bare base.
pub fn orbit_expansion_for_base(
    beta: f64,
    x1: f64,
    k: usize,
    policy: &ChoicePolicy,
) -> Result<OrbitExpansion> {
    check_unit(x1)?;
    check_base(beta)?;
    check_length(k)?;
    if let ChoicePolicy::Fixed(word) = policy {
        if word.len() < k {
            return Err(Error::OutOfDomain(format!(
                "fixed word has {} digits, need {k}",
                word.len()
            )));
        }
    }
    let mut rng = match policy {
        ChoicePolicy::Random(seed) => Some(ChaCha8Rng::seed_from_u64(*seed)),
        _ => None,
    };
    let low = 1.0 - 1.0 / beta - ADMISSIBILITY_EPSILON;
    let high = 1.0 / beta + ADMISSIBILITY_EPSILON;
    let mut orbit = Vec::with_capacity(k + 1);
    let mut digits = Vec::with_capacity(k);
    let mut x = x1;
    orbit.push(x);
    for step in 0..k {
        let can0 = x <= high;
        let can1 = x >= low;
        let digit = match policy {
            ChoicePolicy::Greedy => u8::from(can1),
            ChoicePolicy::Random(_) if can0 && can1 => {
                u8::from(rng.as_mut().unwrap().gen::<bool>())
            }
            ChoicePolicy::Random(_) => u8::from(can1),
            ChoicePolicy::Fixed(word) => word[step],
        };
        if (digit == 0 && !can0) || (digit == 1 && !can1) {
            return Err(Error::InadmissibleChoice { step, x });
        }
        x = (beta * x - f64::from(digit) * (beta - 1.0)).clamp(0.0, 1.0);
        digits.push(digit);
        orbit.push(x);
    }
    Ok(OrbitExpansion {
        orbit,
        digits: DigitSequence::new(digits, beta)?,
    })
}

/// Rebuilds an orbit from its start and digits via `x_{k+1} = βx_k - σ_k(β-1)`.
pub fn reconstruct_orbit(x1: f64, d: &DigitSequence) -> Vec<f64> {
    let beta = d.base;
    let mut orbit = Vec::with_capacity(d.len() + 1);
    let mut x = x1;
    orbit.push(x);
    for &digit in &d.digits {
        x = beta * x - f64::from(digit) * (beta - 1.0);
        orbit.push(x);
    }
    orbit
}

/// Limits for [`enumerate_expansions_with`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnumerationConfig {
    pub epsilon: f64,
    pub node_budget: usize,
}

impl Default for EnumerationConfig {
    fn default() -> Self {
        EnumerationConfig {
            epsilon: ADMISSIBILITY_EPSILON,
            node_budget: DEFAULT_NODE_BUDGET,
        }
    }
}

/// All admissible length-`k` prefixes of expansions of `x`, in lexicographic order.
///
/// Remainders must stay in `[0, 1/(β-1))`. A remainder equal to `1/(β-1)` can
/// only be continued by `111…`, and expansions ending in all ones are
/// excluded, so `x = 1/2` has the single binary expansion `1000…` and `x = 1`
/// has none in base 2.
pub fn enumerate_expansions(x: f64, beta: f64, k: usize) -> Result<Vec<DigitSequence>> {
    enumerate_expansions_with(x, beta, k, &EnumerationConfig::default())
}

pub fn enumerate_expansions_with(
    x: f64,
    beta: f64,
    k: usize,
    config: &EnumerationConfig,
) -> Result<Vec<DigitSequence>> {
    check_unit(x)?;
    check_base(beta)?;
    check_length(k)?;
    if k > MAX_ENUMERATION_DEPTH {
        return Err(Error::OutOfDomain(format!(
            "K = {k} exceeds {MAX_ENUMERATION_DEPTH}"
        )));
    }
    let ceiling = 1.0 / (beta - 1.0) - config.epsilon;
    let mut words = Vec::new();
    let mut visited = 0usize;
    // depth-first; pushing 0 after 1 pops 0-branches first, so output is sorted
    let mut stack = vec![(x, Vec::<u8>::with_capacity(k))];
    while let Some((r, prefix)) = stack.pop() {
        visited += 1;
        if visited > config.node_budget {
            return Err(Error::BudgetExceeded(config.node_budget));
        }
        if prefix.len() == k {
            words.push(DigitSequence::new(prefix, beta)?);
            continue;
        }
        for digit in [1u8, 0] {
            let next = beta * r - f64::from(digit);
            if next >= -config.epsilon && next < ceiling {
                let mut word = prefix.clone();
                word.push(digit);
                stack.push((next.max(0.0), word));
            }
        }
    }
    Ok(words)
}

#[cfg(test)]
mod tests {
    use super::*;

    const PHI: f64 = 1.618_033_988_749_895;

    #[test]
    fn greedy_examples() {
        assert_eq!(greedy_expansion(0.5, 2.0, 4).unwrap().word(), "1000");
        assert_eq!(greedy_expansion(0.0, 1.7, 5).unwrap().word(), "00000");
        assert_eq!(greedy_expansion(1.0, PHI, 6).unwrap().word(), "110000");
        assert_eq!(greedy_expansion(1.0, 2.0, 4).unwrap().word(), "1111");
        assert!(matches!(
            greedy_expansion(1.5, 2.0, 4),
            Err(Error::OutOfDomain(_))
        ));
        assert!(matches!(
            greedy_expansion(0.5, 2.5, 4),
            Err(Error::OutOfDomain(_))
        ));
    }

    #[test]
    fn evaluation() {
        let d = DigitSequence::parse("1000", 2.0).unwrap();
        assert_eq!(evaluate_expansion(&d), 0.5);
        let d = DigitSequence::parse("110000", PHI).unwrap();
        assert!((evaluate_expansion(&d) - 1.0).abs() < 1e-15);
        assert_eq!(
            evaluate_expansion(&DigitSequence::parse("0000", 1.3).unwrap()),
            0.0
        );
    }

    #[test]
    fn golden_orbit_from_fixed_word() {
        let word = ChoicePolicy::Fixed(vec![1, 1, 0, 0, 0, 0]);
        let out = orbit_expansion_for_base(PHI, PHI - 1.0, 6, &word).unwrap();
        assert!(out.orbit.last().unwrap().abs() < 1e-12);
        assert!((orbit_value(&out.digits) - (PHI - 1.0)).abs() < 1e-15);
        // x1 = 1 only admits h1, which fixes 1
        let err = orbit_expansion_for_base(PHI, 1.0, 6, &word).unwrap_err();
        assert!(matches!(err, Error::InadmissibleChoice { step: 2, .. }));
    }

    #[test]
    fn dyadic_orbit_is_binary() {
        let out = orbit_expansion_for_base(2.0, 0.3, 12, &ChoicePolicy::Greedy).unwrap();
        let greedy = greedy_expansion(0.3, 2.0, 12).unwrap();
        assert_eq!(out.digits, greedy);
    }

    #[test]
    fn random_orbits_round_trip() {
        let k = 40;
        for seed in 0..100 {
            let out = orbit_expansion_for_base(1.8, 0.3, k, &ChoicePolicy::Random(seed)).unwrap();
            assert!((orbit_value(&out.digits) - 0.3).abs() < 1.8f64.powi(-(k as i32)));
            let rebuilt = reconstruct_orbit(0.3, &out.digits);
            for (a, b) in rebuilt.iter().zip(&out.orbit) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn enumeration_counts() {
        assert_eq!(enumerate_expansions(0.3, 2.0, 10).unwrap().len(), 1);
        let half = enumerate_expansions(0.5, 2.0, 8).unwrap();
        assert_eq!(half.len(), 1);
        assert_eq!(half[0].word(), "10000000");
        assert!(enumerate_expansions(1.0, 2.0, 3).unwrap().is_empty());
        assert!(enumerate_expansions(0.5, PHI, 8).unwrap().len() > 1);
        let zeros = enumerate_expansions(0.0, 1.4, 7).unwrap();
        assert_eq!(zeros.len(), 1);
        assert_eq!(zeros[0].word(), "0000000");
        assert!(matches!(
            enumerate_expansions(0.5, PHI, 31),
            Err(Error::OutOfDomain(_))
        ));
        let tight = EnumerationConfig {
            node_budget: 10,
            ..Default::default()
        };
        assert!(matches!(
            enumerate_expansions_with(0.5, 1.1, 20, &tight),
            Err(Error::BudgetExceeded(10))
        ));
    }

    #[test]
    fn enumeration_is_sorted_and_contains_greedy_as_maximum() {
        let words = enumerate_expansions(0.5, PHI, 8).unwrap();
        let strings: Vec<String> = words.iter().map(|w| w.word()).collect();
        let mut sorted = strings.clone();
        sorted.sort();
        assert_eq!(strings, sorted);
        assert_eq!(
            strings.last().unwrap(),
            &greedy_expansion(0.5, PHI, 8).unwrap().word()
        );
    }

    #[test]
    fn policy_parsing_and_serde() {
        assert_eq!(
            "greedy".parse::<ChoicePolicy>().unwrap(),
            ChoicePolicy::Greedy
        );
        assert_eq!(
            "random:7".parse::<ChoicePolicy>().unwrap(),
            ChoicePolicy::Random(7)
        );
        assert_eq!(
            "fixed:101".parse::<ChoicePolicy>().unwrap(),
            ChoicePolicy::Fixed(vec![1, 0, 1])
        );
        assert!("fixed:12".parse::<ChoicePolicy>().is_err());
        let d = DigitSequence::parse("1010", 1.5).unwrap();
        let json = serde_json::to_string(&d).unwrap();
        assert_eq!(json, r#"{"digits":"1010","base":1.5}"#);
        assert_eq!(serde_json::from_str::<DigitSequence>(&json).unwrap(), d);
    }
}
