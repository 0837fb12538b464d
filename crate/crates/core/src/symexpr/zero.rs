//! Zero-testing with tagged confidence.
//!
//! Rational functions are decided exactly by clearing denominators. When a
//! transcendental atom survives in the numerator the expression is sampled at
//! random rational points: any finite nonzero sample is an exact witness of
//! nonvanishing, while a run of zero samples only yields a probable verdict.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::poly::Poly;
use super::Expr;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Certainty {
    Probable,
    Exact,
}

/// Confidence tag carried into reports. Ordered from weakest to strongest.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Confidence {
    Indeterminate,
    Probable,
    Exact,
}

impl Confidence {
    pub fn as_str(self) -> &'static str {
        match self {
            Confidence::Exact => "exact",
            Confidence::Probable => "probable",
            Confidence::Indeterminate => "indeterminate",
        }
    }
}

impl From<Certainty> for Confidence {
    fn from(c: Certainty) -> Confidence {
        match c {
            Certainty::Exact => Confidence::Exact,
            Certainty::Probable => Confidence::Probable,
        }
    }
}

impl fmt::Display for Confidence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Outcome of a decision procedure.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Verdict {
    Holds(Certainty),
    Fails(Certainty),
    Indeterminate,
}

impl Verdict {
    pub const EXACT_TRUE: Verdict = Verdict::Holds(Certainty::Exact);
    pub const EXACT_FALSE: Verdict = Verdict::Fails(Certainty::Exact);

    pub fn holds(self) -> bool {
        matches!(self, Verdict::Holds(_))
    }

    pub fn fails(self) -> bool {
        matches!(self, Verdict::Fails(_))
    }

    pub fn is_exact(self) -> bool {
        matches!(
            self,
            Verdict::Holds(Certainty::Exact) | Verdict::Fails(Certainty::Exact)
        )
    }

    pub fn confidence(self) -> Confidence {
        match self {
            Verdict::Holds(c) | Verdict::Fails(c) => c.into(),
            Verdict::Indeterminate => Confidence::Indeterminate,
        }
    }

    pub fn negate(self) -> Verdict {
        match self {
            Verdict::Holds(c) => Verdict::Fails(c),
            Verdict::Fails(c) => Verdict::Holds(c),
            Verdict::Indeterminate => Verdict::Indeterminate,
        }
    }

    /// Conjunction. An exact failure dominates, then any failure, then an
    /// indeterminate member; otherwise holds with the weakest certainty.
    pub fn all<I: IntoIterator<Item = Verdict>>(verdicts: I) -> Verdict {
        let mut weakest = Certainty::Exact;
        let mut failure: Option<Certainty> = None;
        let mut unknown = false;
        for v in verdicts {
            match v {
                Verdict::Holds(c) => weakest = weakest.min(c),
                Verdict::Fails(c) => failure = Some(failure.map_or(c, |f| f.max(c))),
                Verdict::Indeterminate => unknown = true,
            }
        }
        match (failure, unknown) {
            (Some(c), _) => Verdict::Fails(c),
            (None, true) => Verdict::Indeterminate,
            (None, false) => Verdict::Holds(weakest),
        }
    }

    /// Caps the certainty at `cap` (never upgrades).
    pub fn capped(self, cap: Confidence) -> Verdict {
        match (self, cap) {
            (_, Confidence::Indeterminate) => Verdict::Indeterminate,
            (Verdict::Holds(_), Confidence::Probable) => Verdict::Holds(Certainty::Probable),
            (Verdict::Fails(_), Confidence::Probable) => Verdict::Fails(Certainty::Probable),
            (v, _) => v,
        }
    }
}

/// Seeded random-point sampler for zero tests that cannot be decided
/// exactly. Every call reseeds, so verdicts depend only on the seed and the
/// expression.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Sampler {
    seed: u64,
    samples: usize,
}

impl Default for Sampler {
    fn default() -> Self {
        Sampler::new(Sampler::DEFAULT_SEED)
    }
}

impl Sampler {
    pub const DEFAULT_SEED: u64 = 1729;
    pub const MIN_SAMPLES: usize = 32;
    const MAX_ATTEMPTS_PER_SAMPLE: usize = 8;
    const RELATIVE_TOLERANCE: f64 = 1e-9;

    pub fn new(seed: u64) -> Sampler {
        Sampler {
            seed,
            samples: Self::MIN_SAMPLES,
        }
    }

    /// Number of valid sample points required; clamped to at least 32.
    pub fn with_samples(mut self, samples: usize) -> Sampler {
        self.samples = samples.max(Self::MIN_SAMPLES);
        self
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Decides whether `e` vanishes identically. `Holds` means zero.
    pub fn is_zero(&self, e: &Expr) -> Verdict {
        self.is_zero_poly(&e.to_poly())
    }

    pub(crate) fn is_zero_poly(&self, p: &Poly) -> Verdict {
        match exact_decision(p) {
            Some(true) => Verdict::EXACT_TRUE,
            Some(false) => Verdict::EXACT_FALSE,
            None => self.sample(p),
        }
    }

    fn sample(&self, p: &Poly) -> Verdict {
        let mut vars = BTreeSet::new();
        let mut names = BTreeSet::new();
        p.collect_symbols(&mut vars, &mut names);
        let width = vars.last().map_or(0, |v| v + 1);
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let mut point = vec![0.0; width];
        let mut params = BTreeMap::new();
        let mut valid = 0;
        for _ in 0..self.samples * Self::MAX_ATTEMPTS_PER_SAMPLE {
            for &v in &vars {
                point[v] = random_rational(&mut rng);
            }
            for name in &names {
                params.insert(name.clone(), random_rational(&mut rng));
            }
            let (value, magnitude) = p.eval(&point, &params);
            if !value.is_finite() || !magnitude.is_finite() {
                continue;
            }
            if value.abs() > Self::RELATIVE_TOLERANCE * magnitude.max(1.0) {
                return Verdict::EXACT_FALSE;
            }
            valid += 1;
            if valid >= self.samples {
                return Verdict::Holds(Certainty::Probable);
            }
        }
        Verdict::Indeterminate
    }
}

fn random_rational(rng: &mut ChaCha8Rng) -> f64 {
    let n: i32 = rng.random_range(-20..=20);
    let d: i32 = rng.random_range(1..=9);
    n as f64 / d as f64
}

/// `Some(true)` for an exact zero, `Some(false)` for an exact nonzero and
/// `None` when only sampling can tell.
pub(crate) fn exact_decision(p: &Poly) -> Option<bool> {
    if p.is_zero() {
        return Some(true);
    }
    if p.as_constant().is_some() {
        return Some(false);
    }
    let (num, den) = p.to_fraction();
    if den.is_zero() {
        return None;
    }
    if num.is_zero() {
        return Some(true);
    }
    if !num.has_calls() {
        return Some(false);
    }
    None
}

/// True only when `e` is provably zero without sampling.
pub fn is_exact_zero(e: &Expr) -> bool {
    exact_decision(&e.to_poly()) == Some(true)
}
