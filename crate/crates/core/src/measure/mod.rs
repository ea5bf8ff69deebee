//! Probability measures on infinite sequences over a finite alphabet.
//!
//! A measure is represented by its one-step conditional laws: for every
//! finite history it yields a distribution over the next symbol. That is
//! enough to price every cylinder `[x]`, which is all the protocol needs.
//! Every family enforces strict positivity of one-step probabilities at
//! construction time, so conditionals and likelihood ratios are always
//! defined.

mod counts;
mod learner;
mod markov;
mod mixture;

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub use counts::CountModel;
pub use learner::BetaLearner;
pub use markov::Markov;
pub use mixture::Mixture;

pub type Symbol = usize;

/// Finite observation space `{0, .., size-1}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Alphabet(usize);

impl Alphabet {
    pub fn new(size: usize) -> Result<Self> {
        if size == 0 {
            return Err(Error::DomainError("alphabet must have at least one symbol".into()));
        }
        Ok(Self(size))
    }

    pub const fn binary() -> Self {
        Self(2)
    }

    pub fn size(self) -> usize {
        self.0
    }

    pub fn symbols(self) -> std::ops::Range<Symbol> {
        0..self.0
    }

    pub fn check(self, word: &[Symbol]) -> Result<()> {
        match word.iter().find(|&&y| y >= self.0) {
            Some(y) => Err(Error::DomainError(format!(
                "symbol {y} outside alphabet of size {}",
                self.0
            ))),
            None => Ok(()),
        }
    }

    /// `size^len`, or `None` on overflow.
    pub fn count_words(self, len: usize) -> Option<u128> {
        let len = u32::try_from(len).ok()?;
        (self.0 as u128).checked_pow(len)
    }
}

/// Validates a one-step distribution and renormalizes it exactly.
pub(crate) fn validate_distribution<T: Scalar>(probs: &[T], what: &str) -> Result<Vec<T>> {
    if probs.is_empty() {
        return Err(Error::InvalidDistribution(format!("{what}: empty distribution")));
    }
    if let Some((i, p)) = probs.iter().enumerate().find(|(_, p)| !p.is_finite()) {
        return Err(Error::InvalidDistribution(format!("{what}: entry {i} is {p}")));
    }
    if let Some((i, p)) = probs.iter().enumerate().find(|(_, p)| **p <= T::zero()) {
        return Err(Error::CromwellViolation(format!(
            "{what}: entry {i} has probability {p}"
        )));
    }
    let total: T = probs.iter().copied().sum();
    if (total - T::one()).abs() > T::normalization_tol() {
        return Err(Error::InvalidDistribution(format!("{what}: sums to {total}")));
    }
    Ok(probs.iter().map(|&p| p / total).collect())
}

/// Raises every entry to at least `floor` and renormalizes.
///
/// Used to smooth user-supplied tables that contain zeros.
pub fn apply_floor<T: Scalar>(probs: &[T], floor: T) -> Vec<T> {
    let raised: Vec<T> = probs.iter().map(|&p| p.max(floor)).collect();
    let total: T = raised.iter().copied().sum();
    raised.into_iter().map(|p| p / total).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Iid<T> {
    probs: Arc<[T]>,
}

impl<T: Scalar> Iid<T> {
    pub fn probs(&self) -> &[T] {
        &self.probs
    }
}

/// A measure on `Y^∞` conditioned on a fixed finite prefix.
#[derive(Debug, Clone, PartialEq)]
pub struct Conditioned<T> {
    base: Arc<Measure<T>>,
    prefix: Vec<Symbol>,
}

impl<T: Scalar> Conditioned<T> {
    pub fn base(&self) -> &Measure<T> {
        &self.base
    }

    pub fn prefix(&self) -> &[Symbol] {
        &self.prefix
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Measure<T> {
    Iid(Iid<T>),
    Markov(Markov<T>),
    Learner(BetaLearner<T>),
    Mixture(Mixture<T>),
    Conditioned(Conditioned<T>),
}

impl<T: Scalar> Measure<T> {
    pub fn iid(probs: Vec<T>) -> Result<Self> {
        let probs = validate_distribution(&probs, "iid law")?;
        Ok(Measure::Iid(Iid { probs: probs.into() }))
    }

    /// Binary i.i.d. measure with `P(1) = p_one`.
    pub fn bernoulli(p_one: T) -> Result<Self> {
        Self::iid(vec![T::one() - p_one, p_one])
    }

    pub fn uniform(alphabet: Alphabet) -> Result<Self> {
        let a = alphabet.size();
        Self::iid(vec![T::one() / T::from_count(a); a])
    }

    /// Order-`k` Markov chain. `transitions` has one row per context of the
    /// last `k` symbols (oldest symbol most significant, base `A`), and
    /// `initial` is the joint law of the first `k` symbols in the same
    /// indexing.
    pub fn markov(order: usize, transitions: Vec<Vec<T>>, initial: Vec<T>) -> Result<Self> {
        Markov::new(order, transitions, initial).map(Measure::Markov)
    }

    /// Dirichlet-categorical sequential learner (a Beta learner on binary
    /// alphabets) with the given prior pseudo-counts.
    pub fn beta_learner(pseudo_counts: Vec<T>) -> Result<Self> {
        BetaLearner::new(pseudo_counts).map(Measure::Learner)
    }

    pub fn mixture(weights: Vec<T>, components: Vec<Measure<T>>) -> Result<Self> {
        Mixture::new(weights, components).map(Measure::Mixture)
    }

    pub fn alphabet(&self) -> Alphabet {
        Alphabet(self.alphabet_size())
    }

    pub fn alphabet_size(&self) -> usize {
        match self {
            Measure::Iid(m) => m.probs.len(),
            Measure::Markov(m) => m.alphabet_size(),
            Measure::Learner(m) => m.alphabet_size(),
            Measure::Mixture(m) => m.alphabet_size(),
            Measure::Conditioned(m) => m.base.alphabet_size(),
        }
    }

    /// Distribution of the next symbol after `history`.
    pub fn one_step(&self, history: &[Symbol]) -> Result<Vec<T>> {
        self.alphabet().check(history)?;
        Ok(self.one_step_unchecked(history))
    }

    pub(crate) fn one_step_unchecked(&self, history: &[Symbol]) -> Vec<T> {
        match self {
            Measure::Iid(m) => m.probs.to_vec(),
            Measure::Markov(m) => m.one_step(history),
            Measure::Learner(m) => m.one_step(history),
            Measure::Mixture(m) => m.one_step(history),
            Measure::Conditioned(m) => {
                let mut full = m.prefix.clone();
                full.extend_from_slice(history);
                m.base.one_step_unchecked(&full)
            }
        }
    }

    /// `ln P([x])`; zero for the empty string.
    pub fn cylinder_log_prob(&self, x: &[Symbol]) -> Result<T> {
        self.alphabet().check(x)?;
        Ok(self.log_prob_unchecked(x))
    }

    pub(crate) fn log_prob_unchecked(&self, x: &[Symbol]) -> T {
        match self {
            Measure::Iid(m) => x.iter().map(|&y| m.probs[y].ln()).sum(),
            Measure::Markov(m) => m.log_prob(x),
            Measure::Learner(m) => m.log_prob(x),
            Measure::Mixture(m) => m.log_prob(x),
            Measure::Conditioned(m) => {
                let mut full = m.prefix.clone();
                full.extend_from_slice(x);
                m.base.log_prob_unchecked(&full) - m.base.log_prob_unchecked(&m.prefix)
            }
        }
    }

    pub fn cylinder_prob(&self, x: &[Symbol]) -> Result<T> {
        self.cylinder_log_prob(x).map(T::exp)
    }

    /// The conditional measure given that the sequence starts with `prefix`,
    /// re-indexed to describe the continuation.
    pub fn condition_on(&self, prefix: &[Symbol]) -> Result<Self> {
        self.alphabet().check(prefix)?;
        let out = self.condition_unchecked(prefix);
        if prefix.is_empty() {
            return Ok(out);
        }
        let lp = self.log_prob_unchecked(prefix);
        if !lp.is_finite() {
            return Err(Error::CromwellViolation(format!(
                "prefix {prefix:?} has probability zero"
            )));
        }
        Ok(out)
    }

    pub(crate) fn condition_unchecked(&self, prefix: &[Symbol]) -> Self {
        if prefix.is_empty() {
            return self.clone();
        }
        match self {
            Measure::Iid(_) => self.clone(),
            Measure::Markov(m) => m.condition_on(prefix),
            Measure::Learner(m) => Measure::Learner(m.condition_on(prefix)),
            Measure::Mixture(m) => Measure::Mixture(m.condition_on(prefix)),
            Measure::Conditioned(m) => {
                let mut full = m.prefix.clone();
                full.extend_from_slice(prefix);
                m.base.condition_unchecked(&full)
            }
        }
    }

    pub(crate) fn generic_conditioned(base: &Measure<T>, prefix: &[Symbol]) -> Self {
        Measure::Conditioned(Conditioned {
            base: Arc::new(base.clone()),
            prefix: prefix.to_vec(),
        })
    }

    /// Number of trailing symbols the one-step law depends on, once the
    /// history is at least that long. `None` for measures with unbounded
    /// memory (learners, mixtures).
    pub fn memory_order(&self) -> Option<usize> {
        match self {
            Measure::Iid(_) => Some(0),
            Measure::Markov(m) => Some(m.order()),
            Measure::Learner(_) | Measure::Mixture(_) => None,
            Measure::Conditioned(m) => m.base.memory_order(),
        }
    }

    /// Whether the probability of a string depends only on its symbol counts.
    pub fn is_exchangeable(&self) -> bool {
        match self {
            Measure::Iid(_) | Measure::Learner(_) => true,
            Measure::Markov(m) => m.order() == 0,
            Measure::Mixture(m) => m.components().iter().all(Measure::is_exchangeable),
            Measure::Conditioned(m) => m.base.is_exchangeable(),
        }
    }

    /// Count-indexed log-probabilities for strings of length up to `max_len`.
    pub fn count_model(&self, max_len: usize) -> Option<CountModel<T>> {
        CountModel::build(self, max_len)
    }

    /// Draws `steps` observations from the measure.
    pub fn sample_path(&self, seed: u64, steps: usize) -> Vec<Symbol> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut current = self.clone();
        let mut path = Vec::with_capacity(steps);
        for _ in 0..steps {
            let dist = current.one_step_unchecked(&[]);
            let y = draw(&dist, &mut rng);
            path.push(y);
            current = current.condition_unchecked(&[y]);
        }
        path
    }
}

/// Inverse-CDF draw from a one-step distribution.
pub fn draw<T: Scalar, R: Rng + ?Sized>(dist: &[T], rng: &mut R) -> Symbol {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    for (y, p) in dist.iter().enumerate() {
        acc += p.to_f64().unwrap_or(0.0);
        if u < acc {
            return y;
        }
    }
    dist.len() - 1
}
