//! Behavior alphabets, profiles, observations and hypothesis sets.
//!
//! A [`BehaviorProfile`] is a probability distribution over a finite
//! [`BehaviorAlphabet`]; an [`Observation`] is a vector of event counts over
//! the same alphabet. Every value is immutable once constructed, and every
//! constructor enforces the invariants of its type.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use crate::error::{Result, TrustError};

/// Tolerance on `|Σp − 1|` for every probability vector in the crate.
pub const PROB_SUM_TOLERANCE: f64 = 1e-9;

#[derive(Debug)]
struct AlphabetInner {
    symbols: Vec<String>,
    index: HashMap<String, usize>,
}

/// Finite, ordered set of observable behaviors.
///
/// Cloning is cheap; clones share storage. Two alphabets compare equal when
/// they list the same symbols in the same order.
#[derive(Clone)]
pub struct BehaviorAlphabet(Arc<AlphabetInner>);

impl BehaviorAlphabet {
    pub fn new<I, S>(symbols: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let symbols: Vec<String> = symbols.into_iter().map(Into::into).collect();
        if symbols.is_empty() {
            return Err(TrustError::EmptyAlphabet);
        }
        let mut index = HashMap::with_capacity(symbols.len());
        for (i, s) in symbols.iter().enumerate() {
            if index.insert(s.clone(), i).is_some() {
                return Err(TrustError::DuplicateSymbol(s.clone()));
            }
        }
        Ok(Self(Arc::new(AlphabetInner { symbols, index })))
    }

    pub fn len(&self) -> usize {
        self.0.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Symbols in declaration order.
    pub fn symbols(&self) -> &[String] {
        &self.0.symbols
    }

    pub fn symbol(&self, index: usize) -> &str {
        &self.0.symbols[index]
    }

    pub fn index_of(&self, symbol: &str) -> Result<usize> {
        self.0
            .index
            .get(symbol)
            .copied()
            .ok_or_else(|| TrustError::UnknownSymbol(symbol.to_string()))
    }

    pub fn contains(&self, symbol: &str) -> bool {
        self.0.index.contains_key(symbol)
    }

    pub(crate) fn ensure_same(&self, other: &BehaviorAlphabet) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(TrustError::AlphabetMismatch)
        }
    }
}

impl PartialEq for BehaviorAlphabet {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || self.0.symbols == other.0.symbols
    }
}

impl Eq for BehaviorAlphabet {}

impl fmt::Debug for BehaviorAlphabet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.0.symbols.iter()).finish()
    }
}

/// A probability distribution over a behavior alphabet.
#[derive(Clone, Debug, PartialEq)]
pub struct BehaviorProfile {
    alphabet: BehaviorAlphabet,
    probs: Vec<f64>,
}

impl BehaviorProfile {
    /// Builds a profile from probabilities listed in alphabet order.
    pub fn new(alphabet: BehaviorAlphabet, probs: Vec<f64>) -> Result<Self> {
        if probs.len() != alphabet.len() {
            let missing = alphabet
                .symbols()
                .get(probs.len())
                .cloned()
                .unwrap_or_default();
            return if probs.len() < alphabet.len() {
                Err(TrustError::MissingSymbol(missing))
            } else {
                Err(TrustError::AlphabetMismatch)
            };
        }
        for (symbol, &p) in alphabet.symbols().iter().zip(&probs) {
            if !(0.0..=1.0).contains(&p) {
                return Err(TrustError::OutOfRange {
                    symbol: symbol.clone(),
                    value: p,
                });
            }
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > PROB_SUM_TOLERANCE {
            return Err(TrustError::NonUnitSum {
                sum,
                tolerance: PROB_SUM_TOLERANCE,
            });
        }
        Ok(Self { alphabet, probs })
    }

    pub fn alphabet(&self) -> &BehaviorAlphabet {
        &self.alphabet
    }

    /// Probabilities in alphabet order.
    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn prob(&self, symbol: &str) -> Result<f64> {
        Ok(self.probs[self.alphabet.index_of(symbol)?])
    }

    pub fn prob_at(&self, index: usize) -> f64 {
        self.probs[index]
    }

    /// `(symbol, probability)` pairs in declaration order.
    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> + '_ {
        self.alphabet
            .symbols()
            .iter()
            .map(String::as_str)
            .zip(self.probs.iter().copied())
    }
}

/// Checks a raw `symbol → probability` mapping against an alphabet.
pub fn validate_profile<'a, I>(raw: I, alphabet: &BehaviorAlphabet) -> Result<BehaviorProfile>
where
    I: IntoIterator<Item = (&'a str, f64)>,
{
    let mut probs: Vec<Option<f64>> = vec![None; alphabet.len()];
    for (symbol, p) in raw {
        let i = alphabet.index_of(symbol)?;
        if probs[i].replace(p).is_some() {
            return Err(TrustError::DuplicateSymbol(symbol.to_string()));
        }
    }
    let probs = probs
        .into_iter()
        .enumerate()
        .map(|(i, p)| p.ok_or_else(|| TrustError::MissingSymbol(alphabet.symbol(i).to_string())))
        .collect::<Result<Vec<_>>>()?;
    BehaviorProfile::new(alphabet.clone(), probs)
}

/// Event counts over an alphabet: the realized statistic.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Observation {
    alphabet: BehaviorAlphabet,
    counts: Vec<u64>,
    total: u64,
}

impl Observation {
    pub fn from_counts(alphabet: BehaviorAlphabet, counts: Vec<u64>) -> Result<Self> {
        if counts.len() != alphabet.len() {
            return Err(TrustError::AlphabetMismatch);
        }
        let total = counts.iter().sum();
        Ok(Self {
            alphabet,
            counts,
            total,
        })
    }

    /// Counts keyed by symbol; symbols not mentioned count zero.
    pub fn from_symbol_counts<'a, I>(alphabet: &BehaviorAlphabet, raw: I) -> Result<Self>
    where
        I: IntoIterator<Item = (&'a str, u64)>,
    {
        let mut counts = vec![0u64; alphabet.len()];
        for (symbol, n) in raw {
            counts[alphabet.index_of(symbol)?] += n;
        }
        Self::from_counts(alphabet.clone(), counts)
    }

    pub fn from_events<'a, I>(alphabet: &BehaviorAlphabet, events: I) -> Result<Self>
    where
        I: IntoIterator<Item = &'a str>,
    {
        Self::from_symbol_counts(alphabet, events.into_iter().map(|e| (e, 1)))
    }

    pub fn from_indices(alphabet: &BehaviorAlphabet, events: &[usize]) -> Self {
        let mut counts = vec![0u64; alphabet.len()];
        for &e in events {
            counts[e] += 1;
        }
        let total = events.len() as u64;
        Self {
            alphabet: alphabet.clone(),
            counts,
            total,
        }
    }

    /// The indicator statistic of one observed event.
    pub fn single(alphabet: &BehaviorAlphabet, symbol: &str) -> Result<Self> {
        Self::from_events(alphabet, [symbol])
    }

    pub fn empty(alphabet: &BehaviorAlphabet) -> Self {
        Self {
            alphabet: alphabet.clone(),
            counts: vec![0; alphabet.len()],
            total: 0,
        }
    }

    pub fn alphabet(&self) -> &BehaviorAlphabet {
        &self.alphabet
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn count(&self, symbol: &str) -> Result<u64> {
        Ok(self.counts[self.alphabet.index_of(symbol)?])
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    /// Count-wise sum of two observations over the same alphabet.
    pub fn merge(&self, other: &Observation) -> Result<Observation> {
        self.alphabet.ensure_same(&other.alphabet)?;
        let counts = self
            .counts
            .iter()
            .zip(&other.counts)
            .map(|(a, b)| a + b)
            .collect();
        Self::from_counts(self.alphabet.clone(), counts)
    }
}

/// Frequency distribution of an observation.
pub fn empirical_profile(obs: &Observation) -> Result<BehaviorProfile> {
    if obs.total == 0 {
        return Err(TrustError::EmptyObservation);
    }
    let total = obs.total as f64;
    let probs = obs.counts.iter().map(|&c| c as f64 / total).collect();
    BehaviorProfile::new(obs.alphabet.clone(), probs)
}

/// `Σ counts[b]·log2(probs[b])`, with `0·log 0 = 0`.
///
/// Returns `-∞` when an observed symbol has probability zero.
pub fn log_likelihood(profile: &BehaviorProfile, obs: &Observation) -> Result<f64> {
    profile.alphabet.ensure_same(&obs.alphabet)?;
    let mut acc = 0.0;
    for (&n, &p) in obs.counts.iter().zip(&profile.probs) {
        if n == 0 {
            continue;
        }
        if p == 0.0 {
            return Ok(f64::NEG_INFINITY);
        }
        acc += n as f64 * p.log2();
    }
    Ok(acc)
}

/// One trust hypothesis: a labeled profile with an optional prior weight.
#[derive(Clone, Debug, PartialEq)]
pub struct Hypothesis {
    pub id: String,
    pub profile: BehaviorProfile,
    pub prior: Option<f64>,
}

impl Hypothesis {
    pub fn new(id: impl Into<String>, profile: BehaviorProfile) -> Self {
        Self {
            id: id.into(),
            profile,
            prior: None,
        }
    }

    pub fn with_prior(mut self, prior: f64) -> Self {
        self.prior = Some(prior);
        self
    }
}

/// Indexed hypotheses over a shared alphabet.
#[derive(Clone, Debug, PartialEq)]
pub struct HypothesisSet {
    hypotheses: Vec<Hypothesis>,
}

impl HypothesisSet {
    pub fn new(hypotheses: Vec<Hypothesis>) -> Result<Self> {
        let first = hypotheses.first().ok_or(TrustError::EmptyHypothesisSet)?;
        let alphabet = first.profile.alphabet().clone();
        let mut seen = std::collections::HashSet::new();
        let with_prior = hypotheses.iter().filter(|h| h.prior.is_some()).count();
        if with_prior != 0 && with_prior != hypotheses.len() {
            return Err(TrustError::PartialPriors);
        }
        for h in &hypotheses {
            h.profile.alphabet().ensure_same(&alphabet)?;
            if !seen.insert(h.id.as_str()) {
                return Err(TrustError::DuplicateId(h.id.clone()));
            }
            if let Some(p) = h.prior {
                if !(0.0..=1.0).contains(&p) {
                    return Err(TrustError::InvalidPrior {
                        id: h.id.clone(),
                        value: p,
                    });
                }
            }
        }
        if with_prior != 0 {
            let sum: f64 = hypotheses.iter().filter_map(|h| h.prior).sum();
            if (sum - 1.0).abs() > PROB_SUM_TOLERANCE {
                return Err(TrustError::NonUnitSum {
                    sum,
                    tolerance: PROB_SUM_TOLERANCE,
                });
            }
        }
        Ok(Self { hypotheses })
    }

    /// Builds a set from unnormalized nonnegative weights, normalizing them into priors.
    pub fn from_weights(hypotheses: Vec<(Hypothesis, f64)>) -> Result<Self> {
        let total: f64 = hypotheses.iter().map(|(_, w)| *w).sum();
        if !total.is_finite() || total <= 0.0 {
            return Err(TrustError::MissingPriors);
        }
        if let Some((h, w)) = hypotheses.iter().find(|(_, w)| w.is_nan() || *w < 0.0) {
            return Err(TrustError::InvalidPrior {
                id: h.id.clone(),
                value: *w,
            });
        }
        Self::new(
            hypotheses
                .into_iter()
                .map(|(h, w)| h.with_prior(w / total))
                .collect(),
        )
    }

    pub fn alphabet(&self) -> &BehaviorAlphabet {
        self.hypotheses[0].profile.alphabet()
    }

    pub fn hypotheses(&self) -> &[Hypothesis] {
        &self.hypotheses
    }

    pub fn len(&self) -> usize {
        self.hypotheses.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn has_priors(&self) -> bool {
        self.hypotheses[0].prior.is_some()
    }

    pub fn priors(&self) -> Result<Vec<f64>> {
        self.hypotheses
            .iter()
            .map(|h| h.prior.ok_or(TrustError::MissingPriors))
            .collect()
    }

    pub fn get(&self, id: &str) -> Option<&Hypothesis> {
        self.hypotheses.iter().find(|h| h.id == id)
    }

    /// Same hypotheses with new weights; weights must already be normalized.
    pub(crate) fn reweighted(&self, weights: &[f64]) -> Self {
        let hypotheses = self
            .hypotheses
            .iter()
            .zip(weights)
            .map(|(h, &w)| Hypothesis {
                prior: Some(w),
                ..h.clone()
            })
            .collect();
        Self { hypotheses }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn abcd() -> BehaviorAlphabet {
        BehaviorAlphabet::new(["a", "b", "c", "d"]).unwrap()
    }

    #[test]
    fn alphabet_rejects_duplicates_and_empty() {
        assert_eq!(
            BehaviorAlphabet::new(["a", "a"]).unwrap_err(),
            TrustError::DuplicateSymbol("a".into())
        );
        assert_eq!(
            BehaviorAlphabet::new(Vec::<String>::new()).unwrap_err(),
            TrustError::EmptyAlphabet
        );
        let ab = BehaviorAlphabet::new(["x", "y", "z"]).unwrap();
        assert_eq!(ab.symbols(), ["x", "y", "z"]);
        assert_eq!(ab.index_of("z").unwrap(), 2);
    }

    #[test]
    fn validate_trustworthy_table() {
        let p = validate_profile(
            [("a", 0.98), ("b", 0.005), ("c", 0.005), ("d", 0.01)],
            &abcd(),
        )
        .unwrap();
        assert_eq!(p.prob("d").unwrap(), 0.01);
    }

    #[test]
    fn validate_uniform_coin() {
        let coin = BehaviorAlphabet::new(["h", "t"]).unwrap();
        assert!(validate_profile([("h", 0.5), ("t", 0.5)], &coin).is_ok());
    }

    #[test]
    fn validate_errors() {
        let err = validate_profile(
            [("a", 0.98), ("b", 0.005), ("c", 0.005), ("d", 0.02)],
            &abcd(),
        )
        .unwrap_err();
        assert!(matches!(err, TrustError::NonUnitSum { .. }));

        let err = validate_profile([("a", 1.2), ("b", -0.2), ("c", 0.0), ("d", 0.0)], &abcd())
            .unwrap_err();
        assert!(matches!(err, TrustError::OutOfRange { .. }));

        let err = validate_profile([("a", 1.0), ("b", 0.0), ("c", 0.0)], &abcd()).unwrap_err();
        assert_eq!(err, TrustError::MissingSymbol("d".into()));

        let err = validate_profile([("a", 1.0), ("e", 0.0)], &abcd()).unwrap_err();
        assert_eq!(err, TrustError::UnknownSymbol("e".into()));
    }

    #[test]
    fn empirical_from_counts() {
        let obs = Observation::from_counts(abcd(), vec![98, 0, 0, 2]).unwrap();
        assert_eq!(obs.total(), 100);
        let p = empirical_profile(&obs).unwrap();
        assert_eq!(p.probs(), &[0.98, 0.0, 0.0, 0.02]);

        let coin = BehaviorAlphabet::new(["h", "t"]).unwrap();
        let obs = Observation::from_events(&coin, ["h", "t"]).unwrap();
        assert_eq!(empirical_profile(&obs).unwrap().probs(), &[0.5, 0.5]);

        assert_eq!(
            empirical_profile(&Observation::empty(&abcd())).unwrap_err(),
            TrustError::EmptyObservation
        );
    }

    #[test]
    fn log_likelihood_examples() {
        let coin = BehaviorAlphabet::new(["h", "t"]).unwrap();
        let fair = BehaviorProfile::new(coin.clone(), vec![0.5, 0.5]).unwrap();
        let heads = Observation::single(&coin, "h").unwrap();
        assert_eq!(log_likelihood(&fair, &heads).unwrap(), -1.0);

        let ab = BehaviorAlphabet::new(["a", "b"]).unwrap();
        let point = BehaviorProfile::new(ab.clone(), vec![1.0, 0.0]).unwrap();
        let b = Observation::single(&ab, "b").unwrap();
        assert_eq!(log_likelihood(&point, &b).unwrap(), f64::NEG_INFINITY);

        assert_eq!(
            log_likelihood(&point, &Observation::empty(&ab)).unwrap(),
            0.0
        );
        assert_eq!(
            log_likelihood(&fair, &b).unwrap_err(),
            TrustError::AlphabetMismatch
        );
    }

    #[test]
    fn log_likelihood_of_hundred_a() {
        let p0 = BehaviorProfile::new(abcd(), vec![0.98, 0.005, 0.005, 0.01]).unwrap();
        let obs = Observation::from_counts(abcd(), vec![100, 0, 0, 0]).unwrap();
        let ll = log_likelihood(&p0, &obs).unwrap();
        // cross-check: one event at a time
        let single = Observation::single(&abcd(), "a").unwrap();
        let step = log_likelihood(&p0, &single).unwrap();
        let accumulated: f64 = (0..100).map(|_| step).sum();
        assert!((ll - accumulated).abs() < 1e-12);
        assert!((ll - -2.914_634_9).abs() < 1e-6, "{ll}");
    }

    #[test]
    fn hypothesis_set_invariants() {
        let p = BehaviorProfile::new(abcd(), vec![0.25; 4]).unwrap();
        let h = |id: &str, prior: Option<f64>| Hypothesis {
            id: id.into(),
            profile: p.clone(),
            prior,
        };
        assert!(HypothesisSet::new(vec![h("0", Some(0.5)), h("1", Some(0.5))]).is_ok());
        assert!(HypothesisSet::new(vec![h("0", None), h("1", None)]).is_ok());
        assert_eq!(
            HypothesisSet::new(vec![h("0", Some(0.5)), h("1", None)]).unwrap_err(),
            TrustError::PartialPriors
        );
        assert_eq!(
            HypothesisSet::new(vec![h("0", None), h("0", None)]).unwrap_err(),
            TrustError::DuplicateId("0".into())
        );
        assert!(matches!(
            HypothesisSet::new(vec![h("0", Some(0.5)), h("1", Some(0.6))]).unwrap_err(),
            TrustError::NonUnitSum { .. }
        ));
        assert_eq!(
            HypothesisSet::new(vec![]).unwrap_err(),
            TrustError::EmptyHypothesisSet
        );
        let other = BehaviorProfile::new(BehaviorAlphabet::new(["x"]).unwrap(), vec![1.0]).unwrap();
        assert_eq!(
            HypothesisSet::new(vec![h("0", None), Hypothesis::new("1", other)]).unwrap_err(),
            TrustError::AlphabetMismatch
        );
    }
}
