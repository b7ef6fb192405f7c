//! On-disk formats.
//!
//! Profile:
//! ```json
//! {"alphabet": ["a", "b"], "probs": {"a": 0.9, "b": 0.1}}
//! ```
//! Hypothesis set (priors optional, all or none):
//! ```json
//! {"alphabet": ["a", "b"],
//!  "hypotheses": [{"id": "theta0", "prior": 0.5, "probs": {"a": 0.9, "b": 0.1}}]}
//! ```
//! Observations are either newline-delimited symbol labels, one event per
//! line (blank lines and `#` comments skipped), or a JSON counts object
//! `{"a": 98, "d": 2}`. Unknown symbols are rejected everywhere.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Result, TrustError};
use crate::harness::CyclicRejection;
use crate::model::{
    validate_profile, BehaviorAlphabet, BehaviorProfile, Hypothesis, HypothesisSet, Observation,
};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileFile {
    pub alphabet: Vec<String>,
    pub probs: BTreeMap<String, f64>,
}

impl ProfileFile {
    pub fn from_profile(profile: &BehaviorProfile) -> Self {
        Self {
            alphabet: profile.alphabet().symbols().to_vec(),
            probs: profile.iter().map(|(s, p)| (s.to_string(), p)).collect(),
        }
    }

    pub fn into_profile(self) -> Result<BehaviorProfile> {
        let alphabet = BehaviorAlphabet::new(self.alphabet)?;
        validate_profile(self.probs.iter().map(|(s, &p)| (s.as_str(), p)), &alphabet)
    }
}

fn parse_err(e: serde_json::Error) -> TrustError {
    TrustError::Parse(e.to_string())
}

pub fn parse_profile(json: &str) -> Result<BehaviorProfile> {
    serde_json::from_str::<ProfileFile>(json)
        .map_err(parse_err)?
        .into_profile()
}

pub fn profile_to_json(profile: &BehaviorProfile) -> String {
    serde_json::to_string_pretty(&ProfileFile::from_profile(profile)).expect("profile serializes")
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HypothesisEntry {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prior: Option<f64>,
    pub probs: BTreeMap<String, f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HypothesisSetFile {
    pub alphabet: Vec<String>,
    pub hypotheses: Vec<HypothesisEntry>,
}

impl HypothesisSetFile {
    pub fn from_set(hset: &HypothesisSet) -> Self {
        Self {
            alphabet: hset.alphabet().symbols().to_vec(),
            hypotheses: hset
                .hypotheses()
                .iter()
                .map(|h| HypothesisEntry {
                    id: h.id.clone(),
                    prior: h.prior,
                    probs: h.profile.iter().map(|(s, p)| (s.to_string(), p)).collect(),
                })
                .collect(),
        }
    }

    pub fn into_set(self) -> Result<HypothesisSet> {
        let alphabet = BehaviorAlphabet::new(self.alphabet)?;
        let hypotheses = self
            .hypotheses
            .into_iter()
            .map(|entry| {
                let profile =
                    validate_profile(entry.probs.iter().map(|(s, &p)| (s.as_str(), p)), &alphabet)?;
                Ok(Hypothesis {
                    id: entry.id,
                    profile,
                    prior: entry.prior,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        HypothesisSet::new(hypotheses)
    }
}

pub fn parse_hypothesis_set(json: &str) -> Result<HypothesisSet> {
    serde_json::from_str::<HypothesisSetFile>(json)
        .map_err(parse_err)?
        .into_set()
}

pub fn hypothesis_set_to_json(hset: &HypothesisSet) -> String {
    serde_json::to_string_pretty(&HypothesisSetFile::from_set(hset)).expect("set serializes")
}

/// Regression fixture for a cyclic rejection pattern: a hypothesis set plus
/// the event and level at which the pattern appears.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CyclicRejectionFile {
    pub alpha: f64,
    pub event: String,
    /// Search parameters that produced the fixture, when known.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub search_seed: Option<u64>,
    #[serde(flatten)]
    pub set: HypothesisSetFile,
}

impl CyclicRejectionFile {
    pub fn from_cycle(cycle: &CyclicRejection, search_seed: Option<u64>) -> Self {
        Self {
            alpha: cycle.alpha,
            event: cycle.event.clone(),
            search_seed,
            set: HypothesisSetFile::from_set(&cycle.hset),
        }
    }

    pub fn into_cycle(self) -> Result<CyclicRejection> {
        let hset = self.set.into_set()?;
        hset.alphabet().index_of(&self.event)?;
        Ok(CyclicRejection {
            hset,
            event: self.event,
            alpha: self.alpha,
        })
    }
}

pub fn parse_cyclic_rejection(json: &str) -> Result<CyclicRejection> {
    serde_json::from_str::<CyclicRejectionFile>(json)
        .map_err(parse_err)?
        .into_cycle()
}

/// Parsed observation file. `events` keeps the order when the input was a stream.
#[derive(Clone, Debug, PartialEq)]
pub struct ParsedObservation {
    pub events: Option<Vec<usize>>,
    pub observation: Observation,
}

/// Newline-delimited event labels.
pub fn parse_event_stream(text: &str, alphabet: &BehaviorAlphabet) -> Result<Vec<usize>> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(|l| alphabet.index_of(l))
        .collect()
}

pub fn parse_counts(json: &str, alphabet: &BehaviorAlphabet) -> Result<Observation> {
    let raw: BTreeMap<String, u64> = serde_json::from_str(json).map_err(parse_err)?;
    Observation::from_symbol_counts(alphabet, raw.iter().map(|(s, &n)| (s.as_str(), n)))
}

/// Accepts either observation format, telling them apart by a leading `{`.
pub fn parse_observation(text: &str, alphabet: &BehaviorAlphabet) -> Result<ParsedObservation> {
    if text.trim_start().starts_with('{') {
        Ok(ParsedObservation {
            events: None,
            observation: parse_counts(text, alphabet)?,
        })
    } else {
        let events = parse_event_stream(text, alphabet)?;
        Ok(ParsedObservation {
            observation: Observation::from_indices(alphabet, &events),
            events: Some(events),
        })
    }
}

pub fn events_to_stream(alphabet: &BehaviorAlphabet, events: &[usize]) -> String {
    let mut out = String::with_capacity(events.len() * 2);
    for &e in events {
        out.push_str(alphabet.symbol(e));
        out.push('\n');
    }
    out
}
