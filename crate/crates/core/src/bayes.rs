//! Bayesian updating over a finite set of trust hypotheses.
//!
//! Posteriors are accumulated in log2 space and normalized once at the end,
//! so long event streams do not underflow. Hypotheses that cannot explain the
//! data keep their slot with weight exactly zero.

use serde::{Deserialize, Serialize};

use crate::error::{Result, TrustError};
use crate::model::{BehaviorProfile, Hypothesis, HypothesisSet, Observation, PROB_SUM_TOLERANCE};

/// Hypothesis set re-weighted by the evidence.
#[derive(Clone, Debug, PartialEq)]
pub struct Posterior {
    /// Same hypotheses, `prior` replaced by the posterior weight.
    pub hset: HypothesisSet,
    /// log2 of the prior-predictive probability of the conditioning data.
    pub log2_evidence: f64,
}

impl Posterior {
    pub fn weights(&self) -> Vec<f64> {
        self.hset
            .hypotheses()
            .iter()
            .map(|h| h.prior.unwrap_or(0.0))
            .collect()
    }

    pub fn weight(&self, id: &str) -> Option<f64> {
        self.hset.get(id).and_then(|h| h.prior)
    }

    /// Prior-predictive probability of the data; underflows to 0 for long streams.
    pub fn evidence(&self) -> f64 {
        self.log2_evidence.exp2()
    }
}

/// Normalizes log2 scores (`-∞` allowed) into weights.
fn normalize(hset: &HypothesisSet, scores: &[f64]) -> Result<Posterior> {
    let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return Err(TrustError::ZeroEvidence);
    }
    let scaled: Vec<f64> = scores.iter().map(|&s| (s - max).exp2()).collect();
    let total: f64 = scaled.iter().sum();
    let weights: Vec<f64> = scaled.iter().map(|w| w / total).collect();
    debug_assert!((weights.iter().sum::<f64>() - 1.0).abs() <= PROB_SUM_TOLERANCE);
    Ok(Posterior {
        hset: hset.reweighted(&weights),
        log2_evidence: max + total.log2(),
    })
}

fn log_priors(hset: &HypothesisSet) -> Result<Vec<f64>> {
    Ok(hset.priors()?.into_iter().map(f64::log2).collect())
}

/// Posterior after observing the single event `x`.
pub fn posterior(hset: &HypothesisSet, x: &str) -> Result<Posterior> {
    let i = hset.alphabet().index_of(x)?;
    let scores: Vec<f64> = log_priors(hset)?
        .into_iter()
        .zip(hset.hypotheses())
        .map(|(lp, h)| lp + h.profile.prob_at(i).log2())
        .collect();
    normalize(hset, &scores)
}

/// Posterior after a stream of events, folded one event at a time.
pub fn sequential_update<'a, I>(hset: &HypothesisSet, stream: I) -> Result<Posterior>
where
    I: IntoIterator<Item = &'a str>,
{
    let alphabet = hset.alphabet();
    let log_tables: Vec<Vec<f64>> = hset
        .hypotheses()
        .iter()
        .map(|h| h.profile.probs().iter().map(|p| p.log2()).collect())
        .collect();
    let mut scores = log_priors(hset)?;
    for event in stream {
        let i = alphabet.index_of(event)?;
        for (score, table) in scores.iter_mut().zip(&log_tables) {
            *score += table[i];
        }
    }
    normalize(hset, &scores)
}

/// Posterior from aggregated counts.
pub fn batch_posterior(hset: &HypothesisSet, obs: &Observation) -> Result<Posterior> {
    let scores = log_priors(hset)?
        .into_iter()
        .zip(hset.hypotheses())
        .map(|(lp, h)| Ok(lp + crate::model::log_likelihood(&h.profile, obs)?))
        .collect::<Result<Vec<_>>>()?;
    normalize(hset, &scores)
}

/// Hypothesis of maximal posterior weight; the first one wins ties.
pub fn map_hypothesis(posterior: &Posterior) -> &Hypothesis {
    let hs = posterior.hset.hypotheses();
    let mut best = &hs[0];
    for h in &hs[1..] {
        if h.prior.unwrap_or(0.0) > best.prior.unwrap_or(0.0) {
            best = h;
        }
    }
    best
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightEntry {
    pub id: String,
    pub weight: f64,
}

/// JSON report of a posterior: weights in declaration order and the MAP id.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PosteriorReport {
    pub weights: Vec<WeightEntry>,
    pub map: String,
    #[serde(with = "crate::serde_ext::ext_real")]
    pub log2_evidence: f64,
}

impl PosteriorReport {
    pub fn new(posterior: &Posterior) -> Self {
        Self {
            weights: posterior
                .hset
                .hypotheses()
                .iter()
                .map(|h| WeightEntry {
                    id: h.id.clone(),
                    weight: h.prior.unwrap_or(0.0),
                })
                .collect(),
            map: map_hypothesis(posterior).id.clone(),
            log2_evidence: posterior.log2_evidence,
        }
    }
}

/// Prior-predictive mixture `Σ_ψ Pr_ψ · Pr(ψ)`.
pub fn predictive(hset: &HypothesisSet) -> Result<BehaviorProfile> {
    let priors = hset.priors()?;
    let mut mix = vec![0.0; hset.alphabet().len()];
    for (h, w) in hset.hypotheses().iter().zip(priors) {
        for (m, p) in mix.iter_mut().zip(h.profile.probs()) {
            *m += w * p;
        }
    }
    BehaviorProfile::new(hset.alphabet().clone(), mix)
}
