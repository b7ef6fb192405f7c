//! Fisher significance tests and Neyman-Pearson likelihood-ratio tests for a
//! single observed event.
//!
//! Conventions:
//! - rejection comparisons are strict: `Pr_0(x) < α`, `p < α`, `L(x) > η`;
//! - p-values count every event *at least as unlikely* as the observed one
//!   (ties included);
//! - the Neyman-Pearson test is deterministic by default, with size at most
//!   `α`. The randomized variant rejects on the boundary level `L = η` with
//!   probability `γ` so the size is exactly `α`.
//!
//! On the four-event trustworthy profile `{a: .98, b: .005, c: .005, d: .01}`
//! the p-values are `1, .01, .01, .02`. The values `.1` and `.2` sometimes
//! quoted for this example do not follow from the definition; either way no
//! event is significant at `α = .01`.

use serde::{Deserialize, Serialize};

use crate::error::{Result, TrustError};
use crate::model::{BehaviorAlphabet, BehaviorProfile, HypothesisSet};
use crate::rng;
use crate::serde_ext::{ext_real, opt_ext_real};

/// Relative tolerance used to group likelihood ratios into level sets.
pub const LEVEL_TOLERANCE: f64 = 1e-12;

/// Slack allowed when comparing an accumulated size against `α`.
pub const SIZE_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Retain,
    Reject,
}

/// Outcome of a test on one observation.
///
/// `rejection_probability` is 0 or 1 for deterministic tests. On the
/// randomized boundary it is `γ`, and `verdict` records the seeded draw.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Decision {
    pub verdict: Verdict,
    pub rejection_probability: f64,
}

impl Decision {
    pub fn retain() -> Self {
        Self {
            verdict: Verdict::Retain,
            rejection_probability: 0.0,
        }
    }

    pub fn reject() -> Self {
        Self {
            verdict: Verdict::Reject,
            rejection_probability: 1.0,
        }
    }

    fn deterministic(reject: bool) -> Self {
        if reject {
            Self::reject()
        } else {
            Self::retain()
        }
    }

    pub fn is_reject(&self) -> bool {
        self.verdict == Verdict::Reject
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    Deterministic,
    Randomized,
}

impl Variant {
    pub fn is_randomized(self) -> bool {
        self == Variant::Randomized
    }
}

/// Cutoff of a Neyman-Pearson test.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NpThreshold {
    /// Attained likelihood-ratio value, or `+∞`.
    #[serde(with = "ext_real")]
    pub eta: f64,
    /// Rejection probability on the level set `L = η` (0 for the deterministic variant).
    pub boundary_gamma: f64,
    /// `Pr_0(reject)`, computed exactly by summation.
    pub achieved_alpha: f64,
}

/// Serialized as `{verdict, rejection_probability, statistic, threshold, size, power}`.
///
/// `statistic` is the p-value, the point probability or the likelihood ratio,
/// depending on the test. `power` is absent for tests without an alternative.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TestReport {
    pub verdict: Verdict,
    pub rejection_probability: f64,
    #[serde(with = "ext_real")]
    pub statistic: f64,
    #[serde(with = "ext_real")]
    pub threshold: f64,
    pub size: f64,
    #[serde(with = "opt_ext_real", default)]
    pub power: Option<f64>,
}

impl TestReport {
    pub fn decision(&self) -> Decision {
        Decision {
            verdict: self.verdict,
            rejection_probability: self.rejection_probability,
        }
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(TrustError::AlphaOutOfRange(alpha))
    }
}

/// Rejects when the observed event itself is rarer than `α`.
pub fn point_significance(p0: &BehaviorProfile, x: &str, alpha: f64) -> Result<Decision> {
    let px = p0.prob(x)?;
    check_alpha(alpha)?;
    Ok(Decision::deterministic(px < alpha))
}

/// [`point_significance`] with its size: the null mass of all events rarer than `α`.
pub fn point_report(p0: &BehaviorProfile, x: &str, alpha: f64) -> Result<TestReport> {
    let decision = point_significance(p0, x, alpha)?;
    let size = p0
        .probs()
        .iter()
        .filter(|&&p| p < alpha)
        .fold(0.0, |acc, p| acc + p);
    Ok(TestReport {
        verdict: decision.verdict,
        rejection_probability: decision.rejection_probability,
        statistic: p0.prob(x)?,
        threshold: alpha,
        size,
        power: None,
    })
}

/// p-values of every symbol, in alphabet order.
///
/// Symbols are ranked by probability once; each p-value is the mass of the
/// ranked prefix up to the last symbol tied with the observed one. The mass
/// is accumulated in alphabet order so the result does not depend on sort
/// stability.
pub fn p_values(p0: &BehaviorProfile) -> Vec<f64> {
    let probs = p0.probs();
    let mut ranked: Vec<usize> = (0..probs.len()).collect();
    ranked.sort_by(|&i, &j| probs[i].total_cmp(&probs[j]));
    let mut out = vec![0.0; probs.len()];
    let mut start = 0;
    while start < ranked.len() {
        let level = probs[ranked[start]];
        let end = start + ranked[start..].partition_point(|&i| probs[i] <= level);
        let mut included = vec![false; probs.len()];
        for &i in &ranked[..end] {
            included[i] = true;
        }
        let mass: f64 = probs
            .iter()
            .zip(&included)
            .filter(|(_, &inc)| inc)
            .map(|(p, _)| p)
            .sum();
        for &i in &ranked[start..end] {
            out[i] = mass;
        }
        start = end;
    }
    out
}

/// Null probability of all events at least as unlikely as `x`.
pub fn p_value(p0: &BehaviorProfile, x: &str) -> Result<f64> {
    let i = p0.alphabet().index_of(x)?;
    Ok(p_values(p0)[i])
}

/// Fisher significance test: rejects when `p_value(x) < α`.
pub fn fisher_decide(p0: &BehaviorProfile, x: &str, alpha: f64) -> Result<TestReport> {
    let i = p0.alphabet().index_of(x)?;
    check_alpha(alpha)?;
    let pv = p_values(p0);
    let size = pv
        .iter()
        .zip(p0.probs())
        .filter(|(&v, _)| v < alpha)
        .map(|(_, &p)| p)
        .fold(0.0, |acc, p| acc + p);
    let decision = Decision::deterministic(pv[i] < alpha);
    Ok(TestReport {
        verdict: decision.verdict,
        rejection_probability: decision.rejection_probability,
        statistic: pv[i],
        threshold: alpha,
        size,
        power: None,
    })
}

fn ratio(p0: f64, p1: f64) -> Option<f64> {
    if p0 > 0.0 {
        Some(p1 / p0)
    } else if p1 > 0.0 {
        Some(f64::INFINITY)
    } else {
        None
    }
}

/// `L(x) = Pr_1(x) / Pr_0(x)`, `+∞` when only the alternative allows `x`.
pub fn likelihood_ratio(p0: &BehaviorProfile, p1: &BehaviorProfile, x: &str) -> Result<f64> {
    p0.alphabet().ensure_same(p1.alphabet())?;
    let i = p0.alphabet().index_of(x)?;
    ratio(p0.prob_at(i), p1.prob_at(i)).ok_or_else(|| TrustError::BothZero(x.to_string()))
}

/// Per-symbol rejection probabilities of a test.
#[derive(Clone, Debug, PartialEq)]
pub struct RejectionRule {
    alphabet: BehaviorAlphabet,
    probs: Vec<f64>,
}

impl RejectionRule {
    pub fn new(alphabet: BehaviorAlphabet, probs: Vec<f64>) -> Result<Self> {
        if probs.len() != alphabet.len() {
            return Err(TrustError::AlphabetMismatch);
        }
        for (symbol, &p) in alphabet.symbols().iter().zip(&probs) {
            if !(0.0..=1.0).contains(&p) {
                return Err(TrustError::InvalidRejection {
                    symbol: symbol.clone(),
                    value: p,
                });
            }
        }
        Ok(Self { alphabet, probs })
    }

    /// Deterministic region rejecting exactly the listed symbols.
    pub fn region<'a, I>(alphabet: &BehaviorAlphabet, symbols: I) -> Result<Self>
    where
        I: IntoIterator<Item = &'a str>,
    {
        let mut probs = vec![0.0; alphabet.len()];
        for s in symbols {
            probs[alphabet.index_of(s)?] = 1.0;
        }
        Self::new(alphabet.clone(), probs)
    }

    /// Rejection probabilities keyed by symbol; unlisted symbols are retained.
    pub fn from_map<'a, I>(alphabet: &BehaviorAlphabet, map: I) -> Result<Self>
    where
        I: IntoIterator<Item = (&'a str, f64)>,
    {
        let mut probs = vec![0.0; alphabet.len()];
        for (s, p) in map {
            probs[alphabet.index_of(s)?] = p;
        }
        Self::new(alphabet.clone(), probs)
    }

    pub fn alphabet(&self) -> &BehaviorAlphabet {
        &self.alphabet
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Symbols rejected with probability 1.
    pub fn certain_rejections(&self) -> Vec<&str> {
        self.alphabet
            .symbols()
            .iter()
            .zip(&self.probs)
            .filter(|(_, &p)| p == 1.0)
            .map(|(s, _)| s.as_str())
            .collect()
    }
}

/// `(size, power)` of a rejection rule: its rejection mass under each hypothesis.
pub fn test_size_and_power(
    p0: &BehaviorProfile,
    p1: &BehaviorProfile,
    rejection: &RejectionRule,
) -> Result<(f64, f64)> {
    p0.alphabet().ensure_same(p1.alphabet())?;
    p0.alphabet().ensure_same(&rejection.alphabet)?;
    let mass = |p: &BehaviorProfile| -> f64 {
        rejection
            .probs
            .iter()
            .zip(p.probs())
            .map(|(r, q)| r * q)
            .sum()
    };
    Ok((mass(p0), mass(p1)))
}

#[derive(Clone, Debug)]
struct Level {
    ratio: f64,
    mass0: f64,
}

/// Distinct likelihood-ratio values in descending order, with the level index
/// of every symbol (`None` for symbols impossible under both hypotheses).
#[derive(Clone, Debug)]
struct LevelSets {
    levels: Vec<Level>,
    of_symbol: Vec<Option<usize>>,
}

fn same_level(a: f64, b: f64) -> bool {
    if a.is_infinite() || b.is_infinite() {
        return a == b;
    }
    (a - b).abs() <= LEVEL_TOLERANCE * a.abs().max(b.abs())
}

impl LevelSets {
    fn new(p0: &BehaviorProfile, p1: &BehaviorProfile) -> Self {
        let n = p0.alphabet().len();
        let ratios: Vec<Option<f64>> = (0..n)
            .map(|i| ratio(p0.prob_at(i), p1.prob_at(i)))
            .collect();
        let mut order: Vec<usize> = (0..n).filter(|&i| ratios[i].is_some()).collect();
        order.sort_by(|&i, &j| ratios[j].unwrap().total_cmp(&ratios[i].unwrap()));

        let mut levels: Vec<Level> = Vec::new();
        let mut of_symbol = vec![None; n];
        for i in order {
            let r = ratios[i].unwrap();
            match levels.last_mut() {
                Some(level) if same_level(level.ratio, r) => level.mass0 += p0.prob_at(i),
                _ => levels.push(Level {
                    ratio: r,
                    mass0: p0.prob_at(i),
                }),
            }
            of_symbol[i] = Some(levels.len() - 1);
        }
        Self { levels, of_symbol }
    }
}

/// A fully specified Neyman-Pearson test: threshold plus per-symbol rejection probabilities.
#[derive(Clone, Debug, PartialEq)]
pub struct NpTest {
    pub threshold: NpThreshold,
    pub rule: RejectionRule,
    /// Level index of every symbol relative to the boundary: `Less` above η, `Equal` on it.
    boundary: Vec<Option<std::cmp::Ordering>>,
}

impl NpTest {
    pub fn new(
        p0: &BehaviorProfile,
        p1: &BehaviorProfile,
        alpha: f64,
        variant: Variant,
    ) -> Result<Self> {
        p0.alphabet().ensure_same(p1.alphabet())?;
        check_alpha(alpha)?;
        let sets = LevelSets::new(p0, p1);

        // Largest boundary index whose strictly-higher levels fit within α.
        let mut above = 0.0;
        let mut boundary = None;
        for (j, level) in sets.levels.iter().enumerate() {
            if above <= alpha + SIZE_TOLERANCE {
                boundary = Some((j, above));
            } else {
                break;
            }
            above += level.mass0;
        }

        let (eta, boundary_gamma, achieved_alpha, boundary_index) = match boundary {
            Some((j, above)) => {
                let level = &sets.levels[j];
                let gamma = if variant.is_randomized() && level.mass0 > 0.0 {
                    ((alpha - above) / level.mass0).clamp(0.0, 1.0)
                } else {
                    0.0
                };
                (level.ratio, gamma, above + gamma * level.mass0, j)
            }
            None => (f64::INFINITY, 0.0, 0.0, sets.levels.len()),
        };

        let rel: Vec<Option<std::cmp::Ordering>> = sets
            .of_symbol
            .iter()
            .map(|lvl| lvl.map(|l| l.cmp(&boundary_index)))
            .collect();
        let probs = rel
            .iter()
            .map(|r| match r {
                Some(std::cmp::Ordering::Less) => 1.0,
                Some(std::cmp::Ordering::Equal) => boundary_gamma,
                _ => 0.0,
            })
            .collect();
        Ok(Self {
            threshold: NpThreshold {
                eta,
                boundary_gamma,
                achieved_alpha,
            },
            rule: RejectionRule::new(p0.alphabet().clone(), probs)?,
            boundary: rel,
        })
    }

    fn on_boundary(&self, index: usize) -> bool {
        self.boundary[index] == Some(std::cmp::Ordering::Equal)
    }
}

/// Threshold of the most powerful test of `p0` against `p1` at level `α`.
pub fn np_threshold(
    p0: &BehaviorProfile,
    p1: &BehaviorProfile,
    alpha: f64,
    variant: Variant,
) -> Result<NpThreshold> {
    Ok(NpTest::new(p0, p1, alpha, variant)?.threshold)
}

/// Neyman-Pearson decision on a single observed event.
///
/// The randomized variant draws from a generator seeded with `seed` when `x`
/// falls on the boundary level, and fails with `MissingSeed` if none is given.
pub fn np_decide(
    p0: &BehaviorProfile,
    p1: &BehaviorProfile,
    alpha: f64,
    x: &str,
    variant: Variant,
    seed: Option<u64>,
) -> Result<TestReport> {
    let statistic = likelihood_ratio(p0, p1, x)?;
    let test = NpTest::new(p0, p1, alpha, variant)?;
    let i = p0.alphabet().index_of(x)?;
    let (size, power) = test_size_and_power(p0, p1, &test.rule)?;

    let decision = if variant.is_randomized() && test.on_boundary(i) {
        let seed = seed.ok_or(TrustError::MissingSeed)?;
        let gamma = test.threshold.boundary_gamma;
        let u = rng::unit_f64(&mut rng::generator(seed));
        Decision {
            verdict: if u < gamma {
                Verdict::Reject
            } else {
                Verdict::Retain
            },
            rejection_probability: gamma,
        }
    } else {
        Decision::deterministic(test.rule.probs()[i] == 1.0)
    };

    Ok(TestReport {
        verdict: decision.verdict,
        rejection_probability: decision.rejection_probability,
        statistic,
        threshold: test.threshold.eta,
        size,
        power: Some(power),
    })
}

/// Deterministic NP decisions for every ordered pair `(null, alternative)`.
#[derive(Clone, Debug, PartialEq)]
pub struct PairwiseMatrix {
    pub ids: Vec<String>,
    /// `cells[i][j]`: test of null `i` against alternative `j`; `None` on the diagonal.
    pub cells: Vec<Vec<Option<TestReport>>>,
}

impl PairwiseMatrix {
    /// Whether the null `null` is rejected in favor of `alternative`.
    pub fn rejects(&self, null: usize, alternative: usize) -> bool {
        self.cells[null][alternative]
            .as_ref()
            .is_some_and(|r| r.verdict == Verdict::Reject)
    }
}

pub fn pairwise_np_matrix(hset: &HypothesisSet, alpha: f64, x: &str) -> Result<PairwiseMatrix> {
    let n = hset.len();
    if n < 2 {
        return Err(TrustError::TooFewHypotheses { needed: 2, got: n });
    }
    let hs = hset.hypotheses();
    let cells = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    if i == j {
                        Ok(None)
                    } else {
                        np_decide(
                            &hs[i].profile,
                            &hs[j].profile,
                            alpha,
                            x,
                            Variant::Deterministic,
                            None,
                        )
                        .map(Some)
                    }
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PairwiseMatrix {
        ids: hs.iter().map(|h| h.id.clone()).collect(),
        cells,
    })
}
