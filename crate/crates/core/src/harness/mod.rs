//! Seeded simulation, Monte Carlo error rates and brute-force oracles.
//!
//! All randomness goes through [`crate::rng`]. Trial `t` of a run with master
//! seed `s` draws from `generator(derive_seed(s, t))`, so parallel and serial
//! execution give identical results.

mod oracle;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use oracle::{
    brute_force_most_powerful, p_value_oracle, BruteForceRegion, MAX_BRUTE_FORCE_ALPHABET,
};

use crate::error::{Result, TrustError};
use crate::mdl::{formulate_null, QuantizedFamily};
use crate::model::{BehaviorAlphabet, BehaviorProfile, Hypothesis, HypothesisSet, Observation};
use crate::rng::{self, Generator};
use crate::testing::{pairwise_np_matrix, NpTest, PairwiseMatrix, Variant};

#[derive(Clone, Debug, PartialEq)]
pub struct StreamSpec {
    pub profile: BehaviorProfile,
    pub length: u64,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimulatedStream {
    /// Symbol indices in draw order.
    pub events: Vec<usize>,
    pub observation: Observation,
}

/// Inverse-CDF sampler over a profile in declaration order.
#[derive(Clone, Debug)]
pub struct Sampler {
    cumulative: Vec<f64>,
    last_positive: usize,
}

impl Sampler {
    pub fn new(profile: &BehaviorProfile) -> Self {
        let mut acc = 0.0;
        let cumulative = profile
            .probs()
            .iter()
            .map(|p| {
                acc += p;
                acc
            })
            .collect();
        let last_positive = profile
            .probs()
            .iter()
            .rposition(|&p| p > 0.0)
            .expect("a profile has positive mass");
        Self {
            cumulative,
            last_positive,
        }
    }

    pub fn draw(&self, rng: &mut Generator) -> usize {
        let u = rng::unit_f64(rng);
        // u beyond the last cumulative value only happens through rounding
        self.cumulative
            .iter()
            .position(|&c| u < c)
            .map_or(self.last_positive, |i| i.min(self.last_positive))
    }
}

pub fn simulate_stream(spec: &StreamSpec) -> Result<SimulatedStream> {
    if spec.length == 0 {
        return Err(TrustError::EmptyStream);
    }
    let sampler = Sampler::new(&spec.profile);
    let mut g = rng::generator(spec.seed);
    let events: Vec<usize> = (0..spec.length).map(|_| sampler.draw(&mut g)).collect();
    let observation = Observation::from_indices(spec.profile.alphabet(), &events);
    Ok(SimulatedStream {
        events,
        observation,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorRateReport {
    /// Rejection frequency with events drawn from the null.
    pub fpr_hat: f64,
    /// Retention frequency with events drawn from the alternative.
    pub fnr_hat: f64,
    pub trials: u64,
    pub alpha_requested: f64,
    /// 95% Wilson half-width of `fpr_hat`.
    pub wilson_halfwidth: f64,
    /// Exact size of the test being simulated.
    pub achieved_alpha: f64,
    /// Exact power of the test being simulated.
    pub power: f64,
    pub variant: Variant,
}

/// Half-width of the Wilson score interval for `successes / trials` at normal quantile `z`.
pub fn wilson_halfwidth(successes: u64, trials: u64, z: f64) -> f64 {
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    z / (1.0 + z2 / n) * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt()
}

/// Estimates the error rates of the NP test by simulating single events.
///
/// Each trial draws one event under the null and one under the alternative;
/// rejection is resolved with one more uniform draw against the test's
/// rejection probability, so the deterministic and randomized variants share
/// one code path.
pub fn monte_carlo_error_rates(
    p0: &BehaviorProfile,
    p1: &BehaviorProfile,
    alpha: f64,
    trials: u64,
    seed: u64,
    variant: Variant,
) -> Result<ErrorRateReport> {
    if trials == 0 {
        return Err(TrustError::NoTrials);
    }
    let test = NpTest::new(p0, p1, alpha, variant)?;
    let reject = test.rule.probs();
    let (s0, s1) = (Sampler::new(p0), Sampler::new(p1));

    let (false_pos, false_neg) = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut g = rng::generator(rng::derive_seed(seed, t));
            let x0 = s0.draw(&mut g);
            let r0 = rng::unit_f64(&mut g) < reject[x0];
            let x1 = s1.draw(&mut g);
            let r1 = rng::unit_f64(&mut g) < reject[x1];
            (r0 as u64, (!r1) as u64)
        })
        .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1));

    let power = reject.iter().zip(p1.probs()).map(|(r, q)| r * q).sum();
    Ok(ErrorRateReport {
        fpr_hat: false_pos as f64 / trials as f64,
        fnr_hat: false_neg as f64 / trials as f64,
        trials,
        alpha_requested: alpha,
        wilson_halfwidth: wilson_halfwidth(false_pos, trials, 1.959_963_984_540_054),
        achieved_alpha: test.threshold.achieved_alpha,
        power,
        variant,
    })
}

/// Three hypotheses and an event on which `0` is rejected against `1`,
/// `1` against `2`, and `2` against `1`.
#[derive(Clone, Debug, PartialEq)]
pub struct CyclicRejection {
    pub hset: HypothesisSet,
    pub event: String,
    pub alpha: f64,
}

impl CyclicRejection {
    pub fn matrix(&self) -> Result<PairwiseMatrix> {
        pairwise_np_matrix(&self.hset, self.alpha, &self.event)
    }

    /// Re-runs the pairwise tests and checks the pattern.
    pub fn verify(&self) -> Result<bool> {
        Ok(self.hset.len() == 3 && exhibits_cycle(&self.matrix()?))
    }
}

pub fn exhibits_cycle(m: &PairwiseMatrix) -> bool {
    m.rejects(0, 1) && m.rejects(1, 2) && m.rejects(2, 1)
}

/// Resolution of the profiles tried by [`find_cyclic_rejection`].
const SEARCH_RESOLUTION: u32 = 6;
const SEARCH_ALPHABET: [&str; 4] = ["a", "b", "c", "d"];

/// Random grid profile biased toward sparse, concentrated shapes: weights are
/// sixth powers of uniforms, rounded onto the grid by largest remainders.
fn random_grid_profile(family: &QuantizedFamily, g: &mut Generator) -> BehaviorProfile {
    let m = family.alphabet().len();
    let weights: Vec<f64> = (0..m).map(|_| rng::unit_f64(g).powi(6)).collect();
    let total: f64 = weights.iter().sum();
    let probs = if total > 0.0 {
        weights.iter().map(|w| w / total).collect()
    } else {
        vec![1.0 / m as f64; m]
    };
    let raw = BehaviorProfile::new(family.alphabet().clone(), probs).expect("normalized weights");
    let numerators = family.round(&raw).expect("same alphabet");
    family.member(&numerators).expect("rounded member").profile
}

/// Seeded random search over quantized profiles for a cyclic rejection pattern.
pub fn find_cyclic_rejection(alpha: f64, seed: u64, attempts: u64) -> Option<CyclicRejection> {
    let alphabet = BehaviorAlphabet::new(SEARCH_ALPHABET).expect("static alphabet");
    let family = QuantizedFamily::new(alphabet, SEARCH_RESOLUTION).expect("valid resolution");
    for attempt in 0..attempts {
        let mut g = rng::generator(rng::derive_seed(seed, attempt));
        let hypotheses: Vec<Hypothesis> = (0..3)
            .map(|i| Hypothesis::new(format!("theta{i}"), random_grid_profile(&family, &mut g)))
            .collect();
        let hset = HypothesisSet::new(hypotheses).expect("distinct ids");
        for event in SEARCH_ALPHABET {
            if let Ok(m) = pairwise_np_matrix(&hset, alpha, event) {
                if exhibits_cycle(&m) {
                    return Some(CyclicRejection {
                        hset,
                        event: event.to_string(),
                        alpha,
                    });
                }
            }
        }
    }
    None
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecoveryReport {
    pub hits: u64,
    pub runs: u64,
    pub rate: f64,
}

/// Fraction of seeds on which [`formulate_null`] returns the generating grid member.
pub fn mdl_recovery_experiment(
    true_profile: &BehaviorProfile,
    family: &QuantizedFamily,
    n: u64,
    seeds: &[u64],
) -> Result<RecoveryReport> {
    let target = family.quantize(true_profile)?;
    let outcomes = seeds
        .par_iter()
        .map(|&seed| {
            let stream = simulate_stream(&StreamSpec {
                profile: true_profile.clone(),
                length: n,
                seed,
            })?;
            let null = formulate_null(&stream.observation, family)?;
            Ok(null.selection.numerators == target)
        })
        .collect::<Result<Vec<bool>>>()?;
    let hits = outcomes.iter().filter(|&&h| h).count() as u64;
    let runs = seeds.len() as u64;
    Ok(RecoveryReport {
        hits,
        runs,
        rate: if runs == 0 {
            0.0
        } else {
            hits as f64 / runs as f64
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn abcd() -> BehaviorAlphabet {
        BehaviorAlphabet::new(["a", "b", "c", "d"]).unwrap()
    }

    fn table() -> (BehaviorProfile, BehaviorProfile) {
        (
            BehaviorProfile::new(abcd(), vec![0.98, 0.005, 0.005, 0.01]).unwrap(),
            BehaviorProfile::new(abcd(), vec![0.098, 0.001, 0.001, 0.9]).unwrap(),
        )
    }

    #[test]
    fn point_mass_stream() {
        let ab = BehaviorAlphabet::new(["a", "b"]).unwrap();
        let spec = StreamSpec {
            profile: BehaviorProfile::new(ab, vec![1.0, 0.0]).unwrap(),
            length: 5,
            seed: 123,
        };
        let s = simulate_stream(&spec).unwrap();
        assert_eq!(s.events, vec![0; 5]);
        assert_eq!(s.observation.counts(), &[5, 0]);
    }

    #[test]
    fn streams_are_reproducible() {
        let spec = StreamSpec {
            profile: table().0,
            length: 1000,
            seed: 99,
        };
        assert_eq!(
            simulate_stream(&spec).unwrap(),
            simulate_stream(&spec).unwrap()
        );
        let other = StreamSpec {
            seed: 100,
            ..spec.clone()
        };
        assert_ne!(
            simulate_stream(&spec).unwrap(),
            simulate_stream(&other).unwrap()
        );
        assert_eq!(
            simulate_stream(&StreamSpec { length: 0, ..spec }).unwrap_err(),
            TrustError::EmptyStream
        );
    }

    #[test]
    fn stream_frequencies() {
        let spec = StreamSpec {
            profile: table().0,
            length: 100_000,
            seed: 2024,
        };
        let s = simulate_stream(&spec).unwrap();
        let freq = s.observation.counts()[0] as f64 / 1e5;
        assert!((freq - 0.98).abs() <= 0.002, "{freq}");
    }

    #[test]
    fn wilson_reference_value() {
        // 10 of 100 at z = 1.96: interval (0.0552, 0.1744)
        let hw = wilson_halfwidth(10, 100, 1.96);
        assert!((hw - 0.0596).abs() < 1e-3, "{hw}");
    }

    #[test]
    fn error_rates_on_table() {
        let (p0, p1) = table();
        let r = monte_carlo_error_rates(&p0, &p1, 0.01, 20_000, 5, Variant::Deterministic).unwrap();
        assert_eq!(r.achieved_alpha, 0.01);
        assert_eq!(r.power, 0.9);
        let sd = (0.01f64 * 0.99 / 20_000.0).sqrt();
        assert!((r.fpr_hat - 0.01).abs() <= 4.0 * sd, "{r:?}");
        let sd = (0.1f64 * 0.9 / 20_000.0).sqrt();
        assert!((r.fnr_hat - 0.1).abs() <= 4.0 * sd, "{r:?}");
        let again =
            monte_carlo_error_rates(&p0, &p1, 0.01, 20_000, 5, Variant::Deterministic).unwrap();
        assert_eq!(r, again);
    }

    #[test]
    fn cycle_search_budget() {
        assert!(find_cyclic_rejection(0.05, 1, 0).is_none());
    }

    #[test]
    fn point_mass_recovery_is_certain() {
        let family = QuantizedFamily::new(abcd(), 4).unwrap();
        let corner = family.member(&[16, 0, 0, 0]).unwrap().profile;
        let seeds: Vec<u64> = (0..10).collect();
        for n in [1, 5, 50] {
            let r = mdl_recovery_experiment(&corner, &family, n, &seeds).unwrap();
            assert_eq!(r.hits, 10);
        }
        let (p0, _) = table();
        assert_eq!(
            mdl_recovery_experiment(&p0, &family, 10, &seeds).unwrap_err(),
            TrustError::NotInFamily
        );
    }
}
