//! The quantized simplex: every profile whose probabilities are multiples of
//! `2^-k`, under a uniform prior.

use rayon::prelude::*;

use crate::error::{Result, TrustError};
use crate::model::{BehaviorAlphabet, BehaviorProfile, Hypothesis, Observation};

/// Default grid resolution `k`.
pub const DEFAULT_RESOLUTION: u32 = 8;

/// Default cap on the number of members `mdl_select` will enumerate.
pub const DEFAULT_ENUMERATION_BOUND: u128 = 10_000_000;

const MAX_RESOLUTION: u32 = 30;

/// `C(n, r)`, saturating at `u128::MAX`.
fn binomial(n: u128, r: u128) -> u128 {
    let r = r.min(n - r);
    let mut acc: u128 = 1;
    for i in 0..r {
        // acc·(n−i)/(i+1) stays integral at every step
        let Some(next) = acc.checked_mul(n - i) else {
            return u128::MAX;
        };
        acc = next / (i + 1);
    }
    acc
}

fn log2_binomial(n: u128, r: u128) -> f64 {
    let r = r.min(n - r);
    (0..r)
        .map(|i| ((n - i) as f64).log2() - ((i + 1) as f64).log2())
        .sum()
}

#[derive(Clone, Debug, PartialEq)]
pub struct QuantizedFamily {
    alphabet: BehaviorAlphabet,
    resolution: u32,
    size: u128,
    log2_size: f64,
}

impl QuantizedFamily {
    pub fn new(alphabet: BehaviorAlphabet, resolution: u32) -> Result<Self> {
        if resolution == 0 || resolution > MAX_RESOLUTION {
            return Err(TrustError::InvalidResolution(resolution));
        }
        let units = 1u128 << resolution;
        let parts = alphabet.len() as u128;
        let size = binomial(units + parts - 1, parts - 1);
        let log2_size = if size < (1u128 << 52) {
            (size as f64).log2()
        } else {
            log2_binomial(units + parts - 1, parts - 1)
        };
        Ok(Self {
            alphabet,
            resolution,
            size,
            log2_size,
        })
    }

    pub fn alphabet(&self) -> &BehaviorAlphabet {
        &self.alphabet
    }

    pub fn resolution(&self) -> u32 {
        self.resolution
    }

    /// Grid denominator `2^k`.
    pub fn units(&self) -> u32 {
        1 << self.resolution
    }

    /// Number of members; saturates at `u128::MAX`.
    pub fn size(&self) -> u128 {
        self.size
    }

    pub fn log2_size(&self) -> f64 {
        self.log2_size
    }

    /// The member with the given numerators (which must sum to `2^k`).
    pub fn member(&self, numerators: &[u32]) -> Result<Hypothesis> {
        if numerators.len() != self.alphabet.len()
            || numerators.iter().map(|&c| c as u64).sum::<u64>() != self.units() as u64
        {
            return Err(TrustError::NotInFamily);
        }
        let units = self.units() as f64;
        let probs = numerators.iter().map(|&c| c as f64 / units).collect();
        let profile = BehaviorProfile::new(self.alphabet.clone(), probs)?;
        Ok(Hypothesis::new(self.member_id(numerators), profile))
    }

    pub fn member_id(&self, numerators: &[u32]) -> String {
        let parts: Vec<String> = numerators.iter().map(u32::to_string).collect();
        format!("grid[{}]/{}", parts.join(","), self.units())
    }

    /// Numerators of `profile` if it lies on the grid.
    pub fn quantize(&self, profile: &BehaviorProfile) -> Result<Vec<u32>> {
        if profile.alphabet() != &self.alphabet {
            return Err(TrustError::NotInFamily);
        }
        let units = self.units() as f64;
        let mut out = Vec::with_capacity(self.alphabet.len());
        for &p in profile.probs() {
            let scaled = p * units;
            let rounded = scaled.round();
            if (scaled - rounded).abs() > 1e-9 {
                return Err(TrustError::NotInFamily);
            }
            out.push(rounded as u32);
        }
        if out.iter().map(|&c| c as u64).sum::<u64>() != self.units() as u64 {
            return Err(TrustError::NotInFamily);
        }
        Ok(out)
    }

    /// Nearest grid point by largest remainders; ties go to the earlier symbol.
    pub fn round(&self, profile: &BehaviorProfile) -> Result<Vec<u32>> {
        profile.alphabet().ensure_same(&self.alphabet)?;
        let units = self.units() as f64;
        let scaled: Vec<f64> = profile.probs().iter().map(|p| p * units).collect();
        let mut out: Vec<u32> = scaled.iter().map(|s| s.floor() as u32).collect();
        let assigned: u64 = out.iter().map(|&c| c as u64).sum();
        let mut remaining = (self.units() as u64).saturating_sub(assigned);
        let mut order: Vec<usize> = (0..out.len()).collect();
        order.sort_by(|&i, &j| {
            let fi = scaled[i] - scaled[i].floor();
            let fj = scaled[j] - scaled[j].floor();
            fj.total_cmp(&fi).then(i.cmp(&j))
        });
        for i in order.into_iter().cycle() {
            if remaining == 0 {
                break;
            }
            out[i] += 1;
            remaining -= 1;
        }
        Ok(out)
    }

    /// Calls `f` on every member in ascending lexicographic order.
    pub fn for_each_member(&self, mut f: impl FnMut(&[u32])) {
        let mut c = vec![0u32; self.alphabet.len()];
        *c.last_mut().unwrap() = self.units();
        loop {
            f(&c);
            if !next_composition(&mut c) {
                break;
            }
        }
    }
}

/// Advances `c` to the next composition of the same total in ascending
/// lexicographic order. Returns `false` after the last one.
fn next_composition(c: &mut [u32]) -> bool {
    let m = c.len();
    if m < 2 {
        return false;
    }
    let mut tail = c[m - 1];
    let mut j = m - 1;
    while j > 0 {
        j -= 1;
        if tail > 0 {
            c[j] += 1;
            for x in &mut c[j + 1..m - 1] {
                *x = 0;
            }
            c[m - 1] = tail - 1;
            return true;
        }
        tail += c[j];
    }
    false
}

/// Best member for the data: maximal log-likelihood, lexicographically
/// smallest numerators among ties.
#[derive(Clone, Debug, PartialEq)]
pub(crate) struct Best {
    pub numerators: Vec<u32>,
    pub log_likelihood: f64,
}

fn better(a: Option<Best>, b: Option<Best>) -> Option<Best> {
    match (a, b) {
        (Some(a), Some(b)) => {
            if b.log_likelihood > a.log_likelihood {
                Some(b)
            } else {
                Some(a)
            }
        }
        (a, b) => a.or(b),
    }
}

/// Exhaustive maximum-likelihood search over the family, partitioned on the
/// first coordinate. Partitions are merged in order, so the tie-break does not
/// depend on scheduling. `None` when every member assigns the data probability 0.
pub(crate) fn max_likelihood_member(family: &QuantizedFamily, obs: &Observation) -> Option<Best> {
    let units = family.units();
    let log_table: Vec<f64> = (0..=units)
        .map(|c| (c as f64 / units as f64).log2())
        .collect();
    let counts: Vec<f64> = obs.counts().iter().map(|&n| n as f64).collect();
    let m = counts.len();

    let score = |c: &[u32]| -> f64 {
        let mut acc = 0.0;
        for (&n, &ci) in counts.iter().zip(c) {
            if n > 0.0 {
                if ci == 0 {
                    return f64::NEG_INFINITY;
                }
                acc += n * log_table[ci as usize];
            }
        }
        acc
    };

    if m == 1 {
        return Some(Best {
            numerators: vec![units],
            log_likelihood: 0.0,
        });
    }

    (0..=units)
        .into_par_iter()
        .map(|first| {
            let mut c = vec![0u32; m];
            c[0] = first;
            c[m - 1] = units - first;
            let mut best: Option<Best> = None;
            loop {
                let s = score(&c);
                if s > f64::NEG_INFINITY && best.as_ref().is_none_or(|b| s > b.log_likelihood) {
                    best = Some(Best {
                        numerators: c.clone(),
                        log_likelihood: s,
                    });
                }
                if !next_composition(&mut c[1..]) {
                    break;
                }
            }
            best
        })
        .reduce(|| None, better)
}
