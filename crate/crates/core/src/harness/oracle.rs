//! Brute-force oracles. Written from the definitions alone, without reusing
//! the ranking or level-set machinery of the testing module.

use crate::error::{Result, TrustError};
use crate::model::BehaviorProfile;

/// Largest alphabet [`brute_force_most_powerful`] will enumerate.
pub const MAX_BRUTE_FORCE_ALPHABET: usize = 16;

/// Null mass of every symbol no more likely than `x`, by a plain scan.
pub fn p_value_oracle(p0: &BehaviorProfile, x: &str) -> Result<f64> {
    let px = p0.prob(x)?;
    let mut total = 0.0;
    for (_, p) in p0.iter() {
        if p <= px {
            total += p;
        }
    }
    Ok(total)
}

#[derive(Clone, Debug, PartialEq)]
pub struct BruteForceRegion {
    pub symbols: Vec<String>,
    pub size: f64,
    pub power: f64,
}

/// Most powerful deterministic rejection region with size at most `α`.
///
/// Every subset of the alphabet is scored. Ties on power go to the smaller
/// size, then to the lexicographically smaller list of symbol positions, so
/// the empty region wins whenever nothing has positive power.
pub fn brute_force_most_powerful(
    p0: &BehaviorProfile,
    p1: &BehaviorProfile,
    alpha: f64,
) -> Result<BruteForceRegion> {
    if p0.alphabet() != p1.alphabet() {
        return Err(TrustError::AlphabetMismatch);
    }
    let n = p0.alphabet().len();
    if n > MAX_BRUTE_FORCE_ALPHABET {
        return Err(TrustError::AlphabetTooLarge {
            size: n,
            max: MAX_BRUTE_FORCE_ALPHABET,
        });
    }

    let members = |mask: u32| -> Vec<usize> { (0..n).filter(|i| mask & (1 << i) != 0).collect() };

    let mut best: Option<(Vec<usize>, f64, f64)> = None;
    for mask in 0u32..(1u32 << n) {
        let region = members(mask);
        let size: f64 = region
            .iter()
            .map(|&i| p0.prob_at(i))
            .fold(0.0, |acc, p| acc + p);
        if size > alpha + 1e-12 {
            continue;
        }
        let power: f64 = region
            .iter()
            .map(|&i| p1.prob_at(i))
            .fold(0.0, |acc, p| acc + p);
        let replace = match &best {
            None => true,
            Some((r, s, p)) => {
                power > *p || (power == *p && (size < *s || (size == *s && region < *r)))
            }
        };
        if replace {
            best = Some((region, size, power));
        }
    }
    let (region, size, power) = best.expect("the empty region is always feasible");
    Ok(BruteForceRegion {
        symbols: region
            .into_iter()
            .map(|i| p0.alphabet().symbol(i).to_string())
            .collect(),
        size,
        power,
    })
}
