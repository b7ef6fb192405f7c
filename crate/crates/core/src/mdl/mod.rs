//! Formulating trust hypotheses by two-part minimum description length.
//!
//! A hypothesis is charged `−log2 Pr(θ)` bits to describe itself and
//! `−log2 Pr_θ(x)` bits to describe the data. Over a [`QuantizedFamily`] the
//! prior is uniform, so the first term is `log2 |family|` for every member
//! and the minimizer is the maximum-likelihood grid point.
//!
//! Compression-based estimates ([`compressor_length_estimate`]) are reported
//! alongside as a diagnostic; they never drive the selection.

mod family;
pub mod lz78;

use std::fmt;
use std::ops::Add;

use serde::{Deserialize, Serialize};

pub use family::{QuantizedFamily, DEFAULT_ENUMERATION_BOUND, DEFAULT_RESOLUTION};

use crate::error::{Result, TrustError};
use crate::model::{log_likelihood, BehaviorProfile, Hypothesis, Observation};
use crate::serde_ext::ext_real;

/// A description length in bits; `+∞` for data the code cannot describe.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct CodeLength(#[serde(with = "ext_real")] f64);

impl CodeLength {
    pub const ZERO: CodeLength = CodeLength(0.0);
    pub const INFINITE: CodeLength = CodeLength(f64::INFINITY);

    pub fn bits(self) -> f64 {
        self.0
    }

    pub fn is_finite(self) -> bool {
        self.0.is_finite()
    }

    fn from_bits(bits: f64) -> Self {
        debug_assert!(bits >= 0.0 || bits.is_nan());
        // −0.0 from negating a zero log-likelihood
        CodeLength(bits.max(0.0))
    }
}

impl Add for CodeLength {
    type Output = CodeLength;

    fn add(self, rhs: CodeLength) -> CodeLength {
        CodeLength(self.0 + rhs.0)
    }
}

impl fmt::Display for CodeLength {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.4} bits", self.0)
    }
}

/// Shannon-Fano length of the data under `profile`.
pub fn data_code_length(profile: &BehaviorProfile, obs: &Observation) -> Result<CodeLength> {
    Ok(CodeLength::from_bits(-log_likelihood(profile, obs)?))
}

/// `−log2` of the uniform family prior.
pub fn hypothesis_code_length(family: &QuantizedFamily, h: &Hypothesis) -> Result<CodeLength> {
    family.quantize(&h.profile)?;
    Ok(CodeLength::from_bits(family.log2_size()))
}

pub fn two_part_length(
    family: &QuantizedFamily,
    h: &Hypothesis,
    obs: &Observation,
) -> Result<CodeLength> {
    let model = hypothesis_code_length(family, h)?;
    Ok(model + data_code_length(&h.profile, obs)?)
}

/// Winning grid member together with its code lengths.
#[derive(Clone, Debug, PartialEq)]
pub struct MdlSelection {
    pub hypothesis: Hypothesis,
    pub numerators: Vec<u32>,
    pub data_bits: CodeLength,
    pub hypothesis_bits: CodeLength,
    pub family_size: u128,
}

impl MdlSelection {
    pub fn two_part_bits(&self) -> CodeLength {
        self.hypothesis_bits + self.data_bits
    }
}

/// Member of `family` with the shortest two-part code for `obs`.
///
/// Ties are broken by the lexicographically smallest numerator vector. When
/// no member can describe the data at all, every length is infinite and the
/// first member is returned.
pub fn mdl_select(family: &QuantizedFamily, obs: &Observation) -> Result<MdlSelection> {
    mdl_select_bounded(family, obs, DEFAULT_ENUMERATION_BOUND)
}

pub fn mdl_select_bounded(
    family: &QuantizedFamily,
    obs: &Observation,
    bound: u128,
) -> Result<MdlSelection> {
    obs.alphabet().ensure_same(family.alphabet())?;
    if obs.total() == 0 {
        return Err(TrustError::EmptyObservation);
    }
    if family.size() > bound {
        return Err(TrustError::FamilyTooLarge {
            size: family.size(),
            bound,
        });
    }
    let numerators = match family::max_likelihood_member(family, obs) {
        Some(best) => best.numerators,
        None => {
            let mut first = vec![0; family.alphabet().len()];
            *first.last_mut().unwrap() = family.units();
            first
        }
    };
    let hypothesis = family.member(&numerators)?;
    Ok(MdlSelection {
        data_bits: data_code_length(&hypothesis.profile, obs)?,
        hypothesis_bits: CodeLength::from_bits(family.log2_size()),
        family_size: family.size(),
        numerators,
        hypothesis,
    })
}

/// Role attached to a formulated hypothesis for downstream tests.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum HypothesisRole {
    #[serde(rename = "null/trustworthy")]
    NullTrustworthy,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FormulatedNull {
    pub role: HypothesisRole,
    pub selection: MdlSelection,
}

impl FormulatedNull {
    pub fn hypothesis(&self) -> &Hypothesis {
        &self.selection.hypothesis
    }
}

/// The null hypothesis that best compresses a trusted-period baseline.
///
/// The null is always the trustworthy profile; the burden of proof lies on
/// rejecting it.
pub fn formulate_null(obs: &Observation, family: &QuantizedFamily) -> Result<FormulatedNull> {
    Ok(FormulatedNull {
        role: HypothesisRole::NullTrustworthy,
        selection: mdl_select(family, obs)?,
    })
}

/// A lossless code for event streams, used as a data-length estimator.
pub trait StreamCoder: Send + Sync {
    fn name(&self) -> &str;

    /// Length in bits of the encoded stream of symbol indices in `0..alphabet_size`.
    fn encoded_bits(&self, alphabet_size: usize, events: &[usize]) -> u64;
}

/// Identifiers accepted by [`compressor_length_estimate`].
pub const BUILTIN_METHODS: &[&str] = &[lz78::METHOD];

pub fn builtin_coder(method: &str) -> Result<Box<dyn StreamCoder>> {
    match method {
        lz78::METHOD => Ok(Box::new(lz78::Lz78Coder)),
        other => Err(TrustError::UnknownMethod(other.to_string())),
    }
}

/// Compressed length of `serialization`, which must be an ordering of the events counted in `obs`.
pub fn compressor_length_estimate(
    obs: &Observation,
    serialization: &[usize],
    method: &str,
) -> Result<CodeLength> {
    let coder = builtin_coder(method)?;
    compressor_length_estimate_with(obs, serialization, coder.as_ref())
}

pub fn compressor_length_estimate_with(
    obs: &Observation,
    serialization: &[usize],
    coder: &dyn StreamCoder,
) -> Result<CodeLength> {
    let m = obs.alphabet().len();
    let mut counts = vec![0u64; m];
    for &e in serialization {
        if e >= m {
            return Err(TrustError::SerializationMismatch);
        }
        counts[e] += 1;
    }
    if counts != obs.counts() {
        return Err(TrustError::SerializationMismatch);
    }
    Ok(CodeLength::from_bits(
        coder.encoded_bits(m, serialization) as f64
    ))
}

/// Selected profile as written in reports.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SelectedProfile {
    pub id: String,
    pub alphabet: Vec<String>,
    pub numerators: Vec<u32>,
    pub denominator: u32,
    pub probs: Vec<f64>,
}

/// JSON report of an MDL selection.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MdlReport {
    pub selected: SelectedProfile,
    #[serde(with = "ext_real")]
    pub two_part_bits: f64,
    #[serde(with = "ext_real")]
    pub data_bits: f64,
    pub hypothesis_bits: f64,
    pub family_size: u128,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub compressor_bits: Option<f64>,
}

impl MdlReport {
    pub fn new(
        family: &QuantizedFamily,
        selection: &MdlSelection,
        compressor: Option<CodeLength>,
    ) -> Self {
        Self {
            selected: SelectedProfile {
                id: selection.hypothesis.id.clone(),
                alphabet: family.alphabet().symbols().to_vec(),
                numerators: selection.numerators.clone(),
                denominator: family.units(),
                probs: selection.hypothesis.profile.probs().to_vec(),
            },
            two_part_bits: selection.two_part_bits().bits(),
            data_bits: selection.data_bits.bits(),
            hypothesis_bits: selection.hypothesis_bits.bits(),
            family_size: selection.family_size,
            compressor_bits: compressor.map(CodeLength::bits),
        }
    }
}
