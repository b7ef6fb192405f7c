use thiserror::Error;

pub type Result<T> = std::result::Result<T, TrustError>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TrustError {
    #[error("behavior alphabet must contain at least one symbol")]
    EmptyAlphabet,
    #[error("duplicate behavior symbol `{0}`")]
    DuplicateSymbol(String),
    #[error("probabilities sum to {sum}, expected 1 within {tolerance:e}")]
    NonUnitSum { sum: f64, tolerance: f64 },
    #[error("probability {value} for `{symbol}` is outside [0, 1]")]
    OutOfRange { symbol: String, value: f64 },
    #[error("no probability given for symbol `{0}`")]
    MissingSymbol(String),
    #[error("unknown symbol `{0}`")]
    UnknownSymbol(String),
    #[error("operands are defined over different behavior alphabets")]
    AlphabetMismatch,
    #[error("observation contains no events")]
    EmptyObservation,
    #[error("significance level {0} must lie strictly between 0 and 1")]
    AlphaOutOfRange(f64),
    #[error("symbol `{0}` is impossible under both hypotheses")]
    BothZero(String),
    #[error("randomized boundary decision requires a seed")]
    MissingSeed,
    #[error("rejection probability {value} for `{symbol}` is outside [0, 1]")]
    InvalidRejection { symbol: String, value: f64 },
    #[error("hypothesis set is empty")]
    EmptyHypothesisSet,
    #[error("duplicate hypothesis id `{0}`")]
    DuplicateId(String),
    #[error("prior {value} for hypothesis `{id}` is outside [0, 1]")]
    InvalidPrior { id: String, value: f64 },
    #[error("priors must be given for all hypotheses or none")]
    PartialPriors,
    #[error("hypothesis set has no priors")]
    MissingPriors,
    #[error("observation is impossible under every positively weighted hypothesis")]
    ZeroEvidence,
    #[error("operation needs at least {needed} hypotheses, got {got}")]
    TooFewHypotheses { needed: usize, got: usize },
    #[error("hypothesis is not a member of the quantized family")]
    NotInFamily,
    #[error("quantized family has {size} members, above the enumeration bound {bound}")]
    FamilyTooLarge { size: u128, bound: u128 },
    #[error("grid resolution {0} is unsupported (expected 1..=30)")]
    InvalidResolution(u32),
    #[error("unknown compression method `{0}`")]
    UnknownMethod(String),
    #[error("alphabet has {size} symbols, brute force supports at most {max}")]
    AlphabetTooLarge { size: usize, max: usize },
    #[error("event stream does not match the observation counts")]
    SerializationMismatch,
    #[error("at least one trial is required")]
    NoTrials,
    #[error("stream length must be at least 1")]
    EmptyStream,
    #[error("compressed payload is malformed: {0}")]
    CorruptPayload(String),
    #[error("parse error: {0}")]
    Parse(String),
}
