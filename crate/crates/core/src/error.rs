use thiserror::Error;

/// Every failure reported by the crate.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CoreError {
    #[error("ArityMismatch: {0}")]
    ArityMismatch(String),
    #[error("WeightNotOne: coefficients sum to {0}")]
    WeightNotOne(String),
    #[error("ProbabilityOutOfRange: {0}")]
    ProbabilityOutOfRange(String),
    #[error("UnknownSymbol: {0}")]
    UnknownSymbol(String),
    #[error("InvalidInput: {0}")]
    InvalidInput(String),
    #[error("DuplicateSymbol: {0}")]
    DuplicateSymbol(String),
    #[error("SyntaxError at {line}:{col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("unbound variable `{0}`")]
    UnboundVariable(String),
    #[error("invalid coefficient family: {0}")]
    BadFamily(String),
    #[error("ZeroProbabilityHead: {0}")]
    ZeroProbabilityHead(String),
    #[error("SubtractionUnderflow at play `{0}`")]
    SubtractionUnderflow(String),
    #[error("GeneratorUnsupported: {0}")]
    GeneratorUnsupported(String),
    #[error("NotFinitelyFounded: {0}")]
    NotFinitelyFounded(String),
    #[error("NotWellFounded: {0}")]
    NotWellFounded(String),
    #[error("InexactValues: {0}")]
    InexactValues(String),
    #[error("DominationFails at play `{0}`")]
    DominationFails(String),
    #[error("SignatureNotFinitary: {0}")]
    SignatureNotFinitary(String),
    #[error("NotSteady: {0}")]
    NotSteady(String),
    #[error("WitnessSearchExhausted: {0}")]
    WitnessSearchExhausted(String),
    #[error("Inconclusive: {0}")]
    Inconclusive(String),
    #[error("Unsupported: {0}")]
    Unsupported(String),
}

impl CoreError {
    /// The variant name, used as a stable error code in JSON output.
    pub fn code(&self) -> &'static str {
        match self {
            CoreError::ArityMismatch(_) => "ArityMismatch",
            CoreError::WeightNotOne(_) => "WeightNotOne",
            CoreError::ProbabilityOutOfRange(_) => "ProbabilityOutOfRange",
            CoreError::UnknownSymbol(_) => "UnknownSymbol",
            CoreError::InvalidInput(_) => "InvalidInput",
            CoreError::DuplicateSymbol(_) => "DuplicateSymbol",
            CoreError::Syntax { .. } => "SyntaxError",
            CoreError::UnboundVariable(_) => "UnboundVariable",
            CoreError::BadFamily(_) => "BadFamily",
            CoreError::ZeroProbabilityHead(_) => "ZeroProbabilityHead",
            CoreError::SubtractionUnderflow(_) => "SubtractionUnderflow",
            CoreError::GeneratorUnsupported(_) => "GeneratorUnsupported",
            CoreError::NotFinitelyFounded(_) => "NotFinitelyFounded",
            CoreError::NotWellFounded(_) => "NotWellFounded",
            CoreError::InexactValues(_) => "InexactValues",
            CoreError::DominationFails(_) => "DominationFails",
            CoreError::SignatureNotFinitary(_) => "SignatureNotFinitary",
            CoreError::NotSteady(_) => "NotSteady",
            CoreError::WitnessSearchExhausted(_) => "WitnessSearchExhausted",
            CoreError::Inconclusive(_) => "Inconclusive",
            CoreError::Unsupported(_) => "Unsupported",
        }
    }
}
