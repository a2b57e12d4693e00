use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("DalesPrincipleViolation: neuron {neuron} has an out-weight of the wrong sign ({weight})")]
    DalesPrincipleViolation { neuron: usize, weight: f64 },
    #[error("InputTargeted: edge {pre} -> {post} targets an input neuron")]
    InputTargeted { pre: usize, post: usize },
    #[error("LagOutOfRange: lag {lag} not in 1..={history}")]
    LagOutOfRange { lag: usize, history: usize },
    #[error("InputNeuronPotential: neuron {0} is an input")]
    InputNeuronPotential(usize),
    #[error("MissingDraw: no draw for neuron {0}")]
    MissingDraw(usize),
    #[error("NonpositiveTemperature: {0}")]
    NonpositiveTemperature(f64),
    #[error("InvalidNetwork: {0}")]
    InvalidNetwork(String),
    #[error("UnknownNeuron: {0}")]
    UnknownNeuron(usize),
    #[error("WindowMismatch: expected {expected} frames of {neurons} neurons")]
    WindowMismatch { expected: usize, neurons: usize },
    #[error("InvalidSize: {0}")]
    InvalidSize(String),
    #[error("InvalidGamma: {0}")]
    InvalidGamma(f64),
    #[error("MissingDelta: high-probability mode needs a failure probability")]
    MissingDelta,
    #[error("InvalidParameter: {0}")]
    InvalidParameter(String),
    #[error("LengthMismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("TopologyMismatch: {0}")]
    TopologyMismatch(String),
    #[error("StateSpaceTooLarge: 2^{log2_states} states exceeds cap {cap}")]
    StateSpaceTooLarge { log2_states: usize, cap: usize },
    #[error("NotValidConfiguration: the window is not a valid configuration for this variant")]
    NotValidConfiguration,
    #[error("HorizonTooShort: horizon {horizon} < required {required}")]
    HorizonTooShort { horizon: u64, required: u64 },
    #[error("UnknownLemma: {0}")]
    UnknownLemma(String),
    #[error("VariantMismatch: lemma {lemma} needs the {expected} network")]
    VariantMismatch { lemma: String, expected: String },
    #[error("Format: {0}")]
    Format(String),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Format(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Format(e.to_string())
    }
}
