use thiserror::Error;

/// Errors raised while building or querying a system configuration.
///
/// Layer numbers in messages are 1-based, layer 1 being decoded first.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("at least one layer is required")]
    NoLayers,
    #[error("number of channels must be at least 1")]
    NoChannels,
    #[error("repetition B = {repetition} must satisfy 1 <= B <= N = {channels}")]
    RepetitionOutOfRange { repetition: usize, channels: usize },
    #[error("layer {layer}: {reason}")]
    InvalidLayer { layer: usize, reason: String },
    #[error("{name} must be finite and positive, got {value}")]
    NotPositive { name: &'static str, value: f64 },
    #[error("expected {expected} per-layer values for `{name}`, got {got}")]
    LengthMismatch {
        name: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("user count m must be at least 1, got {0}")]
    NoUsers(usize),
    #[error("layer {layer}: arrival rate is zero, the conditional failure probability is undefined")]
    ZeroArrival { layer: usize },
    #[error("layer index {layer} out of range 1..={layers}")]
    LayerOutOfRange { layer: usize, layers: usize },
    #[error("invalid search settings: {0}")]
    InvalidSearch(String),
    #[error("invalid simulation request: {0}")]
    InvalidSimulation(String),
}

pub type Result<T, E = ModelError> = std::result::Result<T, E>;
