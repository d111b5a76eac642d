use thiserror::Error;

/// Problems with a `key=value` config (game spec or run manifest).
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ConfigError {
    #[error("line {line}: expected `key=value`")]
    Syntax { line: usize },
    #[error("unknown key `{0}`")]
    UnknownKey(String),
    #[error("missing required key `{0}`")]
    Missing(&'static str),
    #[error("invalid `{field}`: {reason}")]
    Invalid { field: String, reason: String },
}

impl ConfigError {
    pub fn invalid(field: impl Into<String>, reason: impl Into<String>) -> Self {
        ConfigError::Invalid { field: field.into(), reason: reason.into() }
    }
}

/// Contract violations on game histories.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GameError {
    #[error("history `{0}` is terminal")]
    Terminal(String),
    #[error("history `{0}` is not terminal")]
    NotTerminal(String),
    #[error("action {action} is not legal at `{state}`")]
    IllegalAction { action: String, state: String },
    #[error("player {player} has no private card yet at `{state}`")]
    NoObservation { player: usize, state: String },
}

/// Failures reading or writing checkpoint files.
#[derive(Debug, Error)]
pub enum CheckpointError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("bad magic: expected {expected}")]
    BadMagic { expected: &'static str },
    #[error("unsupported checkpoint version {0}")]
    Version(u32),
    #[error("corrupt checkpoint: {0}")]
    Corrupt(String),
    #[error("checkpoint does not match this game: {0}")]
    Mismatch(String),
}

/// Raised by network fitting when the objective stops being finite.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum TrainError {
    #[error("non-finite loss {loss} at epoch {epoch} (lr {lr}, {records} records)")]
    NonFiniteLoss { epoch: usize, loss: f64, lr: f64, records: usize },
    #[error("empty training memory")]
    EmptyMemory,
}

/// The information set has zero reach under the profile, so no posterior exists.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("information set {0} is unreachable under the given profile")]
pub struct UnreachableInfoset(pub String);

/// Invalid sampling configurations and impossible sampling weights.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum SamplingError {
    #[error("robust sampling needs k >= 1")]
    ZeroK,
    #[error("on-policy robust sampling is only defined for k = 1 (got {0})")]
    OnPolicyK(usize),
    #[error("terminal {0} has zero sampling reach")]
    ZeroReach(u32),
}

/// Failures of the experiment runner and the trace tools.
#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("manifest: {0}")]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Checkpoint(#[from] CheckpointError),
    #[error("training: {0}")]
    Train(#[from] TrainError),
    #[error("trace: {0}")]
    Trace(String),
    #[error("traces come from different games: {0}")]
    MismatchedGames(String),
}
