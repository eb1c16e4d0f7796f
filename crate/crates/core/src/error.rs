use thiserror::Error;

use crate::mdp::Violation;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown state `{0}`")]
    UnknownState(String),
    #[error("unknown action `{0}`")]
    UnknownAction(String),
    #[error("duplicate state name `{0}`")]
    DuplicateState(String),
    #[error("duplicate action name `{0}`")]
    DuplicateAction(String),
    #[error("state `{0}` is not covered by the observation partition")]
    Unobserved(String),
    #[error("invalid history: {0}")]
    InvalidHistory(String),
    #[error("model has {} violation(s); first: {}", .0.len(), .0.first().map(|v| v.to_string()).unwrap_or_default())]
    InvalidModel(Vec<Violation>),
    #[error(
        "belief state `{aug_state}` mixes `{state}` and `{other}` whose enabled actions differ \
         (observation-equivalent states must enable the same actions)"
    )]
    MixedEnabledActions {
        aug_state: String,
        state: String,
        other: String,
    },
    #[error("malformed input: {0}")]
    Format(String),
    #[error("strategy is undefined at reachable state `{0}`")]
    UndefinedStrategy(String),
    #[error("history length {depth} exceeds the oracle bound {bound}")]
    DepthExceeded { depth: usize, bound: usize },
    #[error("contract violation: {0}")]
    Contract(String),
    #[error("invalid scenario: {0}")]
    Scenario(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Toml(#[from] toml::de::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
