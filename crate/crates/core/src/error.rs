use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A caller broke an operation's precondition (malformed state or action map).
    #[error("contract violation: {0}")]
    Contract(String),

    /// An argument is outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("capacity exceeded: {what} is {got}, limit is {limit}")]
    Capacity {
        what: &'static str,
        got: usize,
        limit: usize,
    },

    /// The profile has no probability for a state the operation needs.
    #[error("profile undefined at state {state} for player {player}")]
    ProfileUndefined { state: String, player: usize },

    #[error("invalid profile: {0}")]
    InvalidProfile(String),

    #[error("profile is not totally mixed: probability {prob} at state {state}, player {player}")]
    NotTotallyMixed {
        state: String,
        player: usize,
        prob: f64,
    },

    #[error("serialization error: {0}")]
    Serde(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Serde(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Serde(e.to_string())
    }
}
