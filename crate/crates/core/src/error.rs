use thiserror::Error;

use crate::purify::BoundBreach;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A player, action or length does not fit the game.
    #[error("usage error: {0}")]
    Usage(String),

    /// Malformed input data (bad distribution, bad game shape, bad file).
    #[error("validation error: {0}")]
    Validation(String),

    #[error("unsupported operation: {0}")]
    Unsupported(String),

    /// The input profile is too far from the equilibrium quality a stage needs.
    /// `player` is 0-based; the message shows it 1-based like the file formats.
    #[error("precondition violated: player {} has regret {regret:.3e} > allowed {allowed:.3e}", .player + 1)]
    Precondition {
        player: usize,
        regret: f64,
        allowed: f64,
    },

    #[error("invariant breach: {0}")]
    Breach(BoundBreach),

    #[error("instance too large: {what} needs {estimate} (limit {limit})")]
    TooLarge {
        what: String,
        estimate: f64,
        limit: f64,
    },

    #[error("infeasible generator spec: {0}")]
    Infeasible(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("json error in {context}: {source}")]
    Json {
        context: String,
        #[source]
        source: serde_json::Error,
    },
}
