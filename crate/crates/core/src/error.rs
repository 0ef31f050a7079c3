//! Crate-wide error type.

use thiserror::Error;

/// Everything that can go wrong across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("graph must have at least one node")]
    EmptyGraph,
    #[error("node index {index} out of range for a graph with {count} nodes")]
    NodeOutOfRange { index: usize, count: usize },
    #[error("edge endpoint {index} out of range for a graph with {count} nodes")]
    EndpointOutOfRange { index: usize, count: usize },
    #[error("edge weight must be a positive finite number, got {weight}")]
    BadEdgeWeight { weight: f64 },
    #[error("{labels} labels supplied for {nodes} nodes")]
    LabelCountMismatch { labels: usize, nodes: usize },
    #[error("graph is disconnected; the requested quantity is not uniquely determined")]
    Disconnected,
    #[error("node {index} has no incident edges")]
    IsolatedNode { index: usize },

    #[error("player count {players} outside the supported range {min}..={max}")]
    PlayerCountOutOfRange { players: usize, min: usize, max: usize },
    #[error("player {player} out of range for a game with {players} players")]
    PlayerOutOfRange { player: usize, players: usize },
    #[error("coalition mask {mask} uses bits beyond {players} players")]
    CoalitionOutOfRange { mask: u64, players: usize },
    #[error("value table holds {got} entries, expected {expected}")]
    ValueTableSize { got: usize, expected: usize },
    #[error("the empty coalition must have value 0, got {value}")]
    NonzeroEmptyValue { value: f64 },
    #[error("values must be finite; entry {index} is {value}")]
    NonFiniteValue { index: usize, value: f64 },
    #[error("{context}: expected length {expected}, got {got}")]
    LengthMismatch {
        context: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("games must have the same player count, got {left} and {right}")]
    PlayerCountMismatch { left: usize, right: usize },

    #[error("linear solve stopped at residual {residual:e}, above the requested tolerance")]
    SolveFailed { residual: f64 },

    #[error("random walk exceeded the cap of {cap} steps before reaching the target")]
    StepCapExceeded { cap: usize },
    #[error("{discarded} of {episodes} episodes hit the step cap, more than 1%")]
    TooManyDiscardedEpisodes { discarded: usize, episodes: usize },
    #[error("episode count must be at least 1")]
    NoEpisodes,
    #[error("step cap must be at least 1")]
    ZeroStepCap,
    #[error("path enumeration exceeded the guard of {guard} paths")]
    PathEnumerationOverflow { guard: usize },

    #[error("a single-player game only admits alpha = 1, got {alpha}")]
    BadAlphaForSinglePlayer { alpha: f64 },
    #[error("parameters must be finite, got {value}")]
    NonFiniteParameter { value: f64 },
    #[error("permutation enumeration supports at most {max} players, got {players}")]
    TooManyPlayersForPermutations { players: usize, max: usize },

    #[error("payoff matrix must be nonempty and rectangular with finite entries")]
    BadMatrix,
    #[error("every player needs at least one action")]
    NoActions,
    #[error("payoff table for player {player} holds {got} entries, expected {expected}")]
    PayoffTableSize {
        player: usize,
        got: usize,
        expected: usize,
    },
    #[error("linear program failed to terminate")]
    LpStalled,

    #[error("invalid input: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
