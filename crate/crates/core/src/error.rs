use thiserror::Error;

/// Errors produced by the game, solver and search routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid policy: {0}")]
    InvalidPolicy(String),

    #[error("support violation at action {action}: p = {p} but q = 0")]
    SupportViolation { action: usize, p: f64 },

    #[error("anchor has zero probability at action {action}")]
    AnchorNotFullSupport { action: usize },

    #[error("joint action space has {joint} entries, exact evaluation limit is {limit}; use sampled mode")]
    TooLarge { joint: u128, limit: u128 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("no visited actions at the root; fall back to the prior")]
    NoVisitedActions,
}

pub type Result<T> = std::result::Result<T, Error>;
