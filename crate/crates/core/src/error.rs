use thiserror::Error;

/// Errors produced by the automaton, the robot model, the world and the runner.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid action count {0}: at least two actions are required")]
    InvalidActionCount(usize),

    #[error("invalid probability vector: {0}")]
    InvalidProbabilities(String),

    #[error("action index {index} out of range for {count} actions")]
    InvalidAction { index: usize, count: usize },

    #[error("unknown action id {0} (expected 1..=6)")]
    UnknownActionId(u8),

    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("invalid feedback: {0}")]
    InvalidFeedback(String),

    #[error("feedback of kind {feedback} cannot drive a {scheme} scheme")]
    IncompatibleFeedback {
        feedback: &'static str,
        scheme: &'static str,
    },

    #[error("Q-model feedback has no update rule")]
    UnsupportedModel,

    #[error("random draw {0} outside [0, 1)")]
    InvalidDraw(f64),

    #[error("invalid distance {0}: distances must be non-negative")]
    InvalidDistance(f64),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("infeasible world: {0}")]
    InfeasibleWorld(String),

    #[error("configuration error: {0}")]
    Config(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
