use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("gamma has a pole at {0}")]
    Pole(f64),

    #[error("result overflows f64: {0}")]
    Overflow(String),

    /// A series or quadrature ran out of budget before meeting its tolerance.
    #[error("no convergence: {0}")]
    NonConvergence(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("insufficient history: need at least {needed} samples, have {have}")]
    InsufficientHistory { needed: usize, have: usize },

    /// The value field blew up during a backward solve.
    #[error("solver diverged at time index {step}: |V| = {magnitude:e}")]
    Divergence { step: usize, magnitude: f64 },

    #[error("trajectory left the admissible region at t = {time}: x = {state:?}")]
    StateEscape { time: f64, state: Vec<f64> },
}

pub type Result<T> = std::result::Result<T, Error>;
