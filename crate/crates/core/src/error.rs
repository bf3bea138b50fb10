use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Invalid protocol or run parameters.
    #[error("configuration error: {0}")]
    Config(String),

    /// The mean decay rate vanishes, so none of the tail sums converge.
    #[error("degenerate rate kernel: mean decay rate is {gamma0}")]
    DegenerateKernel { gamma0: f64 },

    #[error("divergent geometric tail: |ratio| = {magnitude}")]
    DivergentTail { magnitude: f64 },

    /// The adiabatic expansion is taken around a point where the coupling vanishes.
    #[error("adiabatic approximation undefined at t = {t}: coupling vanishes")]
    UndefinedApproximation { t: f64 },

    #[error("length mismatch: expected {expected} samples, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("oracle cost {cost} exceeds budget {budget}")]
    CostBudget { cost: u64, budget: u64 },
}

impl Error {
    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    /// True for failures of the numerics rather than of the inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::DegenerateKernel { .. } | Error::DivergentTail { .. } | Error::CostBudget { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
