//! Error type shared by every module of the crate.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("denominator vanishes on the root enclosure")]
    DenominatorVanishes,
    #[error("zero test inconclusive: symbolic remainder is nonzero but the enclosure contains 0")]
    Inconclusive,
    #[error("symbolic and numeric zero tests disagree")]
    ZeroTestDisagreement,
    #[error("pole on the unit circle does not cancel (invalid perturbation scheme)")]
    PoleOnCircle,
    #[error("singular Fourier block n = {0}")]
    SingularBlock(usize),
    #[error("boundary curves are degenerate (separation {0:e})")]
    CurveDegenerate(f64),
    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("Newton iteration diverged")]
    NewtonDiverged,
    #[error("branch lost at a = {0}")]
    BranchLost(f64),
    #[error("insufficient samples for a scaling fit ({0})")]
    InsufficientSamples(usize),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
