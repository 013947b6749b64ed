use crate::circuit::CircuitError;
use crate::cnf::CnfError;
use crate::nogo::NogoError;
use crate::sampler::SamplerError;

/// Precondition failures of the bound and boosting computations.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum BoundError {
    #[error("model count {k_s} exceeds 2^{n}")]
    ModelCountOutOfRange { k_s: u64, n: u32 },
    #[error("the error bound only applies to satisfiable instances (k_s >= 1)")]
    Unsatisfiable,
    #[error("boosting level {level} is below the variable count {n}")]
    LevelBelowVars { level: u32, n: u32 },
    #[error("bound requires n >= 7, got n = {0}")]
    TooFewVars(u32),
    #[error("approximation degree {eps} exceeds 2^-(n+1) for n = {n}")]
    EpsTooLarge { eps: f64, n: u32 },
    #[error("approximation degree {0} must be finite and nonnegative")]
    InvalidEps(f64),
    #[error("cloning needs m_out > n_in >= 1, got n_in = {n_in}, m_out = {m_out}")]
    CloningShape { n_in: u64, m_out: u64 },
    #[error("probability {0} is outside [0, 1]")]
    NotAProbability(f64),
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Cnf(#[from] CnfError),
    #[error(transparent)]
    Circuit(#[from] CircuitError),
    #[error(transparent)]
    Bound(#[from] BoundError),
    #[error(transparent)]
    Sampler(#[from] SamplerError),
    #[error(transparent)]
    Nogo(#[from] NogoError),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
