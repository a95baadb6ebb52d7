use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid probability: {0}")]
    InvalidProbability(String),
    #[error("signal is not informative: p_hH = {p_hh} <= p_hL = {p_hl}")]
    NonInformative { p_hh: f64, p_hl: f64 },
    #[error("inconsistent counts: {0}")]
    InconsistentCounts(String),
    #[error("group {index} plays a dominated strategy (bl = {beta_l}, bh = {beta_h})")]
    DominatedStrategyInProfile { index: usize, beta_l: f64, beta_h: f64 },
    #[error("invalid group: {0}")]
    InvalidGroup(String),
    #[error("invalid utility table: {0}")]
    InvalidUtility(String),
    #[error("argument outside the valid domain: {0}")]
    DomainError(String),
    #[error("deviation fraction {xi} is not below the cap {cap}")]
    InfeasibleXi { xi: f64, cap: f64 },
    #[error("deviator count {k} exceeds the {available} available minority agents")]
    KTooLarge { k: usize, available: usize },
    #[error("enumeration of {size} deviations exceeds the budget of {budget}")]
    ExplosionGuard { size: u128, budget: u128 },
    #[error("no sign change on [{lo}, {hi}]")]
    NoBracket { lo: f64, hi: f64 },
    #[error("trials must be at least 1")]
    InvalidTrials,
    #[error("parse error: {0}")]
    ParseError(String),
    #[error("validation error: {0}")]
    ValidationError(String),
    #[error("{path}: {message}")]
    Io { path: String, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;
