use crate::dominance::DominanceWitness;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid poset: {0}")]
    InvalidPoset(String),
    #[error("poset file line {line}: {msg}")]
    PosetSyntax { line: usize, msg: String },
    #[error("product of an empty factor list")]
    EmptyFactors,
    #[error("upper-set enumeration refused: {elements} elements exceeds cap {cap}")]
    UpperSetCap { elements: usize, cap: usize },
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),
    #[error("distributions are defined on different posets")]
    MismatchedPosets,
    #[error("stochastic dominance fails (gap {:.3e})", .0.gap)]
    NotDominated(Box<DominanceWitness>),
    #[error("stochastic dominance holds; no witness exists")]
    Dominated,
    #[error("invalid covariance: {0}")]
    InvalidCovariance(String),
    #[error("invalid kernel: {0}")]
    InvalidKernel(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("count law is not ultra log-concave at k = {k}")]
    NotUltraLogConcave { k: usize },
    #[error("dissection depth {depth} exceeds cap {cap}")]
    DepthCap { depth: u32, cap: u32 },
    #[error("state space of {states} states exceeds cap {cap}")]
    StateSpaceCap { states: usize, cap: usize },
    #[error("reweighting function has zero expectation")]
    ZeroNormalizer,
    #[error("function is not monotone on the poset")]
    NotMonotone,
    #[error("every test-function pair is constant over the replicates")]
    DegenerateFamily,
    #[error("MCMC stationarity check failed: {0}")]
    NonConvergence(String),
    #[error("config error at `{field}`: {msg}")]
    Config { field: String, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub(crate) fn config(field: impl Into<String>, msg: impl Into<String>) -> Self {
        Error::Config { field: field.into(), msg: msg.into() }
    }
}
