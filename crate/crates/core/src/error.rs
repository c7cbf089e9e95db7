use thiserror::Error;

use crate::sdp::SdpError;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is not Hermitian (max deviation {deviation:.3e})")]
    NotHermitian { deviation: f64 },

    #[error("non-finite matrix entry")]
    NonFinite,

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("invalid POVM: {0}")]
    InvalidPovm(String),

    #[error("invalid mother observable: {0}")]
    InvalidMother(String),

    #[error("invalid assemblage: {0}")]
    InvalidAssemblage(String),

    #[error("invalid hidden-state model: {0}")]
    InvalidModel(String),

    #[error("invalid Bell inequality: {0}")]
    InvalidInequality(String),

    #[error("parameter out of range: {0}")]
    OutOfRange(String),

    #[error("eigensolver did not converge after {sweeps} sweeps (off-diagonal residual {residual:.3e})")]
    EigenNonConvergence { sweeps: usize, residual: f64 },

    #[error("state has Schmidt rank {rank}, full rank {dim} required")]
    RankDeficient { rank: usize, dim: usize },

    #[error("ill-conditioned input: {0}")]
    Conditioning(String),

    #[error("size cap exceeded: {what} = {value} > {cap}")]
    CapExceeded {
        what: &'static str,
        value: usize,
        cap: usize,
    },

    #[error("bracket [{lo}, {hi}] does not straddle a transition (same verdict at both ends)")]
    Bracket { lo: f64, hi: f64 },

    #[error("inconclusive: {0}")]
    Inconclusive(String),

    #[error("certificate rejected by independent check: {0}")]
    CertificateRejected(String),

    #[error("no structural factorization: {0}")]
    NotFactorizable(String),

    #[error("missing qubit value bound for an inequality with marginal terms")]
    MissingQubitBound,

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Sdp(#[from] SdpError),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
