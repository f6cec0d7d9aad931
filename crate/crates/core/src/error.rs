use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("Fock space dimension {dim} exceeds the configured cap of {cap}")]
    ResourceLimit { dim: u128, cap: usize },

    #[error("matrix is not unitary (max |U†U - I| = {0:.3e})")]
    NotUnitary(f64),

    #[error("matrix is not Hermitian (max |A - A†| = {0:.3e})")]
    NotHermitian(f64),

    #[error("not a physical density matrix: {0}")]
    NotPhysical(String),

    #[error("photon number mismatch: input carries {input}, output carries {output}")]
    PhotonNumberMismatch { input: usize, output: usize },

    #[error("rank deficient: got rank {rank}, need {required}")]
    RankDeficient { rank: usize, required: usize },

    #[error("solver did not converge (residual {residual:.3e})")]
    Convergence { residual: f64 },

    #[error("observable invariant disagrees: direct {direct}, from relation {relation}")]
    InvariantMismatch { direct: f64, relation: f64 },

    #[error("transfer matrix structure violated: {0}")]
    BlockStructure(String),

    #[error("frame check failed: {0}")]
    FrameCheck(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
