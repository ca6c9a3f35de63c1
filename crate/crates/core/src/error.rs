use thiserror::Error;

/// Errors surfaced by basis construction, Hamiltonian assembly, solvers and
/// the analysis layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("basis dimension {dim} exceeds cap {cap}; raise the cap or use a reduced space")]
    BasisTooLarge { dim: usize, cap: usize },

    #[error(
        "matrix dimension {dim} exceeds dense cap {cap}; \
         use a momentum sector, the type-(ii) subspace or the windowed solver"
    )]
    DenseDimensionOverCap { dim: usize, cap: usize },

    #[error("periodic boundary requires q | M, got q = {q}, M = {m}")]
    IncommensurateCell { q: usize, m: usize },

    #[error("operation requires periodic boundary conditions")]
    RequiresPeriodic,

    #[error("operation requires zero disorder (translation symmetry is broken)")]
    RequiresCleanLattice,

    #[error("state is not normalizable (norm = {0:.3e})")]
    ZeroNorm(f64),

    #[error("correlation order {order} exceeds particle number {n}")]
    OrderExceedsParticles { order: usize, n: usize },

    #[error("no type-(ii) states found in the classified spectrum")]
    NoType2States,

    #[error("band selection is empty")]
    EmptyBandSelection,

    #[error("band is not gapped over the sweep: min gap {min_gap:.3e} at kappa index {kappa_index}, phi index {phi_index}")]
    GaplessBand {
        min_gap: f64,
        kappa_index: usize,
        phi_index: usize,
    },

    #[error("initial state leaks out of the requested subspace (projection residual {0:.3e})")]
    SubspaceResidual(f64),

    #[error("time step {dt} violates the schedule invariants (dt <= 0.1/J and dt <= T/1000)")]
    InvalidTimeStep { dt: f64 },

    #[error("windowed eigensolver did not converge: {0}")]
    WindowNotConverged(String),

    #[error("eigendecomposition failed")]
    EigenFailed,

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Serde(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
