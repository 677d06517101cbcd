use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("game must have at least 2 players, got {0}")]
    TooFewPlayers(usize),

    #[error(
        "{players} players exceeds the configured maximum of {max} (constraint rows grow as 2^n)"
    )]
    TooManyPlayers { players: usize, max: usize },

    #[error("player index {index} out of range for a {players}-player game")]
    PlayerOutOfRange { index: usize, players: usize },

    #[error("coalition {0:?} has no value and strict mode is enabled")]
    MissingCoalition(Vec<usize>),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("value is not finite: {0}")]
    NonFiniteInput(String),

    #[error("core is empty")]
    EmptyCore,

    #[error("polyhedron is empty")]
    EmptyPolyhedron,

    #[error("projection did not converge after {iterations} sweeps (residual {residual:e})")]
    ProjectionNonConvergence { iterations: usize, residual: f64 },

    #[error("LP solver failed: {0}")]
    LpNumerical(String),

    #[error("invalid weight matrix: {0}")]
    InvalidWeights(String),

    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),

    #[error("unsupported topology `{0}`")]
    UnsupportedTopology(String),

    #[error("invalid mixed strategy: {0}")]
    InvalidStrategy(String),

    #[error("invalid vector payoff game: {0}")]
    InvalidGame(String),

    #[error(
        "separation condition unsatisfiable at this point: value {value:e} exceeds {threshold:e}"
    )]
    ApproachabilityUnsatisfiable { value: f64, threshold: f64 },

    #[error(
        "reward of player {player} at t={t} has norm {norm:e} above the declared bound {bound:e}"
    )]
    PolicyBound {
        t: usize,
        player: usize,
        norm: f64,
        bound: f64,
    },

    #[error("non-finite {quantity} for player {player} at t={t}")]
    NonFinite {
        t: usize,
        player: usize,
        quantity: &'static str,
    },

    #[error("invariant violated at t={t}: {what}")]
    InvariantViolation { t: usize, what: String },

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
