use thiserror::Error;

/// Errors produced by the game, deception, simulation and scenario layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("player index {index} out of range for a {players}-player game")]
    PlayerOutOfRange { index: usize, players: usize },

    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error("matrix {0} is singular")]
    Singular(String),

    #[error("invalid game: {0}")]
    InvalidGame(String),

    #[error("invalid deception structure: {0}")]
    InvalidDeception(String),

    #[error("deception amplitude {delta:?} lies outside the stability set")]
    OutsideDelta { delta: Vec<f64> },

    #[error("degenerate configuration: {0}")]
    Degenerate(String),

    #[error("reference {jref} is not attainable")]
    NotAttainable { jref: f64 },

    #[error("no stable branch reaches reference {jref}")]
    NoStableBranch { jref: f64 },

    #[error("game is not strongly monotone (margins {margins:?})")]
    NotStronglyMonotone { margins: Vec<f64> },

    #[error("Newton iteration did not converge: {0}")]
    NewtonFailed(String),

    #[error("equilibrium is not exponentially stable: {0}")]
    UnstableEquilibrium(String),

    #[error("invalid probe configuration: {0}")]
    InvalidProbe(String),

    #[error("empty search box [{lo}, {hi}]")]
    EmptyBox { lo: f64, hi: f64 },

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("simulation diverged at t = {t}: {reason}")]
    Diverged { t: f64, reason: String },

    #[error("scenario errors:\n  {}", .0.join("\n  "))]
    Scenario(Vec<String>),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// Process exit code used by the command line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Scenario(_) => 2,
            Error::Diverged { .. } => 4,
            Error::Io(_) => 1,
            _ => 3,
        }
    }

    /// Short machine-readable class name written into reports.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Scenario(_) => "parse",
            Error::Diverged { .. } => "instability",
            Error::Io(_) => "io",
            _ => "precondition",
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
