use thiserror::Error;

/// Failure modes shared by every stage of the pipeline.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("velocity {velocity} is resonant (|L_k| = {lk:.3e} at k = {k})")]
    ResonantVelocity { velocity: f64, k: f64, lk: f64 },

    #[error("root count mismatch in [{re_lo}, {re_hi}] x [{im_lo}, {im_hi}]: winding number {winding}, found {found}")]
    RootCountMismatch {
        re_lo: f64,
        re_hi: f64,
        im_lo: f64,
        im_hi: f64,
        winding: i64,
        found: usize,
    },

    #[error("iteration did not converge: {0}")]
    NotConverged(String),

    #[error("branch mismatch {mismatch:.3e} at xi = 0 exceeds {limit:.1e}; increase n_pairs")]
    TruncationWarning { mismatch: f64, limit: f64 },

    #[error("quadrature failed: {0}")]
    QuadratureFail(String),

    #[error("det Q(z) has no sign change in ({lo}, {hi}]")]
    NoCandidate { lo: f64, hi: f64 },

    #[error("null space is not rank one (smallest singular values {s_min:.3e}, {s_next:.3e})")]
    NullspaceNotRankOne { s_min: f64, s_next: f64 },

    #[error("no admissible traveling wave at V = {velocity}")]
    NoAdmissibleWave { velocity: f64 },

    #[error("closed-form kernel jet needs a single real root; found {roots} at V = {velocity}")]
    RegimeMismatch { velocity: f64, roots: usize },

    #[error("no sign change of q(0) in [{lo}, {hi}]")]
    NoSignChange { lo: f64, hi: f64 },

    #[error("quartic has no positive real root")]
    NoPositiveRoot,

    #[error("numeric blow-up at t = {t}: |u| = {value:.3e}")]
    NumericBlowup { t: f64, value: f64 },

    #[error("wave profile cannot cover xi in [{lo}, {hi}]")]
    ProfileRange { lo: f64, hi: f64 },

    #[error("no front: displacement has no sign change")]
    NoFront,

    #[error("inconclusive run: front reached n = {front} (chain length {n}) at t = {t}; enlarge N")]
    Inconclusive { front: usize, n: usize, t: f64 },

    #[error("io: {0}")]
    Io(String),

    #[error("usage: {0}")]
    Usage(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl Error {
    /// Stable upper-case name used in CSV flag columns.
    pub fn code(&self) -> &'static str {
        match self {
            Error::InvalidParameter(_) => "INVALID_PARAMETER",
            Error::ResonantVelocity { .. } => "RESONANT_VELOCITY",
            Error::RootCountMismatch { .. } => "ROOT_COUNT_MISMATCH",
            Error::NotConverged(_) => "NOT_CONVERGED",
            Error::TruncationWarning { .. } => "TRUNCATION_WARNING",
            Error::QuadratureFail(_) => "QUADRATURE_FAIL",
            Error::NoCandidate { .. } => "NO_CANDIDATE",
            Error::NullspaceNotRankOne { .. } => "NULLSPACE_NOT_RANK_ONE",
            Error::NoAdmissibleWave { .. } => "NO_ADMISSIBLE_WAVE",
            Error::RegimeMismatch { .. } => "REGIME_MISMATCH",
            Error::NoSignChange { .. } => "NO_SIGN_CHANGE",
            Error::NoPositiveRoot => "NO_POSITIVE_ROOT",
            Error::NumericBlowup { .. } => "NUMERIC_BLOWUP",
            Error::ProfileRange { .. } => "PROFILE_RANGE",
            Error::NoFront => "NO_FRONT",
            Error::Inconclusive { .. } => "INCONCLUSIVE",
            Error::Io(_) => "IO",
            Error::Usage(_) => "USAGE",
        }
    }

    /// Process exit status: 2 usage, 3 no solution, 4 numeric failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Usage(_) | Error::InvalidParameter(_) | Error::Io(_) => 2,
            Error::ResonantVelocity { .. }
            | Error::NoCandidate { .. }
            | Error::NoAdmissibleWave { .. }
            | Error::RegimeMismatch { .. }
            | Error::NoSignChange { .. }
            | Error::NoPositiveRoot
            | Error::NoFront
            | Error::Inconclusive { .. } => 3,
            _ => 4,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
