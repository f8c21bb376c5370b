use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration has {found} sites, expected {expected}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("site {site} out of range 1..={len}")]
    SiteOutOfRange { site: usize, len: usize },

    #[error("bond {bond} out of range 1..={max}")]
    BondOutOfRange { bond: usize, max: usize },

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("chain length {0} outside supported range 2..=14")]
    UnsupportedLength(usize),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("drive is near but not on resonance: {0}")]
    IncommensurateDrive(String),

    #[error(
        "power series does not converge for |H|*dt = {norm_dt:.3e}; use a time step below {suggested_dt:.3e}"
    )]
    SeriesNonConvergence { norm_dt: f64, suggested_dt: f64 },

    #[error("numerical integrity failure: {0}")]
    Integrity(String),

    #[error("periods per block {ratio} = omega0/(2 J0) is not an integer")]
    NonIntegerRatio { ratio: f64 },

    #[error("bad protocol token {token:?} at position {position}")]
    BadToken { token: String, position: usize },

    #[error("empty protocol sequence")]
    EmptySequence,

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("unitary cache: {0}")]
    Cache(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
