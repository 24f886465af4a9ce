use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("unsupported parameter: {0}")]
    Unsupported(String),
    #[error("inadmissible fusion triple (r={r}, s={s}, t={t})")]
    Fusion { r: u32, s: u32, t: u32 },
    #[error("level {level} is outside the tower (max level {max})")]
    OutOfTower { level: usize, max: usize },
    #[error("index error: {0}")]
    Index(String),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("ill-conditioned model: {0}")]
    IllConditioned(String),
    #[error("non-finite value in {0}")]
    NonFinite(String),
    #[error("cache: {0}")]
    Cache(String),
    #[error("config: {0}")]
    Config(String),
    #[error("unknown check {name:?}; available: {available}")]
    UnknownCheck { name: String, available: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
