use tiltlab_airy::AiryError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },
    #[error("domain error: {0}")]
    Domain(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("invalid state: {0}")]
    InvalidState(String),
    #[error("constraint set is empty: {0}")]
    Infeasible(String),
    #[error(
        "coupling broken after {step} steps at path {path}, site {site}: lower {lower} > upper {upper}\n{dump}"
    )]
    CouplingBroken {
        step: u64,
        path: usize,
        site: i64,
        lower: i32,
        upper: i32,
        dump: String,
    },
    #[error(transparent)]
    Airy(#[from] AiryError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    TomlDe(#[from] toml::de::Error),
    #[error(transparent)]
    TomlSer(#[from] toml::ser::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
