use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// An operator was asked for a table entry it does not carry. Absence
    /// means "unknown", never "zero".
    #[error("index {index} is outside the operator window [{lo}, {hi}]")]
    OutsideWindow { index: i64, lo: i64, hi: i64 },

    #[error("inadmissible tuple {tuple}: index {index} is outside the window")]
    Inadmissible { tuple: String, index: i64 },

    #[error("invalid parameters: {0}")]
    InvalidParameters(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("malformed input file: {0}")]
    Load(String),
}

impl Error {
    /// Re-tag an `OutsideWindow` lookup failure as inadmissibility of `tuple`.
    pub(crate) fn inadmissible(self, tuple: impl std::fmt::Display) -> Error {
        match self {
            Error::OutsideWindow { index, .. } => Error::Inadmissible {
                tuple: tuple.to_string(),
                index,
            },
            other => other,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
