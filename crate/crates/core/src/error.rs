use thiserror::Error;

use crate::multipoly::Var;

#[derive(Debug, Error)]
pub enum FockError {
    #[error("capacity: {0}")]
    Capacity(String),
    #[error("parity: {0}")]
    Parity(String),
    #[error("unbound variable {0}")]
    Binding(Var),
    #[error("parse error at {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("wrong level set for this family: {0}")]
    Family(String),
    #[error("shape: {0}")]
    Shape(String),
    #[error("seed rejected: {0}")]
    RejectedSeed(String),
    #[error("no consensus across seeds: {0}")]
    Inconclusive(String),
}

pub type Result<T> = std::result::Result<T, FockError>;
