use std::io;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("non-ACGT in exact context: {0:?}")]
    NonAcgt(char),
    #[error("k must be in 2..={max}, got {0}", max = crate::seq::MAX_K)]
    InvalidK(usize),
    #[error("wrong word length: expected {expected}, found {found}")]
    InvalidLength { expected: usize, found: usize },
    #[error("read below k ({len} < {k})")]
    ReadBelowK { len: usize, k: usize },
    #[error("not a walk: nodes {0} and {1} do not overlap by k-1")]
    NotAWalk(usize, usize),
    #[error("no sequences")]
    NoSequences,
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("malformed input: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
