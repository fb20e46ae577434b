// SPDX-License-Identifier: MIT OR Apache-2.0

use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum TrendsegError {
    #[error(transparent)]
    Core(#[from] trendseg_core::Error),
    #[error("invalid signal spec: {0}")]
    InvalidSpec(String),
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },
    #[error("column {0} not found")]
    MissingColumn(String),
    #[error("{0}")]
    Output(String),
}

pub type Result<T, E = TrendsegError> = std::result::Result<T, E>;
