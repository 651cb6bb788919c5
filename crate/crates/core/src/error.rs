use std::io;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::embedstore::FormatError;
use crate::syntax::SyntaxError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error("{}:{line}: {message}", path.display())]
    Parse { path: PathBuf, line: usize, message: String },
    #[error("corpus root {} is missing or unreadable: {reason}", path.display())]
    CorpusRoot { path: PathBuf, reason: String },
    #[error(transparent)]
    Syntax(#[from] SyntaxError),
    #[error("{task}: class {class} empty")]
    EmptyClass { task: String, class: u32 },
    #[error("dataset: {0}")]
    Dataset(String),
    #[error(transparent)]
    Format(#[from] FormatError),
    #[error("probe: {0}")]
    Probe(String),
    #[error("report: {0}")]
    Report(String),
    #[error("config: {0}")]
    Config(String),
}

impl Error {
    pub fn io(path: impl AsRef<Path>, source: io::Error) -> Self {
        Error::Io { path: path.as_ref().to_path_buf(), source }
    }
}
