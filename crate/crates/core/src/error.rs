use std::io;
use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid UTF-8 at byte offset {offset}")]
    InvalidUtf8 { offset: usize },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error("{}: invalid UTF-8 at byte offset {offset}", path.display())]
    FileEncoding { path: PathBuf, offset: usize },

    #[error("{}:{line}: expected 2 tab-separated columns, found {found}", path.display())]
    MalformedLexiconLine {
        path: PathBuf,
        line: usize,
        found: usize,
    },

    #[error("{}:{line}: column is empty after normalization", path.display())]
    EmptyLexiconField { path: PathBuf, line: usize },

    #[error("token {token:?} has no lemma; lemmatize the document first")]
    MissingLemma { token: String },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("at least one reference summary is required")]
    NoReferences,

    #[error("score is undefined: the references contain no grams")]
    UndefinedScore,

    #[error("{}: topic has no reference summaries", path.display())]
    TopicWithoutReferences { path: PathBuf },

    #[error("{}: corpus contains no topics", path.display())]
    EmptyCorpus { path: PathBuf },

    #[error("{}: {source}", path.display())]
    Manifest {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Errors caused by how the tool was invoked rather than by the data.
    pub fn is_usage(&self) -> bool {
        matches!(self, Error::InvalidConfig(_))
    }
}
