use std::path::PathBuf;

use crate::corpus::Month;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("failed to read {path}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("line {line}: {message}")]
    Record { line: usize, message: String },

    #[error("duplicate paper id {0:?}")]
    DuplicatePaper(String),

    #[error("invalid date {0:?} (expected YYYY-MM between 1900-01 and 2100-12)")]
    InvalidDate(String),

    #[error("invalid author id {0:?}")]
    InvalidAuthor(String),

    #[error("paper {0:?} has no authors")]
    NoAuthors(String),

    #[error("paper {paper:?} lists author {author:?} more than once")]
    DuplicateAuthor { paper: String, author: String },

    #[error("unknown author {0:?}")]
    UnknownAuthor(String),

    #[error("unknown paper {0:?}")]
    UnknownPaper(String),

    #[error("macro body {0:?} is not used by any paper")]
    UnknownMacro(String),

    #[error("node {0} is not part of the graph")]
    UnknownNode(usize),

    #[error("inheritance graph has no source papers")]
    NoSources,

    #[error("graph has no author nodes")]
    NoAuthorNodes,

    #[error("empty input: {0}")]
    EmptyInput(String),

    #[error("no matchable months for {setting}; months without controls: {}", format_months(.empty_months))]
    NoMatches {
        setting: String,
        empty_months: Vec<Month>,
    },

    #[error("too few {what}: need at least {needed}, found {found}")]
    TooFew {
        what: String,
        needed: usize,
        found: usize,
    },

    #[error("degenerate training split: {0}")]
    DegenerateSplit(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("malformed graph: {0}")]
    MalformedGraph(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

fn format_months(months: &[Month]) -> String {
    if months.is_empty() {
        return "none".to_string();
    }
    months
        .iter()
        .map(|m| m.to_string())
        .collect::<Vec<_>>()
        .join(",")
}
