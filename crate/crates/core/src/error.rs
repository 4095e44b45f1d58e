use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::corpus::ComponentKind;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("page {page_id}: image file {} not found", path.display())]
    MissingImage { page_id: String, path: PathBuf },

    #[error("{}: cannot decode png: {reason}", path.display())]
    Png { path: PathBuf, reason: String },

    #[error("cannot encode png: {0}")]
    PngEncode(String),

    #[error("{}: malformed json: {reason}", path.display())]
    Json { path: PathBuf, reason: String },

    #[error("page {page_id}: {reason}")]
    InvalidPage { page_id: String, reason: String },

    #[error("page {page_id}, instance {instance_id}: {reason}")]
    InvalidInstance { page_id: String, instance_id: u32, reason: String },

    #[error("manifest entry {index} (page {page_id}): {reason}")]
    InvalidManifestEntry { index: usize, page_id: String, reason: String },

    #[error("component bank has no {0} patches")]
    MissingComponent(ComponentKind),

    #[error("component id {0} is not in the bank")]
    DanglingComponent(u32),

    #[error("could not place mandatory {0} component in area {1}")]
    Unplaceable(ComponentKind, usize),

    #[error("instance switching needs at least 2 pages with speech bubbles, found {0}")]
    TooFewBubblePages(usize),

    #[error("invalid prediction {index}: {reason}")]
    InvalidPrediction { index: usize, reason: String },

    #[error("invalid configuration: {0}")]
    Config(String),
}

impl Error {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        Error::Io { path: path.to_path_buf(), source }
    }

    pub fn json(path: &Path, err: impl std::fmt::Display) -> Self {
        Error::Json { path: path.to_path_buf(), reason: err.to_string() }
    }
}
