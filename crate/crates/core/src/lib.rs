//! Synthesis and evaluation engine for assembly-instruction page datasets.
//!
//! The crate loads hand-annotated instruction corpora, cuts labeled
//! component patches from them, lays out new pages with a context-aware
//! cut-paste procedure (plus naive cut-paste and instance-switching
//! baselines), writes the results as annotated datasets, and scores
//! detection or segmentation outputs with COCO-style metrics.

pub mod baselines;
pub mod cli;
pub mod compositor;
pub mod corpus;
pub mod error;
pub mod fixture;
pub mod geometry;
pub mod layout;
pub mod metrics;
pub mod pipeline;
pub mod raster;
pub mod seed;

use sha2::{Digest, Sha256};

pub use error::{Error, Result};

pub const GENERATOR: &str = env!("CARGO_PKG_NAME");

/// Short hash identifying the generator build, recorded in every dataset
/// manifest.
pub fn generator_version() -> String {
    let tag = format!("{}/{}", GENERATOR, env!("CARGO_PKG_VERSION"));
    let digest = hex::encode(Sha256::digest(tag.as_bytes()));
    format!("{}+{}", env!("CARGO_PKG_VERSION"), &digest[..12])
}
