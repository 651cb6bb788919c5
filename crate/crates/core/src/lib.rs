//! Probing tasks for pre-trained code models.
//!
//! The crate builds method-level datasets from a Java corpus, stores frozen
//! per-layer embeddings in a compact binary format, trains linear probes on
//! them and renders the results.

pub mod corpus;
pub mod embedstore;
pub mod error;
pub mod hash;
pub mod manifest;
pub mod pipeline;
pub mod probe;
pub mod report;
pub mod syntax;
pub mod tasks;

pub use error::{Error, Result};
