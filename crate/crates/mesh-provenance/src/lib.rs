//! Conceptual-provenance tracking for new MeSH descriptors.
//!
//! The library covers the full pipeline: streaming the annual descriptor and
//! supplementary-record XML releases into an indexed model, diffing
//! consecutive years to find new descriptors, mining the free-text indexing
//! notes for previous hosts, assigning provenance categories and codes, and
//! aggregating the per-year annotations into summary statistics.
//!
//! The `meshprov` binary in this workspace wires these stages into a CLI;
//! everything it does is available directly through [`pipeline`].

pub mod config;
pub mod error;
pub mod harvest;
pub mod model;
pub mod notes;
pub mod parse;
pub mod pipeline;
pub mod provenance;
pub mod report;

pub use error::{Error, Result};
