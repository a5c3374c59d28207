//! Temporal social-network link analysis.
//!
//! The crate builds semester-level snapshot graphs from contact logs and
//! survey nominations, turns per-student survey answers into pairwise
//! agreement features, assembles labeled datasets for link-formation and
//! link-persistence prediction, reduces them with an in-repo SVD, trains a
//! small classifier suite, and ranks original features by back-projecting
//! classifier weights through squared right singular vectors.
//!
//! Because the underlying study data is private, the [`synth`] module
//! generates co-evolving networks with planted homophily, triadic closure,
//! and pruning strengths; the test suite validates the whole pipeline
//! against those planted mechanisms and against brute-force oracles.
//!
//! With the `parallel` feature (enabled by default) the data-parallel inner
//! loops fan out over rayon; results are identical to the sequential
//! fallback because all merges preserve input order.

pub mod attributes;
pub mod dataset;
pub mod error;
pub mod eval;
pub mod exec;
pub mod graphcore;
pub mod ingest;
pub mod linalg;
pub mod models;
pub mod pipeline;
pub mod seeds;
pub mod spectral;
pub mod synth;

pub use error::{Error, Result};
