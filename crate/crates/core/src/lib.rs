//! Citation graph construction and publication impact measures.
//!
//! The pipeline runs in stages: [`ingest`] parses and merges DOI-to-DOI
//! citation sources, [`graph`] holds the resulting immutable citation graph,
//! [`measures`] computes citation count, incubation citation count,
//! PageRank, RAM and AttRank over it, [`export`] writes the scores as
//! two-column dumps, and [`correlation`] compares measures by top-k rank
//! correlation.

pub mod correlation;
pub mod doi;
pub mod export;
pub mod graph;
pub mod ingest;
pub mod measures;
mod reduce;

pub use doi::Doi;
pub use graph::{build_graph, CitationGraph, NodeId, PubRecord};
pub use measures::{compute_all, Measure, MeasureParams, MeasureSet, ScoreVector};
