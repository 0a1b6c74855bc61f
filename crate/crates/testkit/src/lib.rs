//! Test support shared by the workspace's test suites.
//!
//! Everything here works on plain index-based edge lists and year arrays so
//! that the oracles stay independent of the CSR graph and kernels they check.

pub mod dense;
pub mod synth;

/// Zero-padded DOI for node `i`: lexicographic DOI order equals index order.
pub fn doi_for(i: usize) -> String {
    format!("10.5555/n{i:08}")
}
