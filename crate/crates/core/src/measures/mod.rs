//! The five impact measures.
//!
//! Every kernel follows the same contract: each node aggregates values
//! propagated from its citing papers, in ascending citing-ID order, and
//! writes only its own output slot. That keeps the per-node reduction order
//! fixed, so results are bitwise reproducible regardless of worker count.

mod counts;
mod params;
mod rank;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use counts::{attention_score, citation_count, incubation_citation_count, ram};
pub use params::{MeasureParams, ParamError};
pub use rank::{attrank, attrank_with_start, pagerank, pagerank_with_start};

use crate::graph::CitationGraph;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Measure {
    #[serde(rename = "CC")]
    Cc,
    #[serde(rename = "iCC")]
    Icc,
    #[serde(rename = "PR")]
    PageRank,
    #[serde(rename = "RAM")]
    Ram,
    #[serde(rename = "AttRank")]
    AttRank,
}

impl Measure {
    pub const ALL: [Measure; 5] = [
        Measure::Cc,
        Measure::Icc,
        Measure::PageRank,
        Measure::Ram,
        Measure::AttRank,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            Measure::Cc => "CC",
            Measure::Icc => "iCC",
            Measure::PageRank => "PR",
            Measure::Ram => "RAM",
            Measure::AttRank => "AttRank",
        }
    }

    /// Field name used in JSON score objects.
    pub fn key(self) -> &'static str {
        match self {
            Measure::Cc => "cc",
            Measure::Icc => "icc",
            Measure::PageRank => "pagerank",
            Measure::Ram => "ram",
            Measure::AttRank => "attrank",
        }
    }

    pub fn is_iterative(self) -> bool {
        matches!(self, Measure::PageRank | Measure::AttRank)
    }
}

impl fmt::Display for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown measure tag {0:?}")]
pub struct UnknownMeasure(pub String);

impl FromStr for Measure {
    type Err = UnknownMeasure;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Measure::ALL
            .into_iter()
            .find(|m| m.tag() == s)
            .ok_or_else(|| UnknownMeasure(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("{measure}: {source}")]
pub struct MeasureError {
    pub measure: Measure,
    #[source]
    pub source: ParamError,
}

/// Dense per-node scores of one measure, with the parameters that produced them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreVector {
    pub measure: Measure,
    pub scores: Vec<f64>,
    pub params: MeasureParams,
    /// Zero for non-iterative measures.
    pub iterations_run: u32,
    pub converged: bool,
    /// Citations from papers dated after the current year (RAM only).
    pub future_dated: usize,
}

impl ScoreVector {
    pub(crate) fn direct(measure: Measure, scores: Vec<f64>, params: &MeasureParams) -> Self {
        ScoreVector {
            measure,
            scores,
            params: params.clone(),
            iterations_run: 0,
            converged: true,
            future_dated: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }
}

/// All five measures for one graph, in [`Measure::ALL`] order.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasureSet {
    pub cc: ScoreVector,
    pub icc: ScoreVector,
    pub pagerank: ScoreVector,
    pub ram: ScoreVector,
    pub attrank: ScoreVector,
}

impl MeasureSet {
    pub fn get(&self, m: Measure) -> &ScoreVector {
        match m {
            Measure::Cc => &self.cc,
            Measure::Icc => &self.icc,
            Measure::PageRank => &self.pagerank,
            Measure::Ram => &self.ram,
            Measure::AttRank => &self.attrank,
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = &ScoreVector> {
        Measure::ALL.into_iter().map(|m| self.get(m))
    }

    pub fn into_vec(self) -> Vec<ScoreVector> {
        vec![self.cc, self.icc, self.pagerank, self.ram, self.attrank]
    }
}

/// Computes all five measures. Parameters are validated up front; the
/// measures then run concurrently.
pub fn compute_all(g: &CitationGraph, p: &MeasureParams) -> Result<MeasureSet, MeasureError> {
    for m in Measure::ALL {
        p.validate_for(m)
            .map_err(|source| MeasureError { measure: m, source })?;
    }
    let ((cc, icc), ((pr, ram), att)) = rayon::join(
        || (citation_count(g, p), incubation_citation_count(g, p)),
        || {
            rayon::join(
                || rayon::join(|| pagerank(g, p), || ram(g, p)),
                || attrank(g, p),
            )
        },
    );
    Ok(MeasureSet {
        cc,
        icc: icc?,
        pagerank: pr?,
        ram: ram?,
        attrank: att?,
    })
}
