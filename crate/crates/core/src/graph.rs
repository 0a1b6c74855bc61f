//! Immutable citation graph.
//!
//! Edge `j -> i` means paper `j` cites paper `i`, i.e. `A[i][j] = 1`. The
//! primary layout is an in-edge CSR (for each cited node, its citing nodes in
//! ascending ID order) because every measure aggregates over citing papers.
//! Node IDs are dense and follow ascending lexicographic DOI order.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::doi::Doi;

pub type NodeId = u32;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GraphError {
    #[error("node {id} out of range for graph with {n} nodes")]
    NodeOutOfRange { id: usize, n: usize },
    #[error("graph has {0} nodes, more than a 32-bit node ID can address")]
    TooManyNodes(usize),
}

/// Publication years accepted as plausible metadata.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct YearWindow {
    pub min: i32,
    pub max: i32,
}

impl YearWindow {
    pub fn for_current_year(current_year: i32) -> Self {
        YearWindow {
            min: 1000,
            max: current_year + 2,
        }
    }

    pub fn contains(&self, year: i32) -> bool {
        (self.min..=self.max).contains(&year)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PubRecord {
    pub doi: Doi,
    pub year: i32,
}

impl PubRecord {
    pub fn new(doi: Doi, year: i32) -> Self {
        PubRecord { doi, year }
    }
}

/// What `build_graph` dropped and why.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BuildReport {
    pub nodes: usize,
    pub edges: usize,
    pub duplicate_records: usize,
    pub edges_read: usize,
    pub malformed_doi: usize,
    /// Edges with an endpoint that has no dated record.
    pub missing_endpoint: usize,
    pub self_loops: usize,
    pub duplicate_edges: usize,
}

impl BuildReport {
    /// Edges that could not be placed in the graph at all.
    pub fn skipped(&self) -> usize {
        self.malformed_doi + self.missing_endpoint
    }
}

/// Weight of column `j` in the column-normalised transition matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ColumnWeight {
    /// Every paper cited by `j` receives this share.
    Weight(f64),
    /// `j` cites nothing.
    Dangling,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CitationGraph {
    dois: Vec<Doi>,
    years: Vec<i32>,
    in_offsets: Vec<usize>,
    in_sources: Vec<NodeId>,
    out_degree: Vec<u32>,
}

impl CitationGraph {
    pub fn empty() -> Self {
        CitationGraph {
            dois: Vec::new(),
            years: Vec::new(),
            in_offsets: vec![0],
            in_sources: Vec::new(),
            out_degree: Vec::new(),
        }
    }

    /// Assembles a graph from nodes already in ascending DOI order and
    /// `(citing, cited)` ID pairs. Returns the graph plus the number of
    /// self-loops and duplicate edges removed.
    pub(crate) fn assemble(
        dois: Vec<Doi>,
        years: Vec<i32>,
        edges: impl IntoIterator<Item = (NodeId, NodeId)>,
    ) -> Result<(Self, usize, usize), GraphError> {
        debug_assert!(dois.windows(2).all(|w| w[0] < w[1]));
        debug_assert_eq!(dois.len(), years.len());
        let n = dois.len();
        if n > NodeId::MAX as usize {
            return Err(GraphError::TooManyNodes(n));
        }
        let mut self_loops = 0;
        let mut keys: Vec<u64> = edges
            .into_iter()
            .filter(|&(citing, cited)| {
                let keep = citing != cited;
                self_loops += usize::from(!keep);
                keep
            })
            .map(|(citing, cited)| ((cited as u64) << 32) | citing as u64)
            .collect();
        keys.sort_unstable();
        let before = keys.len();
        keys.dedup();
        let duplicates = before - keys.len();

        let mut in_offsets = vec![0usize; n + 1];
        let mut out_degree = vec![0u32; n];
        let mut in_sources = Vec::with_capacity(keys.len());
        for key in &keys {
            let cited = (key >> 32) as usize;
            let citing = (key & 0xffff_ffff) as NodeId;
            in_offsets[cited + 1] += 1;
            out_degree[citing as usize] += 1;
            in_sources.push(citing);
        }
        for i in 0..n {
            in_offsets[i + 1] += in_offsets[i];
        }
        Ok((
            CitationGraph {
                dois,
                years,
                in_offsets,
                in_sources,
                out_degree,
            },
            self_loops,
            duplicates,
        ))
    }

    pub fn node_count(&self) -> usize {
        self.dois.len()
    }

    pub fn edge_count(&self) -> usize {
        self.in_sources.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dois.is_empty()
    }

    fn check(&self, id: usize) -> Result<(), GraphError> {
        if id < self.node_count() {
            Ok(())
        } else {
            Err(GraphError::NodeOutOfRange {
                id,
                n: self.node_count(),
            })
        }
    }

    /// Citing papers of `i`, ascending.
    pub fn in_neighbors(&self, i: usize) -> Result<&[NodeId], GraphError> {
        self.check(i)?;
        Ok(self.citing(i))
    }

    /// Unchecked variant of [`in_neighbors`](Self::in_neighbors) for kernels.
    #[inline]
    pub(crate) fn citing(&self, i: usize) -> &[NodeId] {
        &self.in_sources[self.in_offsets[i]..self.in_offsets[i + 1]]
    }

    pub fn in_degree(&self, i: usize) -> Result<usize, GraphError> {
        self.check(i)?;
        Ok(self.in_offsets[i + 1] - self.in_offsets[i])
    }

    pub fn out_degree(&self, j: usize) -> Result<usize, GraphError> {
        self.check(j)?;
        Ok(self.out_degree[j] as usize)
    }

    pub fn out_degrees(&self) -> &[u32] {
        &self.out_degree
    }

    pub fn transition_column_weight(&self, j: usize) -> Result<ColumnWeight, GraphError> {
        self.check(j)?;
        Ok(match self.out_degree[j] {
            0 => ColumnWeight::Dangling,
            d => ColumnWeight::Weight(1.0 / d as f64),
        })
    }

    pub fn doi(&self, i: usize) -> Result<&Doi, GraphError> {
        self.check(i)?;
        Ok(&self.dois[i])
    }

    pub fn dois(&self) -> &[Doi] {
        &self.dois
    }

    pub fn year(&self, i: usize) -> Result<i32, GraphError> {
        self.check(i)?;
        Ok(self.years[i])
    }

    pub fn years(&self) -> &[i32] {
        &self.years
    }

    pub fn id_of(&self, doi: &Doi) -> Option<NodeId> {
        self.dois.binary_search(doi).ok().map(|i| i as NodeId)
    }

    pub fn max_year(&self) -> Option<i32> {
        self.years.iter().copied().max()
    }

    /// All edges as `(citing, cited)`, grouped by cited node.
    pub fn edges(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        (0..self.node_count())
            .flat_map(move |i| self.citing(i).iter().map(move |&j| (j, i as NodeId)))
    }
}

/// Builds the graph from dated records and raw `(citing, cited)` DOI pairs.
///
/// Duplicate records keep the earliest year. An edge is kept only if both
/// DOIs parse and both have a record; self-citations and repeated edges are
/// dropped. Everything dropped is tallied in the returned report.
pub fn build_graph<R, E, A, B>(
    records: R,
    edges: E,
) -> Result<(CitationGraph, BuildReport), GraphError>
where
    R: IntoIterator<Item = PubRecord>,
    E: IntoIterator<Item = (A, B)>,
    A: AsRef<str>,
    B: AsRef<str>,
{
    let mut report = BuildReport::default();
    let mut recs: Vec<PubRecord> = records.into_iter().collect();
    recs.sort_unstable_by(|a, b| a.doi.cmp(&b.doi).then(a.year.cmp(&b.year)));
    let before = recs.len();
    recs.dedup_by(|later, first| later.doi == first.doi);
    report.duplicate_records = before - recs.len();

    let (dois, years): (Vec<Doi>, Vec<i32>) = recs.into_iter().map(|r| (r.doi, r.year)).unzip();
    let lookup = |raw: &str| -> Result<Option<NodeId>, ()> {
        let doi = Doi::parse(raw).map_err(|_| ())?;
        Ok(dois.binary_search(&doi).ok().map(|i| i as NodeId))
    };

    let mut ids = Vec::new();
    for (citing, cited) in edges {
        report.edges_read += 1;
        match (lookup(citing.as_ref()), lookup(cited.as_ref())) {
            (Ok(Some(j)), Ok(Some(i))) => ids.push((j, i)),
            (Ok(_), Ok(_)) => report.missing_endpoint += 1,
            _ => report.malformed_doi += 1,
        }
    }

    let (graph, self_loops, duplicates) = CitationGraph::assemble(dois, years, ids)?;
    report.self_loops = self_loops;
    report.duplicate_edges = duplicates;
    report.nodes = graph.node_count();
    report.edges = graph.edge_count();
    Ok((graph, report))
}
