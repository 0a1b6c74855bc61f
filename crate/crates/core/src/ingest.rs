//! Source parsing and multi-source merging.
//!
//! Each source is a pair of CSV files: publication metadata (`doi,year`) and
//! citations (`citing,cited`). Either may be gzip-compressed, detected by a
//! `.gz` extension. Sources are parsed independently (in parallel), then
//! merged into one DOI table in lexicographic order, so the result does not
//! depend on the order sources are listed in.

use std::collections::HashMap;
use std::fs::File;
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use flate2::read::MultiGzDecoder;
use flate2::write::GzEncoder;
use flate2::Compression;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::doi::Doi;
use crate::graph::{BuildReport, CitationGraph, GraphError, NodeId, YearWindow};

pub const METADATA_HEADER: [&str; 2] = ["doi", "year"];
pub const EDGES_HEADER: [&str; 2] = ["citing", "cited"];
pub const UNIFIED_RECORDS_FILE: &str = "records.csv.gz";
pub const UNIFIED_EDGES_FILE: &str = "edges.csv.gz";

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("{path}: expected header {expected:?}, found {found:?}")]
    Schema {
        path: PathBuf,
        expected: [&'static str; 2],
        found: Vec<String>,
    },
    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
    #[error("no sources given")]
    NoSources,
    #[error("no usable (dated) publication records in any source")]
    NoUsableRecords,
    #[error(transparent)]
    Graph(#[from] GraphError),
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> IngestError + '_ {
    move |source| IngestError::Io {
        path: path.to_path_buf(),
        source,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SourceDescriptor {
    pub name: String,
    pub metadata_path: PathBuf,
    pub edges_path: PathBuf,
}

impl SourceDescriptor {
    pub fn new(
        name: impl Into<String>,
        metadata_path: impl Into<PathBuf>,
        edges_path: impl Into<PathBuf>,
    ) -> Self {
        SourceDescriptor {
            name: name.into(),
            metadata_path: metadata_path.into(),
            edges_path: edges_path.into(),
        }
    }

    /// Checks that both files can be opened.
    pub fn check_readable(&self) -> Result<(), IngestError> {
        for path in [&self.metadata_path, &self.edges_path] {
            File::open(path).map_err(io_err(path))?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestOptions {
    pub years: YearWindow,
}

impl IngestOptions {
    pub fn for_current_year(current_year: i32) -> Self {
        IngestOptions {
            years: YearWindow::for_current_year(current_year),
        }
    }
}

/// Row tallies for one source.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SourceCounts {
    pub name: String,
    pub metadata_rows: usize,
    pub edge_rows: usize,
    pub distinct_dois: usize,
    pub distinct_edges: usize,
    /// Rows with the wrong number of fields or invalid encoding.
    pub malformed_rows: usize,
    pub malformed_doi: usize,
    /// Metadata rows whose year is empty, unparseable or implausible.
    pub missing_year: usize,
    pub self_loops: usize,
    pub duplicate_records: usize,
    pub duplicate_edges: usize,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct UnifiedCounts {
    pub distinct_dois: usize,
    pub dated_dois: usize,
    pub undated_dois: usize,
    pub distinct_edges: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestReport {
    pub sources: Vec<SourceCounts>,
    pub unified: UnifiedCounts,
    /// DOIs for which sources disagree on the year (resolved to the minimum).
    pub year_conflicts: usize,
}

/// A publication as seen by ingest; `year` is `None` when no source gave a usable one.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MetaRecord {
    pub doi: Doi,
    pub year: Option<i32>,
}

/// One parsed source: a local DOI table plus distinct edges over it.
#[derive(Debug, Clone)]
pub struct ParsedSource {
    dois: Vec<Doi>,
    years: Vec<Option<i32>>,
    edges: Vec<(NodeId, NodeId)>,
    pub counts: SourceCounts,
}

impl ParsedSource {
    pub fn records(&self) -> impl Iterator<Item = MetaRecord> + '_ {
        self.dois
            .iter()
            .zip(&self.years)
            .map(|(doi, &year)| MetaRecord {
                doi: doi.clone(),
                year,
            })
    }

    /// Distinct `(citing, cited)` pairs, self-citations excluded.
    pub fn edges(&self) -> impl Iterator<Item = (&Doi, &Doi)> + '_ {
        self.edges
            .iter()
            .map(|&(j, i)| (&self.dois[j as usize], &self.dois[i as usize]))
    }
}

#[derive(Default)]
struct Interner {
    ids: HashMap<Doi, NodeId>,
    years: Vec<Option<i32>>,
}

impl Interner {
    fn intern(&mut self, doi: Doi) -> NodeId {
        let next = self.ids.len() as NodeId;
        let id = *self.ids.entry(doi).or_insert(next);
        if id == next {
            self.years.push(None);
        }
        id
    }

    fn into_table(self) -> (Vec<Doi>, Vec<Option<i32>>) {
        let mut dois: Vec<Option<Doi>> = vec![None; self.ids.len()];
        for (doi, id) in self.ids {
            dois[id as usize] = Some(doi);
        }
        (dois.into_iter().map(Option::unwrap).collect(), self.years)
    }
}

fn open_csv(
    path: &Path,
    expected: [&'static str; 2],
) -> Result<csv::Reader<Box<dyn Read + Send>>, IngestError> {
    let file = File::open(path).map_err(io_err(path))?;
    let inner: Box<dyn Read + Send> = if path.extension().is_some_and(|e| e == "gz") {
        Box::new(MultiGzDecoder::new(BufReader::new(file)))
    } else {
        Box::new(BufReader::new(file))
    };
    let mut reader = csv::ReaderBuilder::new()
        .flexible(true)
        .has_headers(true)
        .from_reader(inner);
    let header = reader.headers().map_err(|source| IngestError::Csv {
        path: path.to_path_buf(),
        source,
    })?;
    let found: Vec<String> = header.iter().map(|h| h.trim().to_lowercase()).collect();
    if found != expected {
        return Err(IngestError::Schema {
            path: path.to_path_buf(),
            expected,
            found,
        });
    }
    Ok(reader)
}

fn parse_year(field: &str, window: &YearWindow) -> Option<i32> {
    field
        .trim()
        .parse::<i32>()
        .ok()
        .filter(|y| window.contains(*y))
}

/// Parses one source. Malformed rows are skipped and tallied; rows whose year
/// is unusable still contribute their DOI, as an undated record.
pub fn parse_source(
    desc: &SourceDescriptor,
    opts: &IngestOptions,
) -> Result<ParsedSource, IngestError> {
    let mut counts = SourceCounts {
        name: desc.name.clone(),
        ..SourceCounts::default()
    };
    let mut interner = Interner::default();
    let mut seen_meta: Vec<bool> = Vec::new();

    let mut reader = open_csv(&desc.metadata_path, METADATA_HEADER)?;
    let mut row = csv::StringRecord::new();
    loop {
        match reader.read_record(&mut row) {
            Ok(false) => break,
            Ok(true) => {}
            Err(e) if e.is_io_error() => {
                return Err(IngestError::Csv {
                    path: desc.metadata_path.clone(),
                    source: e,
                })
            }
            Err(_) => {
                counts.metadata_rows += 1;
                counts.malformed_rows += 1;
                continue;
            }
        }
        counts.metadata_rows += 1;
        if row.len() != 2 {
            counts.malformed_rows += 1;
            continue;
        }
        let Ok(doi) = Doi::parse(&row[0]) else {
            counts.malformed_doi += 1;
            continue;
        };
        let id = interner.intern(doi) as usize;
        if seen_meta.len() <= id {
            seen_meta.resize(id + 1, false);
        }
        if std::mem::replace(&mut seen_meta[id], true) {
            counts.duplicate_records += 1;
        }
        match parse_year(&row[1], &opts.years) {
            Some(year) => {
                let slot = &mut interner.years[id];
                *slot = Some(slot.map_or(year, |y| y.min(year)));
            }
            None => counts.missing_year += 1,
        }
    }

    let mut keys: Vec<u64> = Vec::new();
    let mut reader = open_csv(&desc.edges_path, EDGES_HEADER)?;
    loop {
        match reader.read_record(&mut row) {
            Ok(false) => break,
            Ok(true) => {}
            Err(e) if e.is_io_error() => {
                return Err(IngestError::Csv {
                    path: desc.edges_path.clone(),
                    source: e,
                })
            }
            Err(_) => {
                counts.edge_rows += 1;
                counts.malformed_rows += 1;
                continue;
            }
        }
        counts.edge_rows += 1;
        if row.len() != 2 {
            counts.malformed_rows += 1;
            continue;
        }
        let (Ok(citing), Ok(cited)) = (Doi::parse(&row[0]), Doi::parse(&row[1])) else {
            counts.malformed_doi += 1;
            continue;
        };
        let j = interner.intern(citing);
        let i = interner.intern(cited);
        if i == j {
            counts.self_loops += 1;
            continue;
        }
        keys.push(((j as u64) << 32) | i as u64);
    }
    keys.sort_unstable();
    let before = keys.len();
    keys.dedup();
    counts.duplicate_edges = before - keys.len();
    counts.distinct_edges = keys.len();

    let (dois, years) = interner.into_table();
    counts.distinct_dois = dois.len();
    let edges = keys
        .into_iter()
        .map(|k| ((k >> 32) as NodeId, (k & 0xffff_ffff) as NodeId))
        .collect();
    Ok(ParsedSource {
        dois,
        years,
        edges,
        counts,
    })
}

/// The merged view of all sources: DOIs in lexicographic order, the earliest
/// reported year per DOI, and the union of edges.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IngestOutput {
    dois: Vec<Doi>,
    years: Vec<Option<i32>>,
    /// `(citing, cited)` indices into `dois`, sorted and distinct.
    edges: Vec<(NodeId, NodeId)>,
    pub report: IngestReport,
}

/// Parses every source and merges them.
pub fn merge_sources(
    sources: &[SourceDescriptor],
    opts: &IngestOptions,
) -> Result<IngestOutput, IngestError> {
    if sources.is_empty() {
        return Err(IngestError::NoSources);
    }
    for s in sources {
        s.check_readable()?;
    }
    let parsed = sources
        .par_iter()
        .map(|s| parse_source(s, opts))
        .collect::<Result<Vec<_>, _>>()?;
    merge_parsed(parsed)
}

/// Merges already-parsed sources.
pub fn merge_parsed(parsed: Vec<ParsedSource>) -> Result<IngestOutput, IngestError> {
    if parsed.is_empty() {
        return Err(IngestError::NoSources);
    }
    let mut dois: Vec<Doi> = parsed.iter().flat_map(|p| p.dois.iter().cloned()).collect();
    dois.par_sort_unstable();
    dois.dedup();
    if dois.len() > NodeId::MAX as usize {
        return Err(GraphError::TooManyNodes(dois.len()).into());
    }

    let mut years: Vec<Option<i32>> = vec![None; dois.len()];
    let mut conflict = vec![false; dois.len()];
    let mut keys: Vec<u64> = Vec::with_capacity(parsed.iter().map(|p| p.edges.len()).sum());
    for p in &parsed {
        let remap: Vec<NodeId> = p
            .dois
            .par_iter()
            .map(|d| dois.binary_search(d).expect("DOI present in merged table") as NodeId)
            .collect();
        for (local, year) in p.years.iter().enumerate() {
            let Some(year) = *year else { continue };
            let g = remap[local] as usize;
            match years[g] {
                Some(y) if y != year => {
                    conflict[g] = true;
                    years[g] = Some(y.min(year));
                }
                Some(_) => {}
                None => years[g] = Some(year),
            }
        }
        keys.extend(
            p.edges
                .iter()
                .map(|&(j, i)| ((remap[j as usize] as u64) << 32) | remap[i as usize] as u64),
        );
    }
    keys.par_sort_unstable();
    keys.dedup();

    let dated = years.iter().filter(|y| y.is_some()).count();
    if dated == 0 {
        return Err(IngestError::NoUsableRecords);
    }
    let report = IngestReport {
        sources: parsed.into_iter().map(|p| p.counts).collect(),
        unified: UnifiedCounts {
            distinct_dois: dois.len(),
            dated_dois: dated,
            undated_dois: dois.len() - dated,
            distinct_edges: keys.len(),
        },
        year_conflicts: conflict.iter().filter(|&&c| c).count(),
    };
    let edges = keys
        .into_iter()
        .map(|k| ((k >> 32) as NodeId, (k & 0xffff_ffff) as NodeId))
        .collect();
    Ok(IngestOutput {
        dois,
        years,
        edges,
        report,
    })
}

impl IngestOutput {
    pub fn records(&self) -> impl Iterator<Item = MetaRecord> + '_ {
        self.dois
            .iter()
            .zip(&self.years)
            .map(|(doi, &year)| MetaRecord {
                doi: doi.clone(),
                year,
            })
    }

    pub fn edges(&self) -> impl Iterator<Item = (&Doi, &Doi)> + '_ {
        self.edges
            .iter()
            .map(|&(j, i)| (&self.dois[j as usize], &self.dois[i as usize]))
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Builds the citation graph over dated publications only; edges touching
    /// an undated DOI are counted as `missing_endpoint`.
    pub fn build_graph(&self) -> Result<(CitationGraph, BuildReport), GraphError> {
        let mut remap: Vec<Option<NodeId>> = Vec::with_capacity(self.dois.len());
        let mut dois = Vec::new();
        let mut years = Vec::new();
        for (doi, year) in self.dois.iter().zip(&self.years) {
            match year {
                Some(y) => {
                    remap.push(Some(dois.len() as NodeId));
                    dois.push(doi.clone());
                    years.push(*y);
                }
                None => remap.push(None),
            }
        }
        let mut missing = 0;
        let edges: Vec<(NodeId, NodeId)> = self
            .edges
            .iter()
            .filter_map(|&(j, i)| match (remap[j as usize], remap[i as usize]) {
                (Some(j), Some(i)) => Some((j, i)),
                _ => {
                    missing += 1;
                    None
                }
            })
            .collect();
        let (graph, self_loops, duplicate_edges) = CitationGraph::assemble(dois, years, edges)?;
        let report = BuildReport {
            nodes: graph.node_count(),
            edges: graph.edge_count(),
            duplicate_records: 0,
            edges_read: self.edges.len(),
            malformed_doi: 0,
            missing_endpoint: missing,
            self_loops,
            duplicate_edges,
        };
        Ok((graph, report))
    }

    /// Writes the unified records and edges as a gzip-compressed source pair
    /// in `dir`, returning its descriptor.
    pub fn write_unified(&self, dir: &Path, name: &str) -> Result<SourceDescriptor, IngestError> {
        let desc = SourceDescriptor::new(
            name,
            dir.join(UNIFIED_RECORDS_FILE),
            dir.join(UNIFIED_EDGES_FILE),
        );
        write_gz(&desc.metadata_path, |w| {
            let mut csv = csv::Writer::from_writer(w);
            csv.write_record(METADATA_HEADER)?;
            for r in self.records() {
                let year = r.year.map(|y| y.to_string()).unwrap_or_default();
                csv.write_record([r.doi.as_str(), year.as_str()])?;
            }
            csv.flush()
        })?;
        write_gz(&desc.edges_path, |w| {
            let mut csv = csv::Writer::from_writer(w);
            csv.write_record(EDGES_HEADER)?;
            for (citing, cited) in self.edges() {
                csv.write_record([citing.as_str(), cited.as_str()])?;
            }
            csv.flush()
        })?;
        Ok(desc)
    }
}

fn write_gz(
    path: &Path,
    body: impl FnOnce(&mut dyn Write) -> io::Result<()>,
) -> Result<(), IngestError> {
    let run = || -> io::Result<()> {
        let file = File::create(path)?;
        let mut enc = GzEncoder::new(BufWriter::new(file), Compression::fast());
        body(&mut enc)?;
        enc.finish()?.flush()
    };
    run().map_err(io_err(path))
}
