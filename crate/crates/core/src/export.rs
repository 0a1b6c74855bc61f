//! Score dumps: two-column `DOI<TAB>score` files whose name encodes the
//! measure, graph label and parameters, e.g. `PR_uni1_a0.5_error1e-12.tsv.gz`.
//!
//! File name grammar:
//!
//! ```text
//! name     = measure "_" graph_id { "_" key value } ".tsv" [ ".gz" ]
//! measure  = "CC" | "iCC" | "PR" | "RAM" | "AttRank"
//! graph_id = 1*( a-z | 0-9 | "_" )
//! ```
//!
//! The keys are fixed per measure (see [`dump_params`]), so the name can be
//! split unambiguously from the right even though `graph_id` may contain `_`.

use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use flate2::read::MultiGzDecoder;
use flate2::write::GzEncoder;
use flate2::Compression;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::doi::Doi;
use crate::graph::CitationGraph;
use crate::measures::{Measure, MeasureParams, ScoreVector};

#[derive(Debug, Error)]
pub enum ExportError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("DOI {0:?} contains a tab or line break and cannot be written")]
    UnrepresentableDoi(String),
    #[error("score vector has {scores} entries but the graph has {nodes} nodes")]
    LengthMismatch { scores: usize, nodes: usize },
    #[error("invalid graph id {0:?}: expected [a-z0-9_]+")]
    InvalidGraphId(String),
    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("not a dump file name: {0:?}")]
    BadFileName(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DumpSpec {
    pub measure: Measure,
    pub graph_id: String,
    /// `(key, formatted value)` pairs in file-name order.
    pub params: Vec<(String, String)>,
    pub compressed: bool,
}

/// Compact decimal or exponent notation, whichever is shorter.
pub fn format_param(v: f64) -> String {
    let plain = format!("{v}");
    let exp = format!("{v:e}");
    if exp.len() < plain.len() {
        exp
    } else {
        plain
    }
}

/// Shortest text that parses back to exactly `v`.
pub fn format_score(v: f64) -> String {
    format!("{v:?}")
}

fn param_keys(measure: Measure) -> &'static [&'static str] {
    match measure {
        Measure::Cc => &[],
        Measure::Icc => &["y"],
        Measure::PageRank => &["a", "error"],
        Measure::Ram => &["gamma", "tc"],
        Measure::AttRank => &["a", "b", "g", "rho", "w", "tc", "error"],
    }
}

/// The parameters `measure` depends on, formatted for a file name.
pub fn dump_params(measure: Measure, p: &MeasureParams) -> Vec<(String, String)> {
    let values: Vec<String> = match measure {
        Measure::Cc => vec![],
        Measure::Icc => vec![p.incubation_window.to_string()],
        Measure::PageRank => vec![format_param(p.pr_alpha), format_param(p.pr_epsilon)],
        Measure::Ram => vec![format_param(p.ram_gamma), p.current_year.to_string()],
        Measure::AttRank => vec![
            format_param(p.att_alpha),
            format_param(p.att_beta),
            format_param(p.att_gamma),
            format_param(p.att_rho),
            p.att_window.to_string(),
            p.current_year.to_string(),
            format_param(p.pr_epsilon),
        ],
    };
    param_keys(measure)
        .iter()
        .zip(values)
        .map(|(k, v)| (k.to_string(), v))
        .collect()
}

/// Graph ids are non-empty and use only `[a-z0-9_]`.
pub fn valid_graph_id(id: &str) -> bool {
    !id.is_empty()
        && id
            .bytes()
            .all(|b| b.is_ascii_lowercase() || b.is_ascii_digit() || b == b'_')
}

impl DumpSpec {
    pub fn new(sv: &ScoreVector, graph_id: &str, compressed: bool) -> Result<Self, ExportError> {
        if !valid_graph_id(graph_id) {
            return Err(ExportError::InvalidGraphId(graph_id.to_string()));
        }
        Ok(DumpSpec {
            measure: sv.measure,
            graph_id: graph_id.to_string(),
            params: dump_params(sv.measure, &sv.params),
            compressed,
        })
    }

    pub fn file_name(&self) -> String {
        let mut name = format!("{}_{}", self.measure.tag(), self.graph_id);
        for (k, v) in &self.params {
            name.push('_');
            name.push_str(k);
            name.push_str(v);
        }
        name.push_str(if self.compressed { ".tsv.gz" } else { ".tsv" });
        name
    }

    /// Recovers the spec from a dump's file name.
    pub fn parse_file_name(name: &str) -> Result<Self, ExportError> {
        let bad = || ExportError::BadFileName(name.to_string());
        let (stem, compressed) = if let Some(s) = name.strip_suffix(".tsv.gz") {
            (s, true)
        } else if let Some(s) = name.strip_suffix(".tsv") {
            (s, false)
        } else {
            return Err(bad());
        };
        let (tag, rest) = stem.split_once('_').ok_or_else(bad)?;
        let measure: Measure = tag.parse().map_err(|_| bad())?;
        let keys = param_keys(measure);
        let mut parts: Vec<&str> = rest.rsplitn(keys.len() + 1, '_').collect();
        if parts.len() != keys.len() + 1 {
            return Err(bad());
        }
        let graph_id = parts.pop().unwrap();
        if !valid_graph_id(graph_id) {
            return Err(bad());
        }
        parts.reverse();
        let params = keys
            .iter()
            .zip(parts)
            .map(|(k, part)| {
                part.strip_prefix(k)
                    .filter(|v| !v.is_empty())
                    .map(|v| (k.to_string(), v.to_string()))
                    .ok_or_else(bad)
            })
            .collect::<Result<_, _>>()?;
        Ok(DumpSpec {
            measure,
            graph_id: graph_id.to_string(),
            params,
            compressed,
        })
    }
}

/// Writes `sv` as a dump in `dir`, rows by descending score with ties by
/// ascending DOI. Output bytes depend only on the inputs.
pub fn write_dump(
    sv: &ScoreVector,
    g: &CitationGraph,
    spec: &DumpSpec,
    dir: &Path,
) -> Result<PathBuf, ExportError> {
    if sv.len() != g.node_count() {
        return Err(ExportError::LengthMismatch {
            scores: sv.len(),
            nodes: g.node_count(),
        });
    }
    if let Some(doi) = g
        .dois()
        .iter()
        .find(|d| d.as_str().contains(['\t', '\n', '\r']))
    {
        return Err(ExportError::UnrepresentableDoi(doi.to_string()));
    }
    let scores = &sv.scores;
    let mut order: Vec<usize> = (0..scores.len()).collect();
    // node IDs follow DOI order, so the ID tie-break is the DOI tie-break
    order.sort_unstable_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));

    let path = dir.join(spec.file_name());
    let io_err = |source| ExportError::Io {
        path: path.clone(),
        source,
    };
    let file = File::create(&path).map_err(io_err)?;
    let write_rows = |w: &mut dyn Write| -> io::Result<()> {
        for &i in &order {
            writeln!(w, "{}\t{}", g.dois()[i], format_score(scores[i]))?;
        }
        Ok(())
    };
    if spec.compressed {
        let mut enc = GzEncoder::new(BufWriter::new(file), Compression::default());
        write_rows(&mut enc).map_err(io_err)?;
        enc.finish().and_then(|mut w| w.flush()).map_err(io_err)?;
    } else {
        let mut w = BufWriter::new(file);
        write_rows(&mut w).map_err(io_err)?;
        w.flush().map_err(io_err)?;
    }
    Ok(path)
}

/// Reads a dump back in file order. Compression is detected from the `.gz` extension.
pub fn read_dump(path: &Path) -> Result<Vec<(Doi, f64)>, ExportError> {
    let io_err = |source| ExportError::Io {
        path: path.to_path_buf(),
        source,
    };
    let file = File::open(path).map_err(io_err)?;
    let inner: Box<dyn Read> = if path.extension().is_some_and(|e| e == "gz") {
        Box::new(MultiGzDecoder::new(BufReader::new(file)))
    } else {
        Box::new(file)
    };
    let parse_err = |line: usize, message: String| ExportError::Parse {
        path: path.to_path_buf(),
        line,
        message,
    };
    let mut rows = Vec::new();
    for (idx, line) in BufReader::new(inner).lines().enumerate() {
        let line = line.map_err(io_err)?;
        let lineno = idx + 1;
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 2 {
            return Err(parse_err(
                lineno,
                format!("expected 2 tab-separated columns, found {}", fields.len()),
            ));
        }
        let doi = Doi::parse(fields[0]).map_err(|e| parse_err(lineno, e.to_string()))?;
        let score: f64 = fields[1]
            .parse()
            .map_err(|_| parse_err(lineno, format!("invalid score {:?}", fields[1])))?;
        rows.push((doi, score));
    }
    Ok(rows)
}
