//! Pipeline configuration.
//!
//! The config file is flat `key = value` text, one entry per line, `#` starts
//! a comment. Keys carry a section prefix:
//!
//! ```text
//! source.<name>.metadata = path/to/metadata.csv
//! source.<name>.edges    = path/to/edges.csv.gz
//! measures.pr_alpha      = 0.5
//! output.dir             = out
//! output.graph_id        = fixture
//! output.compress        = true
//! correlation.k          = 10
//! serve.listen           = 127.0.0.1:8080
//! serve.batch_cap        = 1000
//! serve.dumps            = out/dumps
//! run.workers            = 4
//! ```
//!
//! Relative paths in a file resolve against the file's directory. Overrides
//! (flags and environment) are applied on top using the same keys.

use std::collections::BTreeMap;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};

use impactrank_core::export::valid_graph_id;
use impactrank_core::ingest::{IngestError, SourceDescriptor};
use impactrank_core::measures::ParamError;
use impactrank_core::MeasureParams;
use thiserror::Error;

pub const DEFAULT_GRAPH_ID: &str = "graph";
pub const DEFAULT_K: usize = 1000;
pub const DEFAULT_LISTEN: &str = "127.0.0.1:8080";

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("reading config {path}: {source}")]
    Read {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("config line {line}: expected `key = value`")]
    Syntax { line: usize },
    #[error("unknown config key {0:?}")]
    UnknownKey(String),
    #[error("invalid value {value:?} for {key}")]
    BadValue { key: String, value: String },
    #[error("source {0:?} needs both .metadata and .edges")]
    IncompleteSource(String),
    #[error("invalid --sources entry {0:?}; expected NAME=METADATA,EDGES")]
    BadSourceSpec(String),
    #[error("no sources configured")]
    NoSources,
    #[error("graph id {0:?} must be non-empty and use only a-z, 0-9 and _")]
    GraphId(String),
    #[error("{0} must be at least 1")]
    Zero(&'static str),
    #[error(transparent)]
    Param(#[from] ParamError),
    #[error(transparent)]
    Source(#[from] IngestError),
    #[error("missing input {path}; run `{stage}` first")]
    MissingInput { path: PathBuf, stage: &'static str },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ServeConfig {
    pub listen: SocketAddr,
    pub batch_cap: usize,
    /// Directory holding the five dumps; defaults to the export directory.
    pub dumps: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub sources: Vec<SourceDescriptor>,
    pub params: MeasureParams,
    pub out_dir: PathBuf,
    pub graph_id: String,
    pub compress: bool,
    pub k: usize,
    pub serve: ServeConfig,
    /// Rayon worker count; `None` uses every available core.
    pub workers: Option<usize>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            sources: Vec::new(),
            params: MeasureParams::default(),
            out_dir: PathBuf::from("out"),
            graph_id: DEFAULT_GRAPH_ID.to_string(),
            compress: true,
            k: DEFAULT_K,
            serve: ServeConfig {
                listen: DEFAULT_LISTEN.parse().unwrap(),
                batch_cap: impactrank_serve::DEFAULT_BATCH_CAP,
                dumps: None,
            },
            workers: None,
        }
    }
}

/// Parses config text into ordered `(key, value)` pairs.
pub fn parse_entries(text: &str) -> Result<Vec<(String, String)>, ConfigError> {
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split_once('#').map_or(raw, |(before, _)| before).trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or(ConfigError::Syntax { line: idx + 1 })?;
        let k = k.trim();
        if k.is_empty() {
            return Err(ConfigError::Syntax { line: idx + 1 });
        }
        out.push((k.to_string(), v.trim().to_string()));
    }
    Ok(out)
}

/// Splits `NAME=METADATA,EDGES` into config entries.
pub fn source_entries(spec: &str) -> Result<[(String, String); 2], ConfigError> {
    let bad = || ConfigError::BadSourceSpec(spec.to_string());
    let (name, paths) = spec.split_once('=').ok_or_else(bad)?;
    let (meta, edges) = paths.split_once(',').ok_or_else(bad)?;
    if name.is_empty() || name.contains('.') || meta.is_empty() || edges.is_empty() {
        return Err(bad());
    }
    Ok([
        (format!("source.{name}.metadata"), meta.to_string()),
        (format!("source.{name}.edges"), edges.to_string()),
    ])
}

fn parse_value<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, ConfigError> {
    value.parse().map_err(|_| ConfigError::BadValue {
        key: key.to_string(),
        value: value.to_string(),
    })
}

#[derive(Default)]
struct PartialSource {
    metadata: Option<PathBuf>,
    edges: Option<PathBuf>,
}

impl PipelineConfig {
    /// Applies entries in order; later entries win. Relative paths join `base`.
    pub fn apply(&mut self, entries: &[(String, String)], base: &Path) -> Result<(), ConfigError> {
        let resolve = |v: &str| base.join(v);
        let mut sources: BTreeMap<String, PartialSource> = BTreeMap::new();
        for s in self.sources.drain(..) {
            sources.insert(
                s.name,
                PartialSource {
                    metadata: Some(s.metadata_path),
                    edges: Some(s.edges_path),
                },
            );
        }
        for (key, value) in entries {
            let key = key.as_str();
            if let Some(rest) = key.strip_prefix("source.") {
                let (name, field) = rest
                    .rsplit_once('.')
                    .ok_or_else(|| ConfigError::UnknownKey(key.into()))?;
                let entry = sources.entry(name.to_string()).or_default();
                match field {
                    "metadata" => entry.metadata = Some(resolve(value)),
                    "edges" => entry.edges = Some(resolve(value)),
                    _ => return Err(ConfigError::UnknownKey(key.into())),
                }
                continue;
            }
            if let Some(param) = key.strip_prefix("measures.") {
                self.params.set(param, value)?;
                continue;
            }
            match key {
                "output.dir" => self.out_dir = resolve(value),
                "output.graph_id" => self.graph_id = value.clone(),
                "output.compress" => self.compress = parse_value(key, value)?,
                "correlation.k" => self.k = parse_value(key, value)?,
                "serve.listen" => self.serve.listen = parse_value(key, value)?,
                "serve.batch_cap" => self.serve.batch_cap = parse_value(key, value)?,
                "serve.dumps" => self.serve.dumps = Some(resolve(value)),
                "run.workers" => self.workers = Some(parse_value(key, value)?),
                _ => return Err(ConfigError::UnknownKey(key.into())),
            }
        }
        for (name, s) in sources {
            match (s.metadata, s.edges) {
                (Some(metadata_path), Some(edges_path)) => self
                    .sources
                    .push(SourceDescriptor::new(name, metadata_path, edges_path)),
                _ => return Err(ConfigError::IncompleteSource(name)),
            }
        }
        Ok(())
    }

    /// Reads a config file and applies it over the defaults.
    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        let mut cfg = PipelineConfig::default();
        let base = path.parent().unwrap_or(Path::new(""));
        cfg.apply(&parse_entries(&text)?, base)?;
        Ok(cfg)
    }

    /// Checks everything that does not depend on stage inputs.
    pub fn validate(&self) -> Result<(), ConfigError> {
        self.params.validate()?;
        if !valid_graph_id(&self.graph_id) {
            return Err(ConfigError::GraphId(self.graph_id.clone()));
        }
        if self.k == 0 {
            return Err(ConfigError::Zero("correlation.k"));
        }
        if self.serve.batch_cap == 0 {
            return Err(ConfigError::Zero("serve.batch_cap"));
        }
        if self.workers == Some(0) {
            return Err(ConfigError::Zero("run.workers"));
        }
        Ok(())
    }

    /// Source checks for stages that read the raw inputs.
    pub fn validate_sources(&self) -> Result<(), ConfigError> {
        if self.sources.is_empty() {
            return Err(ConfigError::NoSources);
        }
        for s in &self.sources {
            s.check_readable()?;
        }
        Ok(())
    }

    pub fn unified_dir(&self) -> PathBuf {
        self.out_dir.join("unified")
    }

    pub fn scores_dir(&self) -> PathBuf {
        self.out_dir.join("scores")
    }

    pub fn dumps_dir(&self) -> PathBuf {
        self.out_dir.join("dumps")
    }

    pub fn correlation_dir(&self) -> PathBuf {
        self.out_dir.join("correlation")
    }

    pub fn serve_dumps_dir(&self) -> PathBuf {
        self.serve.dumps.clone().unwrap_or_else(|| self.dumps_dir())
    }
}
