//! Pipeline stages and their on-disk layout.
//!
//! Under the output directory:
//!
//! ```text
//! unified/      records.csv.gz, edges.csv.gz, ingest_report.json
//! scores/       <measure>.f64 (little-endian f64 per node), compute_report.json
//! dumps/        one dump per measure, export_report.json
//! correlation/  matrix.csv, matrix.json, correlate_report.json
//! ```
//!
//! Each stage can run alone from the previous stage's files, or in-process
//! as part of `pipeline`. Both paths produce the same bytes.

use std::fs::{self, File};
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use impactrank_core::correlation::{
    correlation_matrix, CorrelationError, CorrelationMatrix, TIE_RULE,
};
use impactrank_core::export::{read_dump, write_dump, DumpSpec, ExportError};
use impactrank_core::graph::{BuildReport, GraphError};
use impactrank_core::ingest::{
    merge_sources, IngestError, IngestOptions, IngestOutput, IngestReport, SourceDescriptor,
    UNIFIED_EDGES_FILE, UNIFIED_RECORDS_FILE,
};
use impactrank_core::measures::MeasureError;
use impactrank_core::{compute_all, CitationGraph, Doi, Measure, MeasureParams, ScoreVector};
use impactrank_serve::{load_store, ServeOptions, StoreError};

use crate::config::{ConfigError, PipelineConfig};

pub const INGEST_REPORT: &str = "ingest_report.json";
pub const COMPUTE_REPORT: &str = "compute_report.json";
pub const EXPORT_REPORT: &str = "export_report.json";
pub const CORRELATE_REPORT: &str = "correlate_report.json";
pub const MATRIX_CSV: &str = "matrix.csv";
pub const MATRIX_JSON: &str = "matrix.json";

#[derive(Debug, Error)]
pub enum StageError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Measure(#[from] MeasureError),
    #[error(transparent)]
    Export(#[from] ExportError),
    #[error(transparent)]
    Correlation(#[from] CorrelationError),
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
    #[error("{0}")]
    Inconsistent(String),
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> StageError + '_ {
    move |source| StageError::Io {
        path: path.to_path_buf(),
        source,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subcommand {
    Ingest,
    Compute,
    Export,
    Correlate,
    Serve,
    Pipeline { then_serve: bool },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestStageReport {
    pub records_file: String,
    pub edges_file: String,
    #[serde(flatten)]
    pub ingest: IngestReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasureSummary {
    pub measure: Measure,
    pub file: String,
    pub iterations_run: u32,
    pub converged: bool,
    pub future_dated: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComputeReport {
    pub graph: BuildReport,
    pub params: MeasureParams,
    pub measures: Vec<MeasureSummary>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DumpSummary {
    pub measure: Measure,
    pub file: String,
    pub rows: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExportReport {
    pub graph_id: String,
    pub dumps: Vec<DumpSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaxPair {
    pub a: Measure,
    pub b: Measure,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelateReport {
    pub k: usize,
    pub nodes: usize,
    pub tie_rule: String,
    pub max_pair: Option<MaxPair>,
    pub degenerate_pairs: Vec<(Measure, Measure)>,
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), StageError> {
    let mut text = serde_json::to_string_pretty(value).map_err(|source| StageError::Json {
        path: path.to_path_buf(),
        source,
    })?;
    text.push('\n');
    fs::write(path, text).map_err(io_err(path))
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, StageError> {
    let file = File::open(path).map_err(io_err(path))?;
    serde_json::from_reader(BufReader::new(file)).map_err(|source| StageError::Json {
        path: path.to_path_buf(),
        source,
    })
}

fn create_dir(dir: &Path) -> Result<(), StageError> {
    fs::create_dir_all(dir).map_err(io_err(dir))
}

fn require(path: PathBuf, stage: &'static str) -> Result<PathBuf, ConfigError> {
    if path.exists() {
        Ok(path)
    } else {
        Err(ConfigError::MissingInput { path, stage })
    }
}

fn file_name(path: &Path) -> String {
    path.file_name()
        .unwrap_or_default()
        .to_string_lossy()
        .into_owned()
}

fn ingest_options(cfg: &PipelineConfig) -> IngestOptions {
    IngestOptions::for_current_year(cfg.params.current_year)
}

/// Merges the configured sources and writes the unified pair.
pub fn ingest(cfg: &PipelineConfig) -> Result<IngestOutput, StageError> {
    let t = Instant::now();
    let out = merge_sources(&cfg.sources, &ingest_options(cfg))?;
    let dir = cfg.unified_dir();
    create_dir(&dir)?;
    let desc = out.write_unified(&dir, "unified")?;
    let report = IngestStageReport {
        records_file: file_name(&desc.metadata_path),
        edges_file: file_name(&desc.edges_path),
        ingest: out.report.clone(),
    };
    write_json(&dir.join(INGEST_REPORT), &report)?;
    let u = &out.report.unified;
    log::info!(
        "ingest: {} DOIs ({} dated), {} edges from {} sources in {:.1?}",
        u.distinct_dois,
        u.dated_dois,
        u.distinct_edges,
        cfg.sources.len(),
        t.elapsed()
    );
    Ok(out)
}

fn unified_source(cfg: &PipelineConfig) -> Result<SourceDescriptor, ConfigError> {
    let dir = cfg.unified_dir();
    Ok(SourceDescriptor::new(
        "unified",
        require(dir.join(UNIFIED_RECORDS_FILE), "ingest")?,
        require(dir.join(UNIFIED_EDGES_FILE), "ingest")?,
    ))
}

fn load_graph(cfg: &PipelineConfig) -> Result<(CitationGraph, BuildReport), StageError> {
    let unified = merge_sources(&[unified_source(cfg)?], &ingest_options(cfg))?;
    Ok(unified.build_graph()?)
}

fn write_vector(path: &Path, scores: &[f64]) -> Result<(), StageError> {
    let mut w = BufWriter::new(File::create(path).map_err(io_err(path))?);
    for s in scores {
        w.write_all(&s.to_le_bytes()).map_err(io_err(path))?;
    }
    w.flush().map_err(io_err(path))
}

fn read_vector(path: &Path) -> Result<Vec<f64>, StageError> {
    let mut bytes = Vec::new();
    File::open(path)
        .and_then(|mut f| f.read_to_end(&mut bytes))
        .map_err(io_err(path))?;
    if bytes.len() % 8 != 0 {
        return Err(StageError::Inconsistent(format!(
            "{}: truncated score file",
            path.display()
        )));
    }
    Ok(bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect())
}

/// Builds the graph, computes all five measures and stores the raw vectors.
pub fn compute(
    cfg: &PipelineConfig,
    g: &CitationGraph,
    build: &BuildReport,
) -> Result<Vec<ScoreVector>, StageError> {
    let t = Instant::now();
    let set = compute_all(g, &cfg.params)?;
    let dir = cfg.scores_dir();
    create_dir(&dir)?;
    let mut measures = Vec::new();
    for sv in set.iter() {
        let file = format!("{}.f64", sv.measure.key());
        write_vector(&dir.join(&file), &sv.scores)?;
        measures.push(MeasureSummary {
            measure: sv.measure,
            file,
            iterations_run: sv.iterations_run,
            converged: sv.converged,
            future_dated: sv.future_dated,
        });
    }
    let report = ComputeReport {
        graph: *build,
        params: cfg.params.clone(),
        measures,
    };
    write_json(&dir.join(COMPUTE_REPORT), &report)?;
    log::info!(
        "compute: {} nodes, {} edges in {:.1?}",
        g.node_count(),
        g.edge_count(),
        t.elapsed()
    );
    Ok(set.into_vec())
}

fn load_vectors(cfg: &PipelineConfig, g: &CitationGraph) -> Result<Vec<ScoreVector>, StageError> {
    let dir = cfg.scores_dir();
    let report: ComputeReport = read_json(&require(dir.join(COMPUTE_REPORT), "compute")?)?;
    if report.graph.nodes != g.node_count() {
        return Err(StageError::Inconsistent(format!(
            "scores cover {} nodes but the unified graph has {}; rerun compute",
            report.graph.nodes,
            g.node_count()
        )));
    }
    report
        .measures
        .iter()
        .map(|m| {
            let path = dir.join(&m.file);
            let scores = read_vector(&path)?;
            if scores.len() != g.node_count() {
                return Err(StageError::Inconsistent(format!(
                    "{}: {} scores for {} nodes",
                    path.display(),
                    scores.len(),
                    g.node_count()
                )));
            }
            Ok(ScoreVector {
                measure: m.measure,
                scores,
                params: report.params.clone(),
                iterations_run: m.iterations_run,
                converged: m.converged,
                future_dated: m.future_dated,
            })
        })
        .collect()
}

/// Removes older dumps for the same measure and graph whose name differs from `keep`.
fn remove_stale_dumps(dir: &Path, spec: &DumpSpec, keep: &str) -> Result<(), StageError> {
    for entry in fs::read_dir(dir).map_err(io_err(dir))? {
        let entry = entry.map_err(io_err(dir))?;
        let name = entry.file_name().to_string_lossy().into_owned();
        if name == keep {
            continue;
        }
        if let Ok(old) = DumpSpec::parse_file_name(&name) {
            if old.measure == spec.measure && old.graph_id == spec.graph_id {
                log::info!("export: replacing {name}");
                fs::remove_file(entry.path()).map_err(io_err(&entry.path()))?;
            }
        }
    }
    Ok(())
}

pub fn export(
    cfg: &PipelineConfig,
    g: &CitationGraph,
    vectors: &[ScoreVector],
) -> Result<Vec<PathBuf>, StageError> {
    let t = Instant::now();
    let dir = cfg.dumps_dir();
    create_dir(&dir)?;
    let mut paths = Vec::new();
    let mut dumps = Vec::new();
    for sv in vectors {
        let spec = DumpSpec::new(sv, &cfg.graph_id, cfg.compress)?;
        remove_stale_dumps(&dir, &spec, &spec.file_name())?;
        let path = write_dump(sv, g, &spec, &dir)?;
        dumps.push(DumpSummary {
            measure: sv.measure,
            file: file_name(&path),
            rows: sv.len(),
        });
        paths.push(path);
    }
    let report = ExportReport {
        graph_id: cfg.graph_id.clone(),
        dumps,
    };
    write_json(&dir.join(EXPORT_REPORT), &report)?;
    log::info!("export: {} dumps in {:.1?}", paths.len(), t.elapsed());
    Ok(paths)
}

/// The dumps of `graph_id` in `dir`, one per measure, in measure order.
pub fn find_dumps(dir: &Path, graph_id: &str) -> Result<Vec<PathBuf>, StageError> {
    let mut found: [Option<PathBuf>; 5] = Default::default();
    let entries = fs::read_dir(dir).map_err(|_| ConfigError::MissingInput {
        path: dir.to_path_buf(),
        stage: "export",
    })?;
    for entry in entries {
        let entry = entry.map_err(io_err(dir))?;
        let name = entry.file_name().to_string_lossy().into_owned();
        let Ok(spec) = DumpSpec::parse_file_name(&name) else {
            continue;
        };
        if spec.graph_id != graph_id {
            continue;
        }
        let slot = &mut found[Measure::ALL
            .iter()
            .position(|&m| m == spec.measure)
            .unwrap()];
        if let Some(prev) = slot {
            return Err(StageError::Inconsistent(format!(
                "two {} dumps for graph {graph_id}: {} and {name}",
                spec.measure,
                file_name(prev)
            )));
        }
        *slot = Some(entry.path());
    }
    Measure::ALL
        .iter()
        .zip(found)
        .map(|(m, p)| {
            p.ok_or_else(|| {
                StageError::Inconsistent(format!(
                    "no {m} dump for graph {graph_id} in {}",
                    dir.display()
                ))
            })
        })
        .collect()
}

/// Score vectors recovered from dumps, indexed in DOI order (the graph's node order).
fn vectors_from_dumps(cfg: &PipelineConfig) -> Result<Vec<ScoreVector>, StageError> {
    let paths = find_dumps(&cfg.dumps_dir(), &cfg.graph_id)?;
    let mut dois: Option<Vec<Doi>> = None;
    let mut vectors = Vec::new();
    for (m, path) in Measure::ALL.iter().zip(&paths) {
        let mut rows = read_dump(path)?;
        rows.sort_unstable_by(|a, b| a.0.cmp(&b.0));
        let these: Vec<Doi> = rows.iter().map(|(d, _)| d.clone()).collect();
        match &dois {
            None => dois = Some(these),
            Some(first) if *first != these => {
                return Err(StageError::Inconsistent(format!(
                    "{} covers different DOIs than {}",
                    path.display(),
                    paths[0].display()
                )))
            }
            Some(_) => {}
        }
        vectors.push(ScoreVector {
            measure: *m,
            scores: rows.into_iter().map(|(_, s)| s).collect(),
            params: cfg.params.clone(),
            iterations_run: 0,
            converged: true,
            future_dated: 0,
        });
    }
    Ok(vectors)
}

pub fn correlate(
    cfg: &PipelineConfig,
    vectors: &[ScoreVector],
) -> Result<CorrelationMatrix, StageError> {
    let t = Instant::now();
    let matrix = correlation_matrix(vectors, cfg.k)?;
    let dir = cfg.correlation_dir();
    create_dir(&dir)?;
    let csv_path = dir.join(MATRIX_CSV);
    fs::write(&csv_path, matrix.to_csv()).map_err(io_err(&csv_path))?;
    write_json(&dir.join(MATRIX_JSON), &matrix)?;
    let mut degenerate_pairs = Vec::new();
    for i in 0..matrix.measures.len() {
        for j in i + 1..matrix.measures.len() {
            if matrix.degenerate[i][j] {
                degenerate_pairs.push((matrix.measures[i], matrix.measures[j]));
            }
        }
    }
    let report = CorrelateReport {
        k: cfg.k,
        nodes: vectors.first().map_or(0, |v| v.len()),
        tie_rule: TIE_RULE.to_string(),
        max_pair: matrix
            .max_pair()
            .map(|(a, b, value)| MaxPair { a, b, value }),
        degenerate_pairs,
    };
    write_json(&dir.join(CORRELATE_REPORT), &report)?;
    log::info!("correlate: k = {} in {:.1?}", cfg.k, t.elapsed());
    Ok(matrix)
}

fn serve(cfg: &PipelineConfig) -> Result<(), StageError> {
    let paths = find_dumps(&cfg.serve_dumps_dir(), &cfg.graph_id)?;
    let store = load_store(&paths)?;
    let opts = ServeOptions {
        batch_cap: cfg.serve.batch_cap,
    };
    let mut rt = tokio::runtime::Builder::new_multi_thread();
    if let Some(n) = cfg.workers {
        rt.worker_threads(n);
    }
    let rt = rt
        .enable_all()
        .build()
        .map_err(io_err(Path::new("tokio runtime")))?;
    let listen = cfg.serve.listen;
    rt.block_on(async move {
        let listener = tokio::net::TcpListener::bind(listen).await?;
        // the bound address goes to stdout so callers using port 0 can find it
        println!("listening on http://{}", listener.local_addr()?);
        io::stdout().flush()?;
        impactrank_serve::serve(listener, store, opts).await
    })
    .map_err(io_err(Path::new(&listen.to_string())))
}

/// Checks the configuration and the inputs `cmd` needs, before anything is written.
pub fn preflight(cmd: Subcommand, cfg: &PipelineConfig) -> Result<(), ConfigError> {
    cfg.validate()?;
    match cmd {
        Subcommand::Ingest | Subcommand::Pipeline { .. } => cfg.validate_sources(),
        Subcommand::Compute => unified_source(cfg).map(drop),
        Subcommand::Export => {
            unified_source(cfg)?;
            require(cfg.scores_dir().join(COMPUTE_REPORT), "compute").map(drop)
        }
        Subcommand::Correlate => require(cfg.dumps_dir(), "export").map(drop),
        Subcommand::Serve => require(cfg.serve_dumps_dir(), "export").map(drop),
    }
}

fn run_stages(cmd: Subcommand, cfg: &PipelineConfig) -> Result<(), StageError> {
    match cmd {
        Subcommand::Ingest => ingest(cfg).map(drop),
        Subcommand::Compute => {
            let (g, build) = load_graph(cfg)?;
            compute(cfg, &g, &build).map(drop)
        }
        Subcommand::Export => {
            let (g, _) = load_graph(cfg)?;
            let vectors = load_vectors(cfg, &g)?;
            export(cfg, &g, &vectors).map(drop)
        }
        Subcommand::Correlate => correlate(cfg, &vectors_from_dumps(cfg)?).map(drop),
        Subcommand::Serve => unreachable!("serve runs outside the worker pool"),
        Subcommand::Pipeline { .. } => {
            let unified = ingest(cfg)?;
            let (g, build) = unified.build_graph()?;
            drop(unified);
            let vectors = compute(cfg, &g, &build)?;
            export(cfg, &g, &vectors)?;
            correlate(cfg, &vectors).map(drop)
        }
    }
}

/// Runs one subcommand. Validation happens first, so a bad configuration
/// writes nothing.
pub fn run_subcommand(cmd: Subcommand, cfg: &PipelineConfig) -> Result<(), StageError> {
    preflight(cmd, cfg)?;
    if cmd != Subcommand::Serve {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.workers.unwrap_or(0))
            .build()
            .map_err(|e| StageError::Inconsistent(format!("worker pool: {e}")))?;
        pool.install(|| run_stages(cmd, cfg))?;
    }
    match cmd {
        Subcommand::Serve | Subcommand::Pipeline { then_serve: true } => serve(cfg),
        _ => Ok(()),
    }
}
