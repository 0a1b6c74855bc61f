//! Read-only HTTP service over precomputed score dumps.
//!
//! Routes:
//!
//! - `GET /v1/health`: graph id, parameters and load time of the store.
//! - `GET /v1/scores/{doi}`: the five scores of one DOI (404 if unknown).
//! - `POST /v1/scores` with `{"dois": [...]}`: batch lookup, at most
//!   `batch_cap` DOIs, answered in request order.

use std::collections::{BTreeMap, HashMap};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use axum::extract::rejection::JsonRejection;
use axum::extract::{Path as UrlPath, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use impactrank_core::export::{read_dump, DumpSpec, ExportError};
use impactrank_core::{Doi, Measure};

pub const DEFAULT_BATCH_CAP: usize = 1000;

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("expected one dump per measure, got {0} paths")]
    WrongDumpCount(usize),
    #[error("{0}: not a dump file name")]
    BadName(PathBuf),
    #[error("two dumps for measure {0}")]
    DuplicateMeasure(Measure),
    #[error("dumps come from different graphs: {0:?} and {1:?}")]
    GraphIdMismatch(String, String),
    #[error("DOI {doi} is missing from {dump}")]
    MissingDoi { doi: String, dump: PathBuf },
    #[error("DOI {doi} appears twice in {dump}")]
    DuplicateDoi { doi: String, dump: PathBuf },
    #[error(transparent)]
    Dump(#[from] ExportError),
}

/// The five scores of one publication.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scores {
    pub cc: f64,
    pub icc: f64,
    pub pagerank: f64,
    pub ram: f64,
    pub attrank: f64,
}

impl Scores {
    fn from_slots(slots: [Option<f64>; 5]) -> Option<Self> {
        let [cc, icc, pagerank, ram, attrank] = slots;
        Some(Scores {
            cc: cc?,
            icc: icc?,
            pagerank: pagerank?,
            ram: ram?,
            attrank: attrank?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StoreMetadata {
    pub graph_id: String,
    /// Per measure tag, the parameters encoded in its dump name.
    pub params: BTreeMap<String, BTreeMap<String, String>>,
    pub dois: usize,
    pub loaded_at: String,
}

#[derive(Debug, Clone)]
pub struct ScoreStore {
    records: HashMap<Doi, Scores>,
    pub metadata: StoreMetadata,
}

fn slot(m: Measure) -> usize {
    Measure::ALL.iter().position(|&x| x == m).unwrap()
}

/// Loads and joins five dumps (one per measure) from the same graph.
pub fn load_store<P: AsRef<Path>>(dumps: &[P]) -> Result<ScoreStore, StoreError> {
    if dumps.len() != Measure::ALL.len() {
        return Err(StoreError::WrongDumpCount(dumps.len()));
    }
    let mut by_measure: [Option<(PathBuf, DumpSpec)>; 5] = Default::default();
    for path in dumps {
        let path = path.as_ref();
        let spec = path
            .file_name()
            .and_then(|n| n.to_str())
            .and_then(|n| DumpSpec::parse_file_name(n).ok())
            .ok_or_else(|| StoreError::BadName(path.to_path_buf()))?;
        let entry = &mut by_measure[slot(spec.measure)];
        if entry.is_some() {
            return Err(StoreError::DuplicateMeasure(spec.measure));
        }
        *entry = Some((path.to_path_buf(), spec));
    }
    let by_measure: Vec<(PathBuf, DumpSpec)> = by_measure.into_iter().map(Option::unwrap).collect();
    let graph_id = by_measure[0].1.graph_id.clone();
    if let Some((_, other)) = by_measure.iter().find(|(_, s)| s.graph_id != graph_id) {
        return Err(StoreError::GraphIdMismatch(
            graph_id,
            other.graph_id.clone(),
        ));
    }

    let mut slots: HashMap<Doi, [Option<f64>; 5]> = HashMap::new();
    for (k, (path, _)) in by_measure.iter().enumerate() {
        let rows = read_dump(path)?;
        for (doi, score) in rows {
            let entry = match slots.get_mut(&doi) {
                Some(e) => e,
                None if k == 0 => slots.entry(doi.clone()).or_default(),
                None => {
                    return Err(StoreError::MissingDoi {
                        doi: doi.to_string(),
                        dump: by_measure[0].0.clone(),
                    })
                }
            };
            if entry[k].replace(score).is_some() {
                return Err(StoreError::DuplicateDoi {
                    doi: doi.to_string(),
                    dump: path.clone(),
                });
            }
        }
    }
    let mut records = HashMap::with_capacity(slots.len());
    let mut missing: Option<(Doi, usize)> = None;
    for (doi, s) in slots {
        match Scores::from_slots(s) {
            Some(scores) => {
                records.insert(doi, scores);
            }
            None => {
                let k = s.iter().position(Option::is_none).unwrap();
                // report the lexicographically first offender for stable messages
                if missing.as_ref().is_none_or(|(d, _)| doi < *d) {
                    missing = Some((doi, k));
                }
            }
        }
    }
    if let Some((doi, k)) = missing {
        return Err(StoreError::MissingDoi {
            doi: doi.to_string(),
            dump: by_measure[k].0.clone(),
        });
    }
    let params = by_measure
        .iter()
        .map(|(_, s)| {
            (
                s.measure.tag().to_string(),
                s.params.iter().cloned().collect(),
            )
        })
        .collect();
    Ok(ScoreStore {
        metadata: StoreMetadata {
            graph_id,
            params,
            dois: records.len(),
            loaded_at: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
        },
        records,
    })
}

impl ScoreStore {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn get(&self, doi: &Doi) -> Option<&Scores> {
        self.records.get(doi)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LookupResult {
    /// The DOI as requested.
    pub doi: String,
    pub found: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scores: Option<Scores>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RequestError {
    #[error("no DOIs requested")]
    Empty,
    #[error("{got} DOIs requested, at most {cap} allowed")]
    OverCap { got: usize, cap: usize },
    #[error("invalid request body: {0}")]
    BadBody(String),
}

/// Looks up each requested DOI after normalisation. One result per request
/// entry, in request order; unknown or malformed DOIs come back `found: false`.
pub fn get_scores<S: AsRef<str>>(
    store: &ScoreStore,
    dois: &[S],
    cap: usize,
) -> Result<Vec<LookupResult>, RequestError> {
    if dois.is_empty() {
        return Err(RequestError::Empty);
    }
    if dois.len() > cap {
        return Err(RequestError::OverCap {
            got: dois.len(),
            cap,
        });
    }
    Ok(dois
        .iter()
        .map(|raw| {
            let raw = raw.as_ref();
            let scores = Doi::parse(raw).ok().and_then(|d| store.get(&d).copied());
            LookupResult {
                doi: raw.to_string(),
                found: scores.is_some(),
                scores,
            }
        })
        .collect())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ResponseMetadata {
    pub graph_id: String,
    pub params: BTreeMap<String, BTreeMap<String, String>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScoresResponse {
    pub metadata: ResponseMetadata,
    pub results: Vec<LookupResult>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BatchRequest {
    pub dois: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ErrorBody {
    pub error: String,
}

impl IntoResponse for RequestError {
    fn into_response(self) -> Response {
        let body = ErrorBody {
            error: self.to_string(),
        };
        (StatusCode::BAD_REQUEST, Json(body)).into_response()
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ServeOptions {
    pub batch_cap: usize,
}

impl Default for ServeOptions {
    fn default() -> Self {
        ServeOptions {
            batch_cap: DEFAULT_BATCH_CAP,
        }
    }
}

struct AppState {
    store: ScoreStore,
    opts: ServeOptions,
}

impl AppState {
    fn respond(&self, results: Vec<LookupResult>) -> ScoresResponse {
        ScoresResponse {
            metadata: ResponseMetadata {
                graph_id: self.store.metadata.graph_id.clone(),
                params: self.store.metadata.params.clone(),
            },
            results,
        }
    }
}

pub fn router(store: ScoreStore, opts: ServeOptions) -> Router {
    let state = Arc::new(AppState { store, opts });
    Router::new()
        .route("/v1/health", get(health))
        .route("/v1/scores", post(batch))
        .route("/v1/scores/{*doi}", get(single))
        .with_state(state)
}

async fn health(State(state): State<Arc<AppState>>) -> Json<StoreMetadata> {
    Json(state.store.metadata.clone())
}

async fn single(State(state): State<Arc<AppState>>, UrlPath(doi): UrlPath<String>) -> Response {
    let results = get_scores(&state.store, &[doi], 1).expect("one DOI is always within cap");
    let status = if results[0].found {
        StatusCode::OK
    } else {
        StatusCode::NOT_FOUND
    };
    (status, Json(state.respond(results))).into_response()
}

async fn batch(
    State(state): State<Arc<AppState>>,
    body: Result<Json<BatchRequest>, JsonRejection>,
) -> Result<Json<ScoresResponse>, RequestError> {
    let Json(req) = body.map_err(|e| RequestError::BadBody(e.body_text()))?;
    let results = get_scores(&state.store, &req.dois, state.opts.batch_cap)?;
    Ok(Json(state.respond(results)))
}

/// Serves `store` on `listener` until ctrl-c.
pub async fn serve(
    listener: tokio::net::TcpListener,
    store: ScoreStore,
    opts: ServeOptions,
) -> std::io::Result<()> {
    log::info!(
        "serving {} DOIs of graph {} on {}",
        store.len(),
        store.metadata.graph_id,
        listener.local_addr()?
    );
    axum::serve(listener, router(store, opts))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}
