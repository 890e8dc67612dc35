//! Stateless HTTP/JSON front end over the selection pipeline.
//!
//! Schema, rules and materials are loaded once at startup and shared
//! read-only between requests.
//!
//! | method | path            | body                 | response              |
//! |--------|-----------------|----------------------|-----------------------|
//! | GET    | `/healthz`      |                      | `{materials}`         |
//! | GET    | `/api/schema`   |                      | property list         |
//! | GET    | `/api/metrics`  |                      | metric list           |
//! | GET    | `/api/materials/{id}` |                | one material record   |
//! | POST   | `/api/classify` | `{requirement}`      | classification        |
//! | POST   | `/api/compare`  | `{requirement, ...}` | comparison report     |
//!
//! Errors are `{"error": <message>, ...}` with status 400 for malformed
//! input and 422 for well-formed requests the pipeline cannot answer.

use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use clap::Parser;
use matsel_core::{
    classify, compare_metrics, ingest_csv, ClassifyError, CompareOptions, DesignRequirement,
    Knowledgebase, MaterialDatabase, MetricKind, PipelineError, PropertyKind, PropertySchema,
    SelectionMode,
};
use serde::{Deserialize, Serialize};
use serde_json::json;
use tower_http::cors::CorsLayer;

#[derive(Debug, Clone, Parser)]
#[command(name = "matsel-service", version, about = "Materials selection HTTP service")]
pub struct ServiceConfig {
    #[arg(long, default_value = "127.0.0.1:8080")]
    pub bind: SocketAddr,
    /// Materials CSV served by every query.
    #[arg(long)]
    pub db: PathBuf,
    /// Schema file; the built-in schema when omitted.
    #[arg(long, env = "MATSEL_SCHEMA")]
    pub schema: Option<PathBuf>,
    /// Rules file; the built-in knowledgebase when omitted.
    #[arg(long)]
    pub rules: Option<PathBuf>,
    /// Selection mode used when a request does not name one.
    #[arg(long, default_value = "oriented", value_parser = |s: &str| s.parse::<SelectionMode>())]
    pub mode: SelectionMode,
}

/// Everything a request needs, loaded once.
#[derive(Debug)]
pub struct AppState {
    pub schema: PropertySchema,
    pub kb: Knowledgebase,
    pub db: MaterialDatabase,
    pub default_mode: SelectionMode,
}

impl AppState {
    pub fn load(config: &ServiceConfig) -> Result<Self, String> {
        let read = |p: &PathBuf| {
            std::fs::read_to_string(p).map_err(|e| format!("cannot read '{}': {e}", p.display()))
        };
        let schema = match &config.schema {
            Some(p) => PropertySchema::parse(&read(p)?).map_err(|e| e.to_string())?,
            None => PropertySchema::default_schema(),
        };
        let kb = match &config.rules {
            Some(p) => Knowledgebase::load(&read(p)?, &schema),
            None => Knowledgebase::default_rules(&schema),
        }
        .map_err(|e| e.to_string())?;
        let db = ingest_csv(&read(&config.db)?, &schema).map_err(|e| e.to_string())?;
        Ok(Self {
            schema,
            kb,
            db,
            default_mode: config.mode,
        })
    }
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/healthz", get(healthz))
        .route("/api/schema", get(schema))
        .route("/api/metrics", get(metrics))
        .route("/api/materials/{id}", get(material))
        .route("/api/classify", post(classify_handler))
        .route("/api/compare", post(compare_handler))
        .layer(CorsLayer::permissive())
        .with_state(state)
}

pub async fn serve(config: ServiceConfig) -> Result<(), Box<dyn std::error::Error>> {
    let state = Arc::new(AppState::load(&config)?);
    let listener = tokio::net::TcpListener::bind(config.bind).await?;
    eprintln!("matsel-service listening on {}", listener.local_addr()?);
    axum::serve(listener, router(state))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    Ok(())
}

/// A requirement cell value: numbers for numeric properties, strings for
/// intervals (`lo..hi`) and ordinal labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CellValue {
    Number(f64),
    Text(String),
}

impl CellValue {
    fn to_cell(&self) -> String {
        match self {
            CellValue::Number(v) => v.to_string(),
            CellValue::Text(s) => s.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RequirementItem {
    pub property: String,
    pub value: CellValue,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassifyRequest {
    pub requirement: Vec<RequirementItem>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompareRequest {
    pub requirement: Vec<RequirementItem>,
    /// Metric names; all six when omitted.
    #[serde(default)]
    pub metrics: Option<Vec<String>>,
    #[serde(default)]
    pub mode: Option<String>,
    #[serde(default)]
    pub normalize: bool,
    #[serde(default)]
    pub top_k: Option<usize>,
}

#[derive(Debug, Serialize)]
struct PropertyInfo<'a> {
    name: &'a str,
    kind: PropertyKind,
    unit: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    labels: Option<Vec<&'a str>>,
}

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    body: serde_json::Value,
}

impl ApiError {
    fn bad_request(message: impl ToString) -> Self {
        Self {
            status: StatusCode::BAD_REQUEST,
            body: json!({ "error": message.to_string() }),
        }
    }

    fn unprocessable(message: impl ToString) -> Self {
        Self {
            status: StatusCode::UNPROCESSABLE_ENTITY,
            body: json!({ "error": message.to_string() }),
        }
    }
}

impl From<ClassifyError> for ApiError {
    fn from(e: ClassifyError) -> Self {
        match &e {
            ClassifyError::Unclassifiable { nearest_misses } => Self {
                status: StatusCode::UNPROCESSABLE_ENTITY,
                body: json!({ "error": e.to_string(), "nearest_misses": nearest_misses }),
            },
            _ => Self::bad_request(e),
        }
    }
}

impl From<PipelineError> for ApiError {
    fn from(e: PipelineError) -> Self {
        match e {
            PipelineError::Classify(c) => c.into(),
            PipelineError::NoMetrics | PipelineError::Requirement(_) => Self::bad_request(e),
            _ => Self::unprocessable(e),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(self.body)).into_response()
    }
}

fn parse_body<T: for<'de> Deserialize<'de>>(body: &Bytes) -> Result<T, ApiError> {
    serde_json::from_slice(body).map_err(|e| ApiError::bad_request(format!("invalid request body: {e}")))
}

fn requirement(
    schema: &PropertySchema,
    items: &[RequirementItem],
) -> Result<DesignRequirement, ApiError> {
    let cells: Vec<(String, String)> = items
        .iter()
        .map(|i| (i.property.clone(), i.value.to_cell()))
        .collect();
    DesignRequirement::from_cells(schema, &cells).map_err(ApiError::bad_request)
}

/// Builds pipeline options from a request, falling back to `default_mode`.
pub fn compare_options(
    req: &CompareRequest,
    default_mode: SelectionMode,
) -> Result<CompareOptions, ApiError> {
    let metrics = match &req.metrics {
        None => MetricKind::ALL.to_vec(),
        Some(names) => names
            .iter()
            .map(|n| n.parse::<MetricKind>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(ApiError::bad_request)?,
    };
    if metrics.is_empty() {
        return Err(ApiError::bad_request("no metrics requested"));
    }
    let mode = match &req.mode {
        None => default_mode,
        Some(m) => m.parse().map_err(ApiError::bad_request)?,
    };
    if req.top_k == Some(0) {
        return Err(ApiError::bad_request("top_k must be at least 1"));
    }
    Ok(CompareOptions {
        metrics,
        mode,
        normalize: req.normalize,
        top_k: req.top_k,
    })
}

async fn healthz(State(state): State<Arc<AppState>>) -> Json<serde_json::Value> {
    Json(json!({ "materials": state.db.len() }))
}

async fn schema(State(state): State<Arc<AppState>>) -> Response {
    let props: Vec<PropertyInfo> = state
        .schema
        .properties()
        .iter()
        .map(|p| PropertyInfo {
            name: &p.name,
            kind: p.kind,
            unit: &p.unit,
            labels: p.ordinal_scale.as_ref().map(|s| s.labels().collect()),
        })
        .collect();
    Json(props).into_response()
}

async fn metrics() -> Json<serde_json::Value> {
    let list: Vec<_> = MetricKind::ALL
        .iter()
        .map(|m| json!({ "name": m.name(), "orientation": format!("{:?}", m.orientation()).to_lowercase() }))
        .collect();
    Json(json!(list))
}

async fn material(State(state): State<Arc<AppState>>, Path(id): Path<String>) -> Response {
    let Some(m) = state.db.materials().iter().find(|m| m.id == id) else {
        return ApiError {
            status: StatusCode::NOT_FOUND,
            body: json!({ "error": format!("no material with id '{id}'") }),
        }
        .into_response();
    };
    let properties: Vec<_> = state
        .schema
        .properties()
        .iter()
        .zip(&m.values)
        .map(|(p, v)| json!({ "property": p.name, "value": v.to_string() }))
        .collect();
    Json(json!({ "id": m.id, "name": m.name, "class": m.class, "properties": properties })).into_response()
}

async fn classify_handler(State(state): State<Arc<AppState>>, body: Bytes) -> Result<Response, ApiError> {
    let body: ClassifyRequest = parse_body(&body)?;
    let req = requirement(&state.schema, &body.requirement)?;
    let result = classify(&req, &state.kb, &state.schema)?;
    Ok(Json(result).into_response())
}

async fn compare_handler(State(state): State<Arc<AppState>>, body: Bytes) -> Result<Response, ApiError> {
    let body: CompareRequest = parse_body(&body)?;
    let options = compare_options(&body, state.default_mode)?;
    let req = requirement(&state.schema, &body.requirement)?;
    let report = compare_metrics(&state.db, &req, &state.kb, &state.schema, &options)?;
    Ok(Json(report).into_response())
}
