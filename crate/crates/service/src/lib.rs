//! Stateless HTTP/JSON facade over design, simulation, design-space sweeps
//! and feed polarization.
//!
//! Every handler parses its input, runs the computation on the blocking
//! pool and serializes the result; nothing is shared between requests.
//! Bodies that are not valid JSON for the schema are rejected with 400;
//! well-formed requests the library refuses get 422. Both carry
//! `{"code", "message"}`.

use axum::body::Bytes;
use axum::extract::rejection::QueryRejection;
use axum::extract::{Path, Query};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use dualband::io::{DesignReport, DesignSource};
use dualband::polarization::{FeedDelay, PolarizationReport};
use dualband::report::{
    self, FigureKind, GridRequest, SimulationReport, SpaceQuery, SpaceReport, MAX_CHART_POINTS,
};
use dualband::shifter::ImpedanceWindow;
use dualband::sim::write_touchstone;
use dualband::solver::SolverOptions;
use dualband::space::parse_k_list;
use dualband::Topology;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use tower_http::cors::CorsLayer;

/// OpenAPI description of every route.
pub const OPENAPI_YAML: &str = include_str!("../openapi.yaml");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorBody {
    pub code: String,
    pub message: String,
}

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    body: ErrorBody,
}

impl ApiError {
    fn malformed(message: impl Into<String>) -> Self {
        ApiError {
            status: StatusCode::BAD_REQUEST,
            body: ErrorBody {
                code: "MalformedRequest".into(),
                message: message.into(),
            },
        }
    }

    fn unprocessable(code: &str, message: impl Into<String>) -> Self {
        ApiError {
            status: StatusCode::UNPROCESSABLE_ENTITY,
            body: ErrorBody {
                code: code.into(),
                message: message.into(),
            },
        }
    }

    fn internal(message: impl Into<String>) -> Self {
        ApiError {
            status: StatusCode::INTERNAL_SERVER_ERROR,
            body: ErrorBody {
                code: "Internal".into(),
                message: message.into(),
            },
        }
    }
}

impl From<dualband::Error> for ApiError {
    fn from(e: dualband::Error) -> Self {
        match e {
            dualband::Error::Parse(m) => ApiError::malformed(m),
            other => ApiError::unprocessable(other.code(), other.to_string()),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(self.body)).into_response()
    }
}

type ApiResult<T> = Result<T, ApiError>;

fn parse_body<T: DeserializeOwned>(body: &[u8]) -> ApiResult<T> {
    serde_json::from_slice(body).map_err(|e| ApiError::malformed(e.to_string()))
}

fn parse_design(v: serde_json::Value) -> ApiResult<DesignSource> {
    DesignSource::from_value(v).map_err(ApiError::from)
}

/// Run CPU-bound work off the async executor.
async fn compute<T, F>(f: F) -> ApiResult<T>
where
    F: FnOnce() -> ApiResult<T> + Send + 'static,
    T: Send + 'static,
{
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ApiError::internal(e.to_string()))?
}

async fn healthz() -> &'static str {
    "ok"
}

async fn openapi() -> impl IntoResponse {
    ([(header::CONTENT_TYPE, "application/yaml")], OPENAPI_YAML)
}

async fn handle_design(body: Bytes) -> ApiResult<Json<DesignReport>> {
    let src = parse_design(parse_body(&body)?)?;
    compute(move || {
        let req = src.request();
        let d = req.design(&SolverOptions::default())?;
        Ok(Json(DesignReport::new(req, &d)))
    })
    .await
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SimulateBody {
    design: serde_json::Value,
    #[serde(default)]
    grid: GridRequest,
    #[serde(default)]
    touchstone: bool,
}

#[derive(Debug, Serialize)]
pub struct SimulateResponse {
    #[serde(flatten)]
    pub report: SimulationReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub touchstone: Option<String>,
}

async fn handle_simulate(body: Bytes) -> ApiResult<Json<SimulateResponse>> {
    let b: SimulateBody = parse_body(&body)?;
    let src = parse_design(b.design)?;
    compute(move || {
        let req = src.request();
        let spec = req.spec()?;
        let grid = b.grid.resolve(spec.f1, spec.f2)?;
        let sim = report::simulate(req, &grid, MAX_CHART_POINTS, &SolverOptions::default())?;
        if !sim.report.failed_points.is_empty()
            && sim.report.failed_points.len() == sim.report.points
        {
            return Err(ApiError::unprocessable(
                "SimulationFailed",
                format!(
                    "all {} grid points failed (first: {})",
                    sim.report.points, sim.report.failed_points[0].code
                ),
            ));
        }
        let touchstone = b.touchstone.then(|| write_touchstone(&sim.sweep, spec.z0));
        Ok(Json(SimulateResponse {
            report: sim.report,
            touchstone,
        }))
    })
    .await
}

/// Query-string form of a sweep. `k` is a comma-separated list.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct SweepParams {
    k: Option<String>,
    m_start: Option<f64>,
    m_stop: Option<f64>,
    m_step: Option<f64>,
    n1: Option<f64>,
    z0: Option<f64>,
    topology: Option<String>,
    z_min: Option<f64>,
    z_max: Option<f64>,
    format: Option<String>,
}

impl SweepParams {
    fn into_query(self) -> ApiResult<(SpaceQuery, bool)> {
        let mut q = SpaceQuery::default();
        if let Some(k) = &self.k {
            q.k = parse_k_list(k)
                .map_err(|e| ApiError::malformed(format!("malformed k list: {e}")))?;
        }
        q.m_start = self.m_start.unwrap_or(q.m_start);
        q.m_stop = self.m_stop.unwrap_or(q.m_stop);
        q.m_step = self.m_step.unwrap_or(q.m_step);
        q.n1 = self.n1.unwrap_or(q.n1);
        q.z0 = self.z0.unwrap_or(q.z0);
        q.topology = self
            .topology
            .as_deref()
            .map(str::parse::<Topology>)
            .transpose()?;
        if self.z_min.is_some() || self.z_max.is_some() {
            let d = report::FIGURE_WINDOW;
            q.window = Some(ImpedanceWindow::new(
                self.z_min.unwrap_or(d.z_min),
                self.z_max.unwrap_or(d.z_max),
            ));
        }
        let csv = match self.format.as_deref() {
            None | Some("json") => false,
            Some("csv") => true,
            Some(other) => {
                return Err(ApiError::malformed(format!(
                    "unknown format '{other}' (json or csv)"
                )))
            }
        };
        Ok((q, csv))
    }
}

fn parse_figure(name: &str) -> ApiResult<FigureKind> {
    name.parse::<FigureKind>().map_err(|e| ApiError {
        status: StatusCode::NOT_FOUND,
        ..ApiError::from(e)
    })
}

async fn run_sweep(kind: FigureKind, q: SpaceQuery, csv: bool) -> ApiResult<Response> {
    compute(move || {
        let table = q.run(kind, &SolverOptions::default())?;
        Ok(if csv {
            ([(header::CONTENT_TYPE, "text/csv")], table.to_csv()).into_response()
        } else {
            Json(SpaceReport::new(kind, &table)).into_response()
        })
    })
    .await
}

async fn handle_sweep_get(
    Path(figure): Path<String>,
    params: Result<Query<SweepParams>, QueryRejection>,
) -> ApiResult<Response> {
    let kind = parse_figure(&figure)?;
    let Query(params) = params.map_err(|e| ApiError::malformed(e.body_text()))?;
    let (q, csv) = params.into_query()?;
    run_sweep(kind, q, csv).await
}

async fn handle_sweep_post(Path(figure): Path<String>, body: Bytes) -> ApiResult<Response> {
    let kind = parse_figure(&figure)?;
    let q: SpaceQuery = if body.is_empty() {
        SpaceQuery::default()
    } else {
        parse_body(&body)?
    };
    run_sweep(kind, q, false).await
}

fn default_port() -> usize {
    1
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct PolarizationBody {
    design: serde_json::Value,
    #[serde(default = "default_port")]
    port: usize,
    #[serde(default = "default_true")]
    quarter_wave: bool,
    /// Overrides `quarter_wave` when present.
    #[serde(default)]
    delay: Option<FeedDelay>,
    /// Evaluation frequencies; both design frequencies when omitted.
    #[serde(default)]
    frequencies_hz: Vec<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct PolarizationResponse {
    pub reports: Vec<PolarizationReport>,
}

async fn handle_polarization(body: Bytes) -> ApiResult<Json<PolarizationResponse>> {
    let b: PolarizationBody = parse_body(&body)?;
    let src = parse_design(b.design)?;
    compute(move || {
        let delay = b.delay.unwrap_or(FeedDelay::from_flag(b.quarter_wave));
        let reports = report::polarization(
            src.request(),
            b.port,
            delay,
            &b.frequencies_hz,
            &SolverOptions::default(),
        )?;
        Ok(Json(PolarizationResponse { reports }))
    })
    .await
}

async fn not_found() -> ApiError {
    ApiError {
        status: StatusCode::NOT_FOUND,
        body: ErrorBody {
            code: "NotFound".into(),
            message: "no such route".into(),
        },
    }
}

/// The full application with CORS enabled for browser clients.
pub fn router() -> Router {
    Router::new()
        .route("/healthz", get(healthz))
        .route("/api/v1/openapi.yaml", get(openapi))
        .route("/api/v1/design", post(handle_design))
        .route("/api/v1/simulate", post(handle_simulate))
        .route(
            "/api/v1/sweep/{figure}",
            get(handle_sweep_get).post(handle_sweep_post),
        )
        .route("/api/v1/polarization", post(handle_polarization))
        .fallback(not_found)
        .layer(CorsLayer::permissive())
}

/// Bind `addr` and serve until the process is stopped.
pub async fn serve(addr: &str) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    axum::serve(listener, router()).await
}
