//! REST service over in-process engine sessions.

use std::collections::HashMap;
use std::net::SocketAddr;
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use axum::extract::{Path, Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::engine::{
    build_codelet, Action, ConfigError, Ctx, Engine, Limits, Params, Recommendation,
};
use crate::formula::{Formula, Signature};
use crate::proofspace::{NodeId, ProofSpace, SpaceJson, ROOT};
use crate::pruning::{self, PruneError};

pub const DEFAULT_PORT: u16 = 7878;

/// `MATR_PORT` if set and valid, else 7878.
pub fn port_from_env() -> u16 {
    std::env::var("MATR_PORT")
        .ok()
        .and_then(|p| p.parse().ok())
        .unwrap_or(DEFAULT_PORT)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorBody {
    pub error: String,
    pub detail: String,
}

#[derive(Debug)]
pub struct ApiError {
    pub status: StatusCode,
    pub body: ErrorBody,
}

impl ApiError {
    pub fn new(status: StatusCode, error: &str, detail: impl Into<String>) -> Self {
        ApiError {
            status,
            body: ErrorBody {
                error: error.to_string(),
                detail: detail.into(),
            },
        }
    }

    fn bad_body(e: impl std::fmt::Display) -> Self {
        ApiError::new(
            StatusCode::UNPROCESSABLE_ENTITY,
            "SchemaError",
            e.to_string(),
        )
    }

    fn unknown_session(id: &str) -> Self {
        ApiError::new(
            StatusCode::NOT_FOUND,
            "UnknownSession",
            format!("no session {id}"),
        )
    }
}

impl From<ConfigError> for ApiError {
    fn from(e: ConfigError) -> Self {
        let kind = match e {
            ConfigError::Schema(_) => "SchemaError",
            ConfigError::IllSortedFormula { .. } => "IllSortedFormula",
            ConfigError::UnknownCodelet(_) => "UnknownCodelet",
        };
        ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, kind, e.to_string())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(self.body)).into_response()
    }
}

type ApiResult<T> = Result<Json<T>, ApiError>;

#[derive(Default)]
struct Sessions {
    next: u64,
    engines: HashMap<String, Arc<Mutex<Engine>>>,
}

#[derive(Clone, Default)]
pub struct AppState {
    sessions: Arc<Mutex<Sessions>>,
}

impl AppState {
    fn session(&self, id: &str) -> Result<Arc<Mutex<Engine>>, ApiError> {
        self.sessions
            .lock()
            .unwrap()
            .engines
            .get(id)
            .cloned()
            .ok_or_else(|| ApiError::unknown_session(id))
    }

    /// Registers an engine under a fresh id.
    pub fn insert(&self, engine: Engine) -> String {
        let mut s = self.sessions.lock().unwrap();
        s.next += 1;
        let id = format!("s{}", s.next);
        s.engines.insert(id.clone(), Arc::new(Mutex::new(engine)));
        id
    }
}

pub fn router() -> Router {
    router_with(AppState::default())
}

pub fn router_with(state: AppState) -> Router {
    Router::new()
        .route("/session", post(create_session))
        .route("/session/{id}/state", get(get_state))
        .route("/session/{id}/step", post(step))
        .route("/session/{id}/run", post(run))
        .route("/session/{id}/action", post(action))
        .route("/session/{id}/pruned", get(pruned))
        .route("/codelet/execute", post(execute_codelet))
        .with_state(state)
}

pub async fn serve(addr: SocketAddr, state: AppState) -> std::io::Result<()> {
    serve_on(tokio::net::TcpListener::bind(addr).await?, state).await
}

pub async fn serve_on(listener: tokio::net::TcpListener, state: AppState) -> std::io::Result<()> {
    axum::serve(listener, router_with(state)).await
}

/// Runs `f` on the blocking pool with the session's engine locked.
async fn with_engine<T, F>(engine: Arc<Mutex<Engine>>, f: F) -> Result<T, ApiError>
where
    T: Send + 'static,
    F: FnOnce(&mut Engine) -> Result<T, ApiError> + Send + 'static,
{
    tokio::task::spawn_blocking(move || f(&mut engine.lock().unwrap()))
        .await
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "Internal", e.to_string()))?
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SessionCreated {
    #[serde(rename = "session-id")]
    pub session_id: String,
}

async fn create_session(State(state): State<AppState>, body: String) -> ApiResult<SessionCreated> {
    let engine = tokio::task::spawn_blocking(move || -> Result<Engine, ApiError> {
        let mut engine = Engine::from_yaml(&body)?;
        engine
            .setup()
            .map_err(|e| ApiError::new(StatusCode::CONFLICT, "SetupConflict", e.to_string()))?;
        Ok(engine)
    })
    .await
    .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "Internal", e.to_string()))??;
    Ok(Json(SessionCreated {
        session_id: state.insert(engine),
    }))
}

async fn get_state(State(state): State<AppState>, Path(id): Path<String>) -> ApiResult<SpaceJson> {
    let engine = state.session(&id)?;
    let json = engine.lock().unwrap().space().to_json();
    Ok(Json(json))
}

async fn step(State(state): State<AppState>, Path(id): Path<String>) -> Result<Response, ApiError> {
    let engine = state.session(&id)?;
    let report = with_engine(engine, |e| {
        if e.is_complete() {
            return Err(ApiError::new(
                StatusCode::CONFLICT,
                "Complete",
                "all goals are already checked",
            ));
        }
        e.step();
        Ok(e.last_step_report())
    })
    .await?;
    Ok(Json(report).into_response())
}

async fn run(State(state): State<AppState>, Path(id): Path<String>) -> Result<Response, ApiError> {
    let engine = state.session(&id)?;
    let report = with_engine(engine, |e| Ok(e.run())).await?;
    Ok(Json(report).into_response())
}

async fn action(
    State(state): State<AppState>,
    Path(id): Path<String>,
    body: String,
) -> Result<Response, ApiError> {
    let engine = state.session(&id)?;
    let actions: Vec<Action> = serde_json::from_str(&body).map_err(ApiError::bad_body)?;
    let report = with_engine(engine, move |e| Ok(e.apply(actions, "manual"))).await?;
    Ok(Json(report).into_response())
}

#[derive(Debug, Deserialize)]
struct GoalQuery {
    goal: Option<String>,
}

/// Root node first, then the lowest-id node anywhere with that formula.
fn locate(space: &ProofSpace, f: &Formula) -> Option<NodeId> {
    space
        .find_node(ROOT, f)
        .or_else(|| space.nodes_with(f).iter().min().copied())
}

async fn pruned(
    State(state): State<AppState>,
    Path(id): Path<String>,
    Query(q): Query<GoalQuery>,
) -> Result<Response, ApiError> {
    let engine = state.session(&id)?;
    let goal: Formula = q
        .goal
        .ok_or_else(|| {
            ApiError::new(
                StatusCode::BAD_REQUEST,
                "MissingGoal",
                "query parameter `goal` is required",
            )
        })?
        .parse()
        .map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, "SyntaxError", format!("{e}")))?;
    let report = with_engine(engine, move |e| {
        let space = e.space();
        let node = locate(space, &goal).ok_or_else(|| {
            ApiError::new(
                StatusCode::NOT_FOUND,
                "UnknownGoal",
                format!("no node {goal}"),
            )
        })?;
        pruning::prune(space, node).map_err(|err| match err {
            PruneError::UnprovenGoal(_) => {
                ApiError::new(StatusCode::NOT_FOUND, "UnprovenGoal", err.to_string())
            }
            PruneError::UnknownNode(_) => {
                ApiError::new(StatusCode::NOT_FOUND, "UnknownGoal", err.to_string())
            }
        })
    })
    .await?;
    Ok(Json(report).into_response())
}

/// Body of `POST /codelet/execute`. Without a scope the codelet's own
/// trigger decides.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExecuteRequest {
    pub codelet: String,
    pub snapshot: SpaceJson,
    #[serde(default)]
    pub scope: Option<Vec<NodeId>>,
    #[serde(default)]
    pub params: Params,
    #[serde(default)]
    pub signature: Option<Signature>,
}

/// Runs a built-in codelet against a snapshot, as a codelet server would.
pub fn execute(req: ExecuteRequest) -> Result<Vec<Recommendation>, ApiError> {
    let codelet = build_codelet(&req.codelet, &req.params)?;
    let signature = req.signature.unwrap_or_else(Signature::peano);
    let space = ProofSpace::from_json(&req.snapshot, signature).map_err(ApiError::bad_body)?;
    let scope = req
        .scope
        .unwrap_or_else(|| codelet.trigger(&space, &req.params));
    let limits = Limits::default();
    let ctx = Ctx {
        space: &space,
        scope: &scope,
        params: &req.params,
        limits,
        deadline: Instant::now() + Duration::from_millis(limits.codelet_timeout_ms),
    };
    let mut recs = codelet.execute(&ctx).recommendations;
    recs.truncate(req.params.max_recs());
    Ok(recs)
}

async fn execute_codelet(body: String) -> Result<Response, ApiError> {
    let req: ExecuteRequest = serde_json::from_str(&body).map_err(ApiError::bad_body)?;
    let recs = tokio::task::spawn_blocking(move || execute(req))
        .await
        .map_err(|e| {
            ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "Internal", e.to_string())
        })??;
    Ok(Json(json!(recs)).into_response())
}
