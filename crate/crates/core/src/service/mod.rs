//! JSON over HTTP: workspaces, queries and interactive proofs.
//!
//! Durable state lives in the [`WorkspaceStore`]; proof sessions are kept in
//! memory only and expire after a configurable idle time. Queries run on
//! blocking worker threads, at most one per available processor, under a
//! wall-clock limit. See `docs/API.md` for the request and response shapes.

mod error;
mod sessions;

use std::io;
use std::path::PathBuf;
use std::sync::Arc;
use std::time::Duration;

use axum::extract::rejection::JsonRejection;
use axum::extract::{DefaultBodyLimit, FromRequest, Path, Request, State};
use axum::http::{header, HeaderValue, Method, StatusCode};
use axum::middleware::{self, Next};
use axum::response::{IntoResponse, Response};
use axum::routing::{delete, get, post};
use axum::{Json, Router};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use tokio::net::TcpListener;
use tokio::sync::Semaphore;
use tower_http::cors::CorsLayer;
use tower_http::services::ServeDir;
use tower_http::trace::{DefaultMakeSpan, DefaultOnResponse, TraceLayer};
use tracing::Level;

use crate::api::{ProofView, QueryRequest, QueryResponse};
use crate::parser::{parse_query, parse_term, ParseError};
use crate::proof::ProofState;
use crate::solver::{solve, Budget, SolveOptions};
use crate::store::{StoreError, WorkspaceStore};
use crate::term::{Program, Term};

pub use error::{ApiError, Position};
pub use sessions::{Session, Sessions};

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    pub data_dir: PathBuf,
    /// Rules every new workspace starts with.
    pub seed: Option<Program>,
    /// Origin allowed to call the API from a browser. `*` allows any.
    pub cors_origin: Option<String>,
    /// Directory of static files served for paths outside `/api`.
    pub static_dir: Option<PathBuf>,
    /// Defaults for query options the request leaves out.
    pub solve: SolveOptions,
    pub max_depth_cap: usize,
    pub max_solutions_cap: usize,
    pub body_limit: usize,
    pub query_timeout: Duration,
    pub request_timeout: Duration,
    pub session_ttl: Duration,
    /// Queries that may run at the same time.
    pub workers: usize,
}

impl ServiceConfig {
    pub fn new(data_dir: impl Into<PathBuf>) -> Self {
        ServiceConfig {
            data_dir: data_dir.into(),
            seed: None,
            cors_origin: None,
            static_dir: None,
            solve: SolveOptions::default(),
            max_depth_cap: 512,
            max_solutions_cap: 50,
            body_limit: 64 * 1024,
            query_timeout: Duration::from_secs(2),
            request_timeout: Duration::from_millis(500),
            session_ttl: Duration::from_secs(24 * 60 * 60),
            workers: std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1),
        }
    }
}

struct Inner {
    config: ServiceConfig,
    store: WorkspaceStore,
    sessions: Sessions,
    workers: Arc<Semaphore>,
}

#[derive(Clone)]
pub struct AppState(Arc<Inner>);

impl AppState {
    /// Opens the store, creating the data directory if it is missing.
    pub fn new(config: ServiceConfig) -> io::Result<Self> {
        let mut store = WorkspaceStore::open(&config.data_dir)?;
        if let Some(seed) = &config.seed {
            store = store.with_seed(seed.clone());
        }
        let sessions = Sessions::new(config.session_ttl);
        let workers = Arc::new(Semaphore::new(config.workers.max(1)));
        Ok(AppState(Arc::new(Inner {
            config,
            store,
            sessions,
            workers,
        })))
    }

    pub fn store(&self) -> &WorkspaceStore {
        &self.0.store
    }

    pub fn sessions(&self) -> &Sessions {
        &self.0.sessions
    }

    fn config(&self) -> &ServiceConfig {
        &self.0.config
    }
}

pub fn router(state: AppState) -> Router {
    let config = state.config().clone();
    let limited = Router::new()
        .route("/api/workspaces", post(create_workspace))
        .route("/api/workspaces/{id}/rules", get(list_rules).post(add_rule))
        .route("/api/workspaces/{id}/rules/{index}", delete(delete_rule))
        .route("/api/proofs", post(create_proof))
        .route("/api/proofs/{pid}", get(get_proof))
        .route("/api/proofs/{pid}/apply", post(apply_rule))
        .route("/api/proofs/{pid}/substitute", post(substitute))
        .route("/api/proofs/{pid}/undo", post(undo))
        .route_layer(middleware::from_fn_with_state(state.clone(), request_timeout));
    let mut app = Router::new()
        .route("/api/workspaces/{id}/query", post(query))
        .merge(limited)
        .route("/api/{*rest}", axum::routing::any(no_route));
    app = match &config.static_dir {
        Some(dir) => app.fallback_service(ServeDir::new(dir)),
        None => app.fallback(no_route),
    };
    let mut app = app.layer(DefaultBodyLimit::max(config.body_limit)).layer(
        TraceLayer::new_for_http()
            .make_span_with(DefaultMakeSpan::new().level(Level::INFO))
            .on_response(DefaultOnResponse::new().level(Level::INFO)),
    );
    if let Some(origin) = &config.cors_origin {
        let cors = CorsLayer::new()
            .allow_methods([Method::GET, Method::POST, Method::DELETE])
            .allow_headers([header::CONTENT_TYPE]);
        let cors = if origin == "*" {
            cors.allow_origin(tower_http::cors::Any)
        } else {
            match HeaderValue::from_str(origin) {
                Ok(v) => cors.allow_origin(v),
                Err(_) => cors,
            }
        };
        app = app.layer(cors);
    }
    app.with_state(state)
}

/// Serves on `listener` until ctrl-c, sweeping idle proof sessions meanwhile.
pub async fn serve(listener: TcpListener, state: AppState) -> io::Result<()> {
    let sweeper = {
        let state = state.clone();
        let every = state
            .config()
            .session_ttl
            .clamp(Duration::from_secs(1), Duration::from_secs(60));
        tokio::spawn(async move {
            let mut tick = tokio::time::interval(every);
            loop {
                tick.tick().await;
                let removed = state.sessions().sweep();
                if removed > 0 {
                    tracing::info!(removed, "expired proof sessions");
                }
            }
        })
    };
    let result = axum::serve(listener, router(state))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await;
    sweeper.abort();
    result
}

async fn request_timeout(State(state): State<AppState>, req: Request, next: Next) -> Response {
    match tokio::time::timeout(state.config().request_timeout, next.run(req)).await {
        Ok(resp) => resp,
        Err(_) => ApiError::timeout().into_response(),
    }
}

async fn no_route() -> ApiError {
    ApiError::no_route()
}

/// JSON body whose rejections are reported as [`ApiError`]s.
pub struct Body<T>(pub T);

impl<S, T> FromRequest<S> for Body<T>
where
    S: Send + Sync,
    T: DeserializeOwned,
{
    type Rejection = ApiError;

    async fn from_request(req: Request, state: &S) -> Result<Self, ApiError> {
        match Json::<T>::from_request(req, state).await {
            Ok(Json(v)) => Ok(Body(v)),
            Err(rejection) => Err(rejection_error(rejection)),
        }
    }
}

fn rejection_error(rejection: JsonRejection) -> ApiError {
    if rejection.status() == StatusCode::PAYLOAD_TOO_LARGE {
        ApiError::payload_too_large(rejection.body_text())
    } else {
        ApiError::bad_request(rejection.body_text())
    }
}

async fn blocking<T, F>(f: F) -> Result<T, ApiError>
where
    T: Send + 'static,
    F: FnOnce() -> Result<T, ApiError> + Send + 'static,
{
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ApiError::internal(e.to_string()))?
}

/// A term given as text, with an optional final period.
fn parse_goal(src: &str) -> Result<Term, ParseError> {
    let src = src.trim_end();
    parse_term(src.strip_suffix('.').unwrap_or(src))
}

#[derive(Debug, Deserialize)]
struct CreateWorkspace {
    id: String,
}

#[derive(Debug, Serialize)]
struct WorkspaceView {
    id: String,
    rules: Vec<RuleView>,
}

#[derive(Debug, Serialize)]
struct RuleView {
    index: usize,
    text: String,
}

#[derive(Debug, Deserialize)]
struct AddRule {
    text: String,
}

async fn create_workspace(
    State(state): State<AppState>,
    Body(req): Body<CreateWorkspace>,
) -> Result<(StatusCode, Json<WorkspaceView>), ApiError> {
    let ws = blocking(move || Ok(state.store().create_workspace(&req.id)?)).await?;
    let rules = ws
        .rules
        .iter()
        .enumerate()
        .map(|(index, r)| RuleView {
            index,
            text: r.to_string(),
        })
        .collect();
    Ok((StatusCode::CREATED, Json(WorkspaceView { id: ws.id, rules })))
}

async fn list_rules(State(state): State<AppState>, Path(id): Path<String>) -> Result<Json<Vec<RuleView>>, ApiError> {
    let rules = blocking(move || Ok(state.store().list_rules(&id)?)).await?;
    Ok(Json(
        rules
            .into_iter()
            .map(|(index, text)| RuleView { index, text })
            .collect(),
    ))
}

async fn add_rule(
    State(state): State<AppState>,
    Path(id): Path<String>,
    Body(req): Body<AddRule>,
) -> Result<(StatusCode, Json<RuleView>), ApiError> {
    let (index, rule) = blocking(move || Ok(state.store().add_rule(&id, &req.text)?)).await?;
    Ok((
        StatusCode::CREATED,
        Json(RuleView {
            index,
            text: rule.to_string(),
        }),
    ))
}

async fn delete_rule(
    State(state): State<AppState>,
    Path((id, index)): Path<(String, String)>,
) -> Result<StatusCode, ApiError> {
    blocking(move || {
        let index: usize = match index.parse() {
            Ok(i) => i,
            Err(_) => {
                let len = state.store().list_rules(&id)?.len();
                return Err(ApiError::new(
                    StatusCode::NOT_FOUND,
                    "bad_index",
                    format!("rule index `{index}` is not a number ({len} rules)"),
                ));
            }
        };
        Ok(state.store().delete_rule(&id, index)?)
    })
    .await?;
    Ok(StatusCode::NO_CONTENT)
}

async fn query(
    State(state): State<AppState>,
    Path(id): Path<String>,
    Body(req): Body<QueryRequest>,
) -> Result<Response, ApiError> {
    let config = state.config();
    let limit = config.query_timeout;
    let mut opts = req.options.unwrap_or_default().apply(config.solve.clone());
    opts.max_depth = opts.max_depth.min(config.max_depth_cap);
    opts.max_solutions = opts.max_solutions.min(config.max_solutions_cap);
    opts.time_limit = Some(limit);
    let goals = parse_query(&req.goals)?;

    let work = {
        let state = state.clone();
        async move {
            let program = {
                let state = state.clone();
                blocking(move || Ok(state.store().program(&id)?)).await?
            };
            let permit = state
                .0
                .workers
                .clone()
                .acquire_owned()
                .await
                .map_err(|e| ApiError::internal(e.to_string()))?;
            blocking(move || {
                let _permit = permit;
                Ok(solve(&program, &goals, opts)?)
            })
            .await
        }
    };
    // The solver checks its own deadline between expansions; this outer limit
    // only matters if it is starved of a worker or stuck in a single step.
    let response = match tokio::time::timeout(limit + Duration::from_millis(250), work).await {
        Ok(outcome) => QueryResponse::from(&outcome?),
        Err(_) => QueryResponse {
            solutions: Vec::new(),
            exhausted: false,
            budget_hit: Some(Budget::Time),
        },
    };
    Ok(([(header::CONTENT_TYPE, "application/json")], response.to_json()).into_response())
}

#[derive(Debug, Deserialize)]
struct CreateProof {
    workspace: String,
    goal: String,
}

#[derive(Debug, Deserialize)]
struct ApplyRule {
    #[serde(default)]
    path: Vec<usize>,
    rule_index: usize,
}

#[derive(Debug, Deserialize)]
struct Substitute {
    var: String,
    term: String,
}

fn proof_view(id: &str, session: &Session, state: &ProofState) -> ProofView {
    let mut view = ProofView::new(state);
    view.proof_id = Some(id.to_string());
    view.workspace = Some(session.workspace.clone());
    view
}

fn session(state: &AppState, pid: &str) -> Result<Arc<Session>, ApiError> {
    state.sessions().get(pid).ok_or_else(|| ApiError::proof_not_found(pid))
}

/// Maps an engine error, attaching the (unchanged) tree.
fn rejected(e: crate::proof::ProofError, proof: &ProofState) -> ApiError {
    ApiError::from(e).with_tree(ProofView::new(proof).tree)
}

async fn create_proof(
    State(state): State<AppState>,
    Body(req): Body<CreateProof>,
) -> Result<(StatusCode, Json<ProofView>), ApiError> {
    let goal = parse_goal(&req.goal)?;
    let workspace = req.workspace.clone();
    {
        let state = state.clone();
        blocking(move || Ok(state.store().load(&workspace).map(|_| ())?)).await?;
    }
    let proof = ProofState::new(goal);
    let (id, session) = state.sessions().insert(req.workspace, proof);
    let guard = session.state.lock().await;
    Ok((StatusCode::CREATED, Json(proof_view(&id, &session, &guard))))
}

async fn get_proof(State(state): State<AppState>, Path(pid): Path<String>) -> Result<Json<ProofView>, ApiError> {
    let session = session(&state, &pid)?;
    let proof = session.state.lock().await;
    Ok(Json(proof_view(&pid, &session, &proof)))
}

async fn apply_rule(
    State(state): State<AppState>,
    Path(pid): Path<String>,
    Body(req): Body<ApplyRule>,
) -> Result<Json<ProofView>, ApiError> {
    let session = session(&state, &pid)?;
    let mut proof = session.state.lock().await;
    let workspace = session.workspace.clone();
    let rules = {
        let state = state.clone();
        blocking(move || Ok(state.store().load(&workspace)?.rules)).await?
    };
    let rule = rules.get(req.rule_index).ok_or(StoreError::BadIndex {
        index: req.rule_index,
        len: rules.len(),
    })?;
    proof.apply_rule(&req.path, rule).map_err(|e| rejected(e, &proof))?;
    Ok(Json(proof_view(&pid, &session, &proof)))
}

async fn substitute(
    State(state): State<AppState>,
    Path(pid): Path<String>,
    Body(req): Body<Substitute>,
) -> Result<Json<ProofView>, ApiError> {
    let session = session(&state, &pid)?;
    let term = parse_goal(&req.term)?;
    let mut proof = session.state.lock().await;
    proof
        .apply_manual_subst(req.var.trim(), &term)
        .map_err(|e| rejected(e, &proof))?;
    Ok(Json(proof_view(&pid, &session, &proof)))
}

async fn undo(State(state): State<AppState>, Path(pid): Path<String>) -> Result<Json<ProofView>, ApiError> {
    let session = session(&state, &pid)?;
    let mut proof = session.state.lock().await;
    proof.undo().map_err(|e| rejected(e, &proof))?;
    Ok(Json(proof_view(&pid, &session, &proof)))
}
