//! HTTP service for interactive sessions. Each session owns a world state
//! and at most one active task; the model, maps and solved policies are
//! shared read-only.

use std::collections::{BTreeMap, HashMap};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex, RwLock};

use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::models::Model;
use crate::planner::{value_iteration, Execution, Policy, Step, Termination, DEFAULT_TOLERANCE};
use crate::semantics::{Category, GroundedTask, GroundingModule, UnitArgPair};
use crate::world::{render_map, GridMap, Pos, WorldState};

pub struct ServiceConfig {
    /// Maps by id; the first is the default.
    pub maps: Vec<(String, GridMap)>,
    /// Models by id; the first is the default.
    pub models: Vec<(String, Model)>,
    pub slip: f64,
    pub max_steps: usize,
    pub seed: u64,
}

struct ActiveTask {
    pair: UnitArgPair,
    task: GroundedTask,
    execution: Execution,
}

struct Session {
    map_id: String,
    model_id: String,
    state: WorldState,
    active: Option<ActiveTask>,
    rng: ChaCha8Rng,
}

pub struct AppState {
    maps: BTreeMap<String, Arc<GridMap>>,
    default_map: String,
    models: BTreeMap<String, Arc<Model>>,
    default_model: String,
    slip: f64,
    max_steps: usize,
    seed: u64,
    next_id: AtomicU64,
    sessions: RwLock<HashMap<u64, Arc<tokio::sync::Mutex<Session>>>>,
    policies: Mutex<HashMap<String, Arc<Policy>>>,
}

impl AppState {
    pub fn new(config: ServiceConfig) -> Result<Self, String> {
        let default_map = config
            .maps
            .first()
            .ok_or("at least one map is required")?
            .0
            .clone();
        let default_model = config
            .models
            .first()
            .ok_or("at least one model is required")?
            .0
            .clone();
        Ok(Self {
            maps: config.maps.into_iter().map(|(k, m)| (k, Arc::new(m))).collect(),
            default_map,
            models: config.models.into_iter().map(|(k, m)| (k, Arc::new(m))).collect(),
            default_model,
            slip: config.slip,
            max_steps: config.max_steps,
            seed: config.seed,
            next_id: AtomicU64::new(1),
            sessions: RwLock::new(HashMap::new()),
            policies: Mutex::new(HashMap::new()),
        })
    }

    fn session(&self, id: u64) -> Result<Arc<tokio::sync::Mutex<Session>>, ApiError> {
        self.sessions
            .read()
            .expect("session table lock poisoned")
            .get(&id)
            .cloned()
            .ok_or_else(|| ApiError::new(StatusCode::NOT_FOUND, format!("no session {id}")))
    }

    fn map(&self, id: &str) -> Arc<GridMap> {
        self.maps[id].clone()
    }

    /// Solve (or fetch) the policy for a goal task; the solve runs off the async workers.
    async fn policy(&self, map_id: &str, task: &GroundedTask) -> Result<Arc<Policy>, ApiError> {
        let GroundedTask::Goal { reward } = *task else {
            unreachable!("only goal tasks are planned")
        };
        let key = format!(
            "{map_id}|{}|{}|{}|{}",
            reward.proposition, reward.goal_reward, reward.step_reward, reward.discount
        );
        if let Some(p) = self
            .policies
            .lock()
            .expect("policy cache lock poisoned")
            .get(&key)
        {
            return Ok(p.clone());
        }
        let map = self.map(map_id);
        let slip = self.slip;
        let policy =
            tokio::task::spawn_blocking(move || value_iteration(&map, &reward, slip, DEFAULT_TOLERANCE))
                .await
                .map_err(|e| ApiError::internal(format!("planner task failed: {e}")))?
                .map_err(|e| ApiError::internal(format!("planner: {e}")))?;
        let policy = Arc::new(policy);
        self.policies
            .lock()
            .expect("policy cache lock poisoned")
            .insert(key, policy.clone());
        Ok(policy)
    }
}

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    message: String,
}

impl ApiError {
    fn new(status: StatusCode, message: impl Into<String>) -> Self {
        Self {
            status,
            message: message.into(),
        }
    }

    fn bad_request(message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, message)
    }

    fn internal(message: impl Into<String>) -> Self {
        Self::new(StatusCode::INTERNAL_SERVER_ERROR, message)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(json!({ "error": self.message }))).into_response()
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CreateSession {
    pub map: Option<String>,
    pub model: Option<String>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    #[default]
    Batch,
    Step,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CommandRequest {
    pub text: String,
    #[serde(default)]
    pub mode: Mode,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResumeRequest {
    #[serde(default)]
    pub mode: Mode,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PerturbRequest {
    pub agent: Option<Pos>,
    pub block: Option<Pos>,
}

#[derive(Debug, Serialize)]
struct RoomView {
    id: String,
    color: String,
}

#[derive(Debug, Serialize)]
struct MapView {
    id: String,
    width: usize,
    height: usize,
    rows: Vec<String>,
    rooms: Vec<RoomView>,
}

#[derive(Debug, Serialize)]
struct StateView {
    session_id: u64,
    model: String,
    agent: Pos,
    block: Pos,
    active_task: bool,
    map: MapView,
}

#[derive(Debug, Serialize)]
struct TaskResponse {
    pair: UnitArgPair,
    category: Category,
    task: GroundedTask,
    trajectory: Vec<Step>,
    termination: Option<Termination>,
    agent: Pos,
    block: Pos,
}

fn map_view(id: &str, map: &GridMap) -> MapView {
    let text = render_map(map);
    MapView {
        id: id.to_string(),
        width: map.width(),
        height: map.height(),
        rows: text.lines().take(map.height()).map(str::to_string).collect(),
        rooms: map
            .rooms()
            .iter()
            .map(|r| RoomView {
                id: r.id.to_string(),
                color: r.color.name().to_string(),
            })
            .collect(),
    }
}

fn state_view(app: &AppState, id: u64, s: &Session) -> StateView {
    StateView {
        session_id: id,
        model: s.model_id.clone(),
        agent: s.state.agent,
        block: s.state.block,
        active_task: s
            .active
            .as_ref()
            .is_some_and(|a| a.execution.termination().is_none()),
        map: map_view(&s.map_id, &app.map(&s.map_id)),
    }
}

/// Advance the active task (one step or to completion) and describe it.
fn advance(session: &mut Session, mode: Mode) -> Result<TaskResponse, ApiError> {
    let Session {
        active, rng, state, ..
    } = session;
    let active = active
        .as_mut()
        .ok_or_else(|| ApiError::new(StatusCode::CONFLICT, "no active task"))?;
    match mode {
        Mode::Batch => {
            active.execution.run(rng);
        }
        Mode::Step => {
            active.execution.step(rng);
        }
    }
    *state = active.execution.state();
    Ok(TaskResponse {
        pair: active.pair,
        category: active.pair.category(),
        task: active.task,
        trajectory: active.execution.steps().to_vec(),
        termination: active.execution.termination(),
        agent: state.agent,
        block: state.block,
    })
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/sessions", post(create_session))
        .route("/sessions/{id}/state", get(get_state))
        .route("/sessions/{id}/command", post(command))
        .route("/sessions/{id}/perturb", post(perturb))
        .route("/sessions/{id}/resume", post(resume))
        .route("/sessions/{id}/reset", post(reset))
        .route("/models", get(list_models))
        .with_state(state)
}

async fn create_session(
    State(app): State<Arc<AppState>>,
    body: Option<Json<CreateSession>>,
) -> Result<impl IntoResponse, ApiError> {
    let req = body.map(|Json(b)| b).unwrap_or_default();
    let map_id = req.map.unwrap_or_else(|| app.default_map.clone());
    let model_id = req.model.unwrap_or_else(|| app.default_model.clone());
    let map = app
        .maps
        .get(&map_id)
        .ok_or_else(|| ApiError::new(StatusCode::NOT_FOUND, format!("no map {map_id:?}")))?;
    if !app.models.contains_key(&model_id) {
        return Err(ApiError::new(
            StatusCode::NOT_FOUND,
            format!("no model {model_id:?}"),
        ));
    }
    let id = app.next_id.fetch_add(1, Ordering::Relaxed);
    let session = Session {
        state: map.start(),
        map_id,
        model_id,
        active: None,
        rng: ChaCha8Rng::seed_from_u64(app.seed ^ id),
    };
    app.sessions
        .write()
        .expect("session table lock poisoned")
        .insert(id, Arc::new(tokio::sync::Mutex::new(session)));
    Ok((StatusCode::CREATED, Json(json!({ "session_id": id }))))
}

async fn get_state(
    State(app): State<Arc<AppState>>,
    Path(id): Path<u64>,
) -> Result<impl IntoResponse, ApiError> {
    let session = app.session(id)?;
    let s = session.lock().await;
    Ok(Json(state_view(&app, id, &s)))
}

async fn command(
    State(app): State<Arc<AppState>>,
    Path(id): Path<u64>,
    Json(req): Json<CommandRequest>,
) -> Result<impl IntoResponse, ApiError> {
    let session = app.session(id)?;
    let mut s = session.lock().await;
    let model = app.models[&s.model_id].clone();
    let map = app.map(&s.map_id);
    let pair = model
        .predict_text(&req.text)
        .map_err(|e| ApiError::bad_request(e.to_string()))?;
    let grounding = GroundingModule::for_map(&map).map_err(|e| ApiError::internal(e.to_string()))?;
    let task = grounding
        .ground(&pair)
        .map_err(|e| ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, format!("{pair}: {e}")))?;
    let execution = match task {
        GroundedTask::ActionSequence { action, count } => {
            Execution::with_actions(&map, s.state, vec![action; usize::from(count)], app.slip)
        }
        GroundedTask::Goal { .. } => {
            let policy = app.policy(&s.map_id, &task).await?;
            Execution::with_policy(policy, s.state, app.max_steps)
        }
    }
    .map_err(|e| ApiError::internal(e.to_string()))?;
    s.active = Some(ActiveTask {
        pair,
        task,
        execution,
    });
    Ok(Json(advance(&mut s, req.mode)?))
}

async fn resume(
    State(app): State<Arc<AppState>>,
    Path(id): Path<u64>,
    body: Option<Json<ResumeRequest>>,
) -> Result<impl IntoResponse, ApiError> {
    let mode = body.map(|Json(b)| b.mode).unwrap_or_default();
    let session = app.session(id)?;
    let mut s = session.lock().await;
    Ok(Json(advance(&mut s, mode)?))
}

async fn perturb(
    State(app): State<Arc<AppState>>,
    Path(id): Path<u64>,
    Json(req): Json<PerturbRequest>,
) -> Result<impl IntoResponse, ApiError> {
    let session = app.session(id)?;
    let mut s = session.lock().await;
    let next = WorldState {
        agent: req.agent.unwrap_or(s.state.agent),
        block: req.block.unwrap_or(s.state.block),
    };
    app.map(&s.map_id)
        .check_state(&next)
        .map_err(|e| ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, e.to_string()))?;
    if let Some(active) = s.active.as_mut() {
        active
            .execution
            .perturb(next)
            .map_err(|e| ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, e.to_string()))?;
    }
    s.state = next;
    Ok(Json(state_view(&app, id, &s)))
}

async fn reset(State(app): State<Arc<AppState>>, Path(id): Path<u64>) -> Result<impl IntoResponse, ApiError> {
    let session = app.session(id)?;
    let mut s = session.lock().await;
    s.state = app.map(&s.map_id).start();
    s.active = None;
    Ok(Json(state_view(&app, id, &s)))
}

async fn list_models(State(app): State<Arc<AppState>>) -> impl IntoResponse {
    let models: Vec<_> = app
        .models
        .iter()
        .map(|(id, m)| {
            json!({
                "id": id,
                "architecture": m.architecture(),
                "default": *id == app.default_model,
            })
        })
        .collect();
    Json(json!({ "models": models }))
}

/// Bind and serve until the process is stopped.
pub async fn serve(config: ServiceConfig, addr: std::net::SocketAddr) -> std::io::Result<()> {
    let state =
        AppState::new(config).map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidInput, e))?;
    let listener = tokio::net::TcpListener::bind(addr).await?;
    log::info!("listening on {}", listener.local_addr()?);
    axum::serve(listener, router(Arc::new(state))).await
}
