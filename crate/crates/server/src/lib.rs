//! HTTP/JSON front end for the family game: a human plays spoiler against
//! the built-in duplicator strategy.
//!
//! Routes:
//! - `POST /games` with a [`GameConfig`] creates a session.
//! - `GET /games/{id}` returns the configuration, position and history.
//! - `POST /games/{id}/moves` with a [`SpoilerMove`] plays a move and the reply.
//! - `DELETE /games/{id}` ends a session.
//! - `GET /chains?k=&maxlen=` lists the largest class of chain lengths up to
//!   `maxlen` that are pairwise equivalent at rank `k`.

pub mod wire;

use std::net::SocketAddr;
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use axum::extract::rejection::{JsonRejection, QueryRejection};
use axum::extract::{Path, Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use dashmap::DashMap;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use tower_http::cors::CorsLayer;
use treehom_core::game::{
    final_verdict, find_equivalent_chain_lengths, play_spoiler_move, ChainBank, FamilyGame, GameError, GamePosition,
    LocalPairing,
};
use uuid::Uuid;

pub use wire::{DuplicatorMove, GameConfig, SpoilerMove, WireSide, WIRE_VERSION};

pub const MAX_K: usize = 3;
pub const MAX_SIZES: usize = 8;
pub const MAX_SIZE: usize = 8;
pub const MAX_MULTIPLICITY: usize = 4;
/// `GET /chains` limits; rank 3 beyond length 6 takes minutes.
pub const MAX_CHAIN_LEN: usize = 8;
pub const MAX_CHAIN_LEN_RANK3: usize = 6;

#[derive(Debug, Clone)]
pub struct ServerConfig {
    /// Sessions untouched for this long are dropped.
    pub idle_expiry: Duration,
}

impl Default for ServerConfig {
    fn default() -> Self {
        ServerConfig {
            idle_expiry: Duration::from_secs(30 * 60),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
struct HistoryEntry {
    spoiler: SpoilerMove,
    #[serde(skip_serializing_if = "Option::is_none")]
    reply: Option<DuplicatorMove>,
}

struct Session {
    config: GameConfig,
    game: Arc<FamilyGame>,
    position: GamePosition,
    pairing: LocalPairing,
    history: Vec<HistoryEntry>,
}

struct SessionCell {
    /// `try_lock` failures are reported as concurrent moves.
    state: Mutex<Session>,
    touched: Mutex<Instant>,
}

impl SessionCell {
    fn touch(&self) {
        *self.touched.lock().unwrap() = Instant::now();
    }
}

#[derive(Clone)]
pub struct AppState {
    sessions: Arc<DashMap<Uuid, Arc<SessionCell>>>,
    bank: Arc<ChainBank>,
    chains: Arc<DashMap<(usize, usize), Vec<usize>>>,
    config: ServerConfig,
}

impl AppState {
    pub fn new(config: ServerConfig) -> Self {
        AppState {
            sessions: Arc::new(DashMap::new()),
            bank: ChainBank::new(),
            chains: Arc::new(DashMap::new()),
            config,
        }
    }

    pub fn session_count(&self) -> usize {
        self.sessions.len()
    }

    /// Drops sessions idle for longer than the configured expiry.
    pub fn expire_idle(&self) -> usize {
        let ttl = self.config.idle_expiry;
        let before = self.sessions.len();
        self.sessions.retain(|_, cell| cell.touched.lock().unwrap().elapsed() < ttl);
        before - self.sessions.len()
    }
}

impl Default for AppState {
    fn default() -> Self {
        AppState::new(ServerConfig::default())
    }
}

pub struct ApiError {
    status: StatusCode,
    body: Value,
}

impl ApiError {
    fn new(status: StatusCode, error: impl Into<String>) -> Self {
        ApiError {
            status,
            body: json!({ "error": error.into() }),
        }
    }

    fn with(mut self, key: &str, value: Value) -> Self {
        self.body[key] = value;
        self
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        envelope(self.status, self.body)
    }
}

fn envelope(status: StatusCode, mut body: Value) -> Response {
    body["v"] = json!(WIRE_VERSION);
    (status, Json(body)).into_response()
}

fn game_error(e: GameError, p: &GamePosition) -> ApiError {
    match e {
        GameError::IllegalMove(msg) => {
            ApiError::new(StatusCode::CONFLICT, msg).with("legalMoves", json!(wire::legal_move_hints(p)))
        }
        GameError::GameOver => ApiError::new(StatusCode::CONFLICT, "the game is over"),
        GameError::InsufficientFreshComponents { needed } => ApiError::new(
            StatusCode::UNPROCESSABLE_ENTITY,
            format!("the family has too few unused components for this move; raise multiplicity (needed {needed})"),
        )
        .with("needed", json!(needed)),
        GameError::EnumerationTooLarge(n) => ApiError::new(
            StatusCode::UNPROCESSABLE_ENTITY,
            format!("structure of {n} nodes is too large to enumerate"),
        ),
        GameError::NotLocallyWinning(detail) => ApiError::new(
            StatusCode::INTERNAL_SERVER_ERROR,
            "duplicator strategy left a position that is not locally winning",
        )
        .with("diagnostic", json!(detail)),
        e => ApiError::new(StatusCode::BAD_REQUEST, e.to_string()),
    }
}

fn bad_json(r: JsonRejection) -> ApiError {
    ApiError::new(StatusCode::BAD_REQUEST, r.body_text())
}

fn parse_id(id: &str) -> Result<Uuid, ApiError> {
    Uuid::parse_str(id).map_err(|_| not_found())
}

fn not_found() -> ApiError {
    ApiError::new(StatusCode::NOT_FOUND, "no such game")
}

fn lookup(state: &AppState, id: &str) -> Result<Arc<SessionCell>, ApiError> {
    let id = parse_id(id)?;
    let cell = state.sessions.get(&id).map(|c| c.clone()).ok_or_else(not_found)?;
    cell.touch();
    Ok(cell)
}

fn validate(cfg: &GameConfig) -> Result<usize, ApiError> {
    let bad = |msg: String| Err(ApiError::new(StatusCode::BAD_REQUEST, msg));
    if !(1..=MAX_K).contains(&cfg.k) {
        return bad(format!("k must be in 1..={MAX_K}"));
    }
    let rounds = cfg.rounds.unwrap_or(cfg.k);
    if rounds > cfg.k {
        return bad("rounds must not exceed k".into());
    }
    if !(1..=MAX_MULTIPLICITY).contains(&cfg.multiplicity) {
        return bad(format!("multiplicity must be in 1..={MAX_MULTIPLICITY}"));
    }
    if !(2..=MAX_SIZES).contains(&cfg.sizes.len()) {
        return bad(format!("sizes must list 2..={MAX_SIZES} lengths"));
    }
    if cfg.sizes.windows(2).any(|w| w[0] >= w[1]) || cfg.sizes[0] == 0 {
        return bad("sizes must be positive and strictly increasing".into());
    }
    if *cfg.sizes.last().unwrap() > MAX_SIZE {
        return bad(format!("sizes must not exceed {MAX_SIZE}"));
    }
    Ok(rounds)
}

fn verdict_json(p: &GamePosition) -> Value {
    if p.is_over() {
        match final_verdict(p) {
            Ok(v) => json!(wire::WireVerdict::from(v)),
            Err(_) => Value::Null,
        }
    } else {
        Value::Null
    }
}

fn session_json(id: Uuid, s: &Session) -> Value {
    json!({
        "sessionId": id.to_string(),
        "config": s.config,
        "position": wire::render(&s.game, &s.position, &s.pairing),
        "stuck": s.position.is_stuck(),
        "verdict": verdict_json(&s.position),
        "history": s.history,
    })
}

async fn create_game(
    State(state): State<AppState>,
    body: Result<Json<GameConfig>, JsonRejection>,
) -> Result<Response, ApiError> {
    let Json(cfg) = body.map_err(bad_json)?;
    let rounds = validate(&cfg)?;
    let bank = state.bank.clone();
    let c = cfg.clone();
    let built = tokio::task::spawn_blocking(move || {
        let game = FamilyGame::with_bank(c.k, &c.sizes, c.multiplicity, bank)?;
        let ok = game.sizes_equivalent()?;
        Ok::<_, GameError>((game, ok))
    })
    .await
    .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))?;
    let (game, equivalent) = built.map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, e.to_string()))?;
    if !equivalent {
        return Err(ApiError::new(
            StatusCode::UNPROCESSABLE_ENTITY,
            format!(
                "chain lengths {:?} are not all rank-{} equivalent to {}; see GET /chains",
                cfg.sizes, cfg.k, cfg.sizes[0]
            ),
        ));
    }
    let id = Uuid::new_v4();
    let session = Session {
        config: cfg,
        position: game.position_with_rounds(rounds),
        game: Arc::new(game),
        pairing: LocalPairing::new(),
        history: Vec::new(),
    };
    let body = session_json(id, &session);
    state.sessions.insert(
        id,
        Arc::new(SessionCell {
            state: Mutex::new(session),
            touched: Mutex::new(Instant::now()),
        }),
    );
    Ok(envelope(StatusCode::OK, body))
}

async fn get_game(State(state): State<AppState>, Path(id): Path<String>) -> Result<Response, ApiError> {
    let cell = lookup(&state, &id)?;
    let uuid = parse_id(&id)?;
    let s = cell
        .state
        .try_lock()
        .map_err(|_| ApiError::new(StatusCode::CONFLICT, "a move is in progress"))?;
    Ok(envelope(StatusCode::OK, session_json(uuid, &s)))
}

async fn delete_game(State(state): State<AppState>, Path(id): Path<String>) -> Result<StatusCode, ApiError> {
    let id = parse_id(&id)?;
    state.sessions.remove(&id).map(|_| StatusCode::NO_CONTENT).ok_or_else(not_found)
}

async fn play_move(
    State(state): State<AppState>,
    Path(id): Path<String>,
    body: Result<Json<SpoilerMove>, JsonRejection>,
) -> Result<Response, ApiError> {
    let cell = lookup(&state, &id)?;
    let Json(mv) = body.map_err(bad_json)?;
    tokio::task::spawn_blocking(move || {
        let mut s = cell
            .state
            .try_lock()
            .map_err(|_| ApiError::new(StatusCode::CONFLICT, "another move is in progress"))?;
        if s.position.outcome().is_some() {
            return Err(ApiError::new(StatusCode::CONFLICT, "the game is over"));
        }
        let core = wire::to_core_move(&s.game, &s.position, &mv).map_err(|msg| {
            ApiError::new(StatusCode::CONFLICT, msg).with("legalMoves", json!(wire::legal_move_hints(&s.position)))
        })?;
        let (q, pairing, reply) =
            play_spoiler_move(&s.game, &s.position, &s.pairing, &core).map_err(|e| game_error(e, &s.position))?;
        // the reply was played in the position right after spoiler's move
        let reply = match reply {
            Some(r) => {
                let mid = treehom_core::game::apply_move(&s.position, &core).map_err(|e| game_error(e, &s.position))?;
                wire::from_core_reply(&s.game, &mid, &r)
            }
            None => None,
        };
        s.position = q;
        s.pairing = pairing;
        s.history.push(HistoryEntry {
            spoiler: mv,
            reply: reply.clone(),
        });
        Ok(envelope(
            StatusCode::OK,
            json!({
                "reply": reply,
                "position": wire::render(&s.game, &s.position, &s.pairing),
                "stuck": s.position.is_stuck(),
                "verdict": verdict_json(&s.position),
            }),
        ))
    })
    .await
    .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))?
}

#[derive(Debug, Deserialize)]
struct ChainsQuery {
    k: usize,
    maxlen: usize,
}

async fn chains(
    State(state): State<AppState>,
    query: Result<Query<ChainsQuery>, QueryRejection>,
) -> Result<Response, ApiError> {
    let Query(q) = query.map_err(|r| ApiError::new(StatusCode::BAD_REQUEST, r.body_text()))?;
    let limit = if q.k >= 3 { MAX_CHAIN_LEN_RANK3 } else { MAX_CHAIN_LEN };
    if q.k > MAX_K || !(1..=limit).contains(&q.maxlen) {
        return Err(ApiError::new(
            StatusCode::BAD_REQUEST,
            format!("need k <= {MAX_K} and 1 <= maxlen <= {limit}"),
        ));
    }
    let lengths = match state.chains.get(&(q.k, q.maxlen)) {
        Some(v) => v.clone(),
        None => {
            let (k, maxlen) = (q.k, q.maxlen);
            let v = tokio::task::spawn_blocking(move || find_equivalent_chain_lengths(k, maxlen))
                .await
                .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))?
                .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))?;
            state.chains.insert((k, maxlen), v.clone());
            v
        }
    };
    Ok(envelope(
        StatusCode::OK,
        json!({ "k": q.k, "maxlen": q.maxlen, "lengths": lengths }),
    ))
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/games", post(create_game))
        .route("/games/{id}", get(get_game).delete(delete_game))
        .route("/games/{id}/moves", post(play_move))
        .route("/chains", get(chains))
        .layer(CorsLayer::permissive())
        .with_state(state)
}

/// Serves until the process is stopped, expiring idle sessions once a minute.
pub async fn serve(addr: SocketAddr, config: ServerConfig) -> std::io::Result<()> {
    let state = AppState::new(config);
    let sweeper = state.clone();
    tokio::spawn(async move {
        let mut tick = tokio::time::interval(Duration::from_secs(60));
        loop {
            tick.tick().await;
            sweeper.expire_idle();
        }
    });
    let listener = tokio::net::TcpListener::bind(addr).await?;
    axum::serve(listener, router(state)).await
}

#[cfg(test)]
mod tests {
    use super::*;
    use axum::body::Body;
    use axum::http::{Method, Request};
    use tower::ServiceExt;

    async fn send_json(app: &Router, method: Method, uri: &str, body: Value) -> (StatusCode, Value) {
        let req = Request::builder()
            .method(method)
            .uri(uri)
            .header("content-type", "application/json")
            .body(Body::from(body.to_string()))
            .unwrap();
        let resp = app.clone().oneshot(req).await.unwrap();
        let status = resp.status();
        let bytes = axum::body::to_bytes(resp.into_body(), usize::MAX).await.unwrap();
        (status, serde_json::from_slice(&bytes).unwrap())
    }

    async fn send(app: &Router, method: Method, uri: &str, body: Value) -> StatusCode {
        send_json(app, method, uri, body).await.0
    }

    fn only_session(state: &AppState) -> (Uuid, Arc<SessionCell>) {
        let entry = state.sessions.iter().next().unwrap();
        (*entry.key(), entry.value().clone())
    }

    #[tokio::test]
    #[allow(clippy::await_holding_lock)]
    async fn concurrent_move_is_409() {
        let state = AppState::default();
        let app = router(state.clone());
        let cfg = json!({ "k": 2, "sizes": [3, 4], "multiplicity": 1 });
        assert_eq!(send(&app, Method::POST, "/games", cfg).await, StatusCode::OK);
        let (id, cell) = only_session(&state);
        let held = cell.state.lock().unwrap();
        let mv = json!({ "type": "element", "side": "U", "node": "d" });
        assert_eq!(send(&app, Method::POST, &format!("/games/{id}/moves"), mv.clone()).await, StatusCode::CONFLICT);
        drop(held);
        assert_eq!(send(&app, Method::POST, &format!("/games/{id}/moves"), mv).await, StatusCode::OK);
    }

    #[tokio::test]
    async fn too_few_fresh_components_is_422_and_not_applied() {
        let state = AppState::default();
        let app = router(state.clone());
        let cfg = json!({ "k": 2, "sizes": [3, 4], "multiplicity": 1 });
        assert_eq!(send(&app, Method::POST, "/games", cfg).await, StatusCode::OK);
        let (id, cell) = only_session(&state);
        // E holds one (3,4) and one (4,3) copy, U a single (4,4): touching
        // both E copies needs two fresh U partners
        let mv = json!({ "type": "set", "side": "E", "nodes": ["W0_La2_1", "W1_La1_1"] });
        let (status, body) = send_json(&app, Method::POST, &format!("/games/{id}/moves"), mv).await;
        assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
        assert_eq!(body["needed"], 2);
        let s = cell.state.lock().unwrap();
        assert_eq!(s.position.rounds_left, 2);
        assert!(s.history.is_empty());
    }
}
