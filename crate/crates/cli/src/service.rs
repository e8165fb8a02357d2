//! The game service: interactive sessions over HTTP with JSON bodies.
//!
//! ```text
//! POST /games              {u, v, s, m, sig, humanRole} → {id, state}
//! GET  /games/{id}         → {state}
//! POST /games/{id}/moves   {side, position} → {state, verdict?, engine}
//! GET  /games/{id}/hint    → {side, position, winning}
//! ```
//!
//! The engine plays the role the human does not, immediately after every
//! human move. Each session has one writer at a time: a mutation that finds
//! the session busy is refused with 409 rather than queued. Sessions idle for
//! longer than the configured time are dropped.

use std::collections::HashMap;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use axum::body::Bytes;
use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use fo2::efgame::{Alternations, GameError, GameSpec, Move, Player, Session, SessionError, SolverConfig};
use fo2::{Signature, Word};
use serde::{Deserialize, Serialize};
use serde_json::json;
use tokio::net::TcpListener;

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    reason: &'static str,
    message: String,
}

impl ApiError {
    fn new(status: StatusCode, reason: &'static str, message: impl Into<String>) -> Self {
        ApiError { status, reason, message: message.into() }
    }

    fn bad_request(message: impl Into<String>) -> Self {
        ApiError::new(StatusCode::BAD_REQUEST, "bad request", message)
    }

    fn busy() -> Self {
        ApiError::new(StatusCode::CONFLICT, "session busy", "another request is changing this game")
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(json!({ "error": self.reason, "message": self.message }))).into_response()
    }
}

impl From<SessionError> for ApiError {
    fn from(e: SessionError) -> Self {
        let reason = match e {
            // once the game is decided it is nobody's turn
            SessionError::NotYourTurn | SessionError::GameOver => "not your turn",
            SessionError::NoMove => "no legal move",
            SessionError::Illegal(_) | SessionError::WrongSide => "constraint violation",
        };
        ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, reason, e.to_string())
    }
}

impl From<GameError> for ApiError {
    fn from(e: GameError) -> Self {
        match e {
            GameError::BudgetExceeded { .. } | GameError::StrategyTooLarge(_) | GameError::Locality(_) => {
                ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "resource guard", e.to_string())
            }
            _ => ApiError::bad_request(e.to_string()),
        }
    }
}

#[derive(Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
struct CreateRequest {
    u: String,
    v: String,
    s: usize,
    /// Alternation budget; absent or null means unbounded.
    #[serde(default)]
    m: Option<usize>,
    sig: String,
    human_role: Player,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct MoveRequest {
    side: fo2::efgame::Side,
    position: usize,
}

#[derive(Serialize)]
struct Words {
    u: String,
    v: String,
}

#[derive(Serialize)]
struct Pebbles {
    previous: Option<(usize, usize)>,
    current: Option<(usize, usize)>,
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct StateView {
    words: Words,
    rounds: usize,
    alternations: Option<usize>,
    sig: String,
    human_role: Player,
    pebbles: Pebbles,
    /// Spoiler's move awaiting Duplicator's answer.
    pending: Option<Move>,
    rounds_used: usize,
    alternations_used: usize,
    turn: Option<Player>,
    winner: Option<Player>,
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct Verdict {
    winner: Player,
    human_won: bool,
}

struct Game {
    session: Session,
    human: Player,
    sig: String,
}

impl Game {
    fn engine(&self) -> Player {
        match self.human {
            Player::Spoiler => Player::Duplicator,
            Player::Duplicator => Player::Spoiler,
        }
    }

    /// Engine moves until it is the human's turn or the game is over.
    fn engine_turns(&mut self) -> Result<Vec<Move>, SessionError> {
        let mut moves = Vec::new();
        while self.session.turn() == Some(self.engine()) {
            moves.push(self.session.engine_move()?);
        }
        Ok(moves)
    }

    fn view(&self) -> StateView {
        let v = self.session.view();
        StateView {
            words: Words { u: v.u, v: v.v },
            rounds: v.rounds,
            alternations: v.alternations,
            sig: self.sig.clone(),
            human_role: self.human,
            pebbles: Pebbles {
                previous: v.previous,
                current: v.current,
            },
            pending: v.pending,
            rounds_used: v.rounds_used,
            alternations_used: v.alternations_used,
            turn: v.turn,
            winner: v.winner,
        }
    }

    fn verdict(&self) -> Option<Verdict> {
        self.session.winner().map(|winner| Verdict {
            winner,
            human_won: winner == self.human,
        })
    }
}

struct Entry {
    game: Arc<tokio::sync::Mutex<Game>>,
    touched: Mutex<Instant>,
}

struct Inner {
    sessions: Mutex<HashMap<String, Arc<Entry>>>,
    next_id: AtomicU64,
    idle: Duration,
    solver: SolverConfig,
}

impl Inner {
    /// The live session `id`, marked as used now.
    fn lookup(&self, id: &str) -> Result<Arc<Entry>, ApiError> {
        let mut sessions = self.sessions.lock().unwrap();
        let entry = sessions
            .get(id)
            .cloned()
            .ok_or_else(|| ApiError::new(StatusCode::NOT_FOUND, "not found", format!("no game `{id}`")))?;
        let mut touched = entry.touched.lock().unwrap();
        if touched.elapsed() > self.idle {
            drop(touched);
            sessions.remove(id);
            return Err(ApiError::new(StatusCode::NOT_FOUND, "not found", format!("game `{id}` expired")));
        }
        *touched = Instant::now();
        drop(touched);
        Ok(entry)
    }

    fn sweep(&self) {
        self.sessions
            .lock()
            .unwrap()
            .retain(|_, e| e.touched.lock().unwrap().elapsed() <= self.idle);
    }
}

/// Shared state of a running service.
#[derive(Clone)]
pub struct Service {
    inner: Arc<Inner>,
}

impl Service {
    pub fn new(idle: Duration, solver: SolverConfig) -> Self {
        Service {
            inner: Arc::new(Inner {
                sessions: Mutex::new(HashMap::new()),
                next_id: AtomicU64::new(1),
                idle,
                solver,
            }),
        }
    }

    pub fn router(&self) -> Router {
        Router::new()
            .route("/games", post(create))
            .route("/games/{id}", get(fetch))
            .route("/games/{id}/moves", post(play))
            .route("/games/{id}/hint", get(hint))
            .with_state(self.inner.clone())
    }

    /// Number of live sessions.
    pub fn len(&self) -> usize {
        self.inner.sessions.lock().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Serves `service` on `listener` until the process ends, sweeping idle
/// sessions in the background.
pub async fn serve(listener: TcpListener, service: Service) -> std::io::Result<()> {
    let inner = service.inner.clone();
    let period = (inner.idle / 2).max(Duration::from_millis(100));
    tokio::spawn(async move {
        let mut tick = tokio::time::interval(period);
        loop {
            tick.tick().await;
            inner.sweep();
        }
    });
    axum::serve(listener, service.router()).await
}

fn parse_body<T: serde::de::DeserializeOwned>(body: &Bytes) -> Result<T, ApiError> {
    serde_json::from_slice(body).map_err(|e| ApiError::bad_request(format!("malformed body: {e}")))
}

async fn blocking<T: Send + 'static>(f: impl FnOnce() -> T + Send + 'static) -> Result<T, ApiError> {
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "internal error", e.to_string()))
}

async fn create(State(inner): State<Arc<Inner>>, body: Bytes) -> Result<Response, ApiError> {
    let req: CreateRequest = parse_body(&body)?;
    if req.s == 0 {
        return Err(ApiError::bad_request("s must be at least 1"));
    }
    let sig = Signature::parse(&req.sig).map_err(|e| ApiError::bad_request(e.to_string()))?;
    let alternations = req.m.map_or(Alternations::Unbounded, Alternations::Bounded);
    let spec = GameSpec::new(Word::new(req.u.chars()), Word::new(req.v.chars()), req.s, alternations, sig);
    let solver = inner.solver;
    let (human, sig_text) = (req.human_role, req.sig.trim().to_string());
    let game = blocking(move || -> Result<Game, ApiError> {
        let mut game = Game {
            session: Session::with_config(&spec, solver)?,
            human,
            sig: sig_text,
        };
        game.engine_turns()?;
        Ok(game)
    })
    .await??;
    let state = game.view();
    let id = format!("g{}", inner.next_id.fetch_add(1, Ordering::Relaxed));
    let entry = Arc::new(Entry {
        game: Arc::new(tokio::sync::Mutex::new(game)),
        touched: Mutex::new(Instant::now()),
    });
    inner.sessions.lock().unwrap().insert(id.clone(), entry);
    Ok((StatusCode::CREATED, Json(json!({ "id": id, "state": state }))).into_response())
}

async fn fetch(State(inner): State<Arc<Inner>>, Path(id): Path<String>) -> Result<Response, ApiError> {
    let entry = inner.lookup(&id)?;
    let game = entry.game.lock().await;
    Ok(Json(json!({ "state": game.view() })).into_response())
}

async fn play(State(inner): State<Arc<Inner>>, Path(id): Path<String>, body: Bytes) -> Result<Response, ApiError> {
    let req: MoveRequest = parse_body(&body)?;
    let entry = inner.lookup(&id)?;
    let mut game = entry.game.clone().try_lock_owned().map_err(|_| ApiError::busy())?;
    let (state, verdict, engine) = blocking(move || -> Result<_, ApiError> {
        let human = game.human;
        game.session.apply_move(human, Move::new(req.side, req.position))?;
        let engine = game.engine_turns()?;
        Ok((game.view(), game.verdict(), engine))
    })
    .await??;
    let mut body = json!({ "state": state, "engine": engine });
    if let Some(v) = verdict {
        body["verdict"] = json!(v);
    }
    Ok(Json(body).into_response())
}

async fn hint(State(inner): State<Arc<Inner>>, Path(id): Path<String>) -> Result<Response, ApiError> {
    let entry = inner.lookup(&id)?;
    let mut game = entry.game.clone().try_lock_owned().map_err(|_| ApiError::busy())?;
    let h = blocking(move || game.session.hint()).await??;
    Ok(Json(h).into_response())
}

#[cfg(test)]
mod tests {
    use super::*;

    async fn start(idle: Duration) -> (Service, String) {
        let service = Service::new(idle, SolverConfig::default());
        let listener = TcpListener::bind("127.0.0.1:0").await.unwrap();
        let url = format!("http://{}", listener.local_addr().unwrap());
        tokio::spawn(serve(listener, service.clone()));
        (service, url)
    }

    #[tokio::test]
    async fn a_held_session_refuses_mutations() {
        let (service, url) = start(Duration::from_secs(60)).await;
        let client = reqwest::Client::new();
        let created: serde_json::Value = client
            .post(format!("{url}/games"))
            .json(&json!({"u": "ab", "v": "ba", "s": 2, "m": 0, "sig": "less", "humanRole": "Spoiler"}))
            .send()
            .await
            .unwrap()
            .json()
            .await
            .unwrap();
        let id = created["id"].as_str().unwrap().to_string();
        let entry = service.inner.lookup(&id).unwrap();
        let held = entry.game.clone().try_lock_owned().unwrap();

        let r = client
            .post(format!("{url}/games/{id}/moves"))
            .json(&json!({"side": "u", "position": 0}))
            .send()
            .await
            .unwrap();
        assert_eq!(r.status(), 409);
        let r = client.get(format!("{url}/games/{id}/hint")).send().await.unwrap();
        assert_eq!(r.status(), 409);

        drop(held);
        let r = client
            .post(format!("{url}/games/{id}/moves"))
            .json(&json!({"side": "u", "position": 0}))
            .send()
            .await
            .unwrap();
        assert_eq!(r.status(), 200);
    }

    #[tokio::test]
    async fn sweeping_drops_idle_sessions() {
        let (service, url) = start(Duration::from_millis(200)).await;
        let client = reqwest::Client::new();
        let r = client
            .post(format!("{url}/games"))
            .json(&json!({"u": "a", "v": "a", "s": 1, "sig": "less", "humanRole": "Spoiler"}))
            .send()
            .await
            .unwrap();
        assert_eq!(r.status(), 201);
        assert_eq!(service.len(), 1);
        tokio::time::sleep(Duration::from_millis(800)).await;
        assert!(service.is_empty());
    }
}
