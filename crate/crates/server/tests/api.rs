use axum::body::Body;
use axum::http::{Method, Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use serde_json::{json, Value};
use std::time::Duration;
use tower::ServiceExt;
use treehom_server::{router, AppState, ServerConfig};

async fn call(app: &Router, method: Method, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
    let mut req = Request::builder().method(method).uri(uri);
    let body = match body {
        Some(v) => {
            req = req.header("content-type", "application/json");
            Body::from(v.to_string())
        }
        None => Body::empty(),
    };
    let resp = app.clone().oneshot(req.body(body).unwrap()).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    let v = if bytes.is_empty() {
        Value::Null
    } else {
        serde_json::from_slice(&bytes).unwrap()
    };
    (status, v)
}

fn config() -> Value {
    json!({ "k": 2, "sizes": [3, 4, 5], "multiplicity": 2, "rounds": 2 })
}

async fn new_game(app: &Router, cfg: Value) -> String {
    let (status, body) = call(app, Method::POST, "/games", Some(cfg)).await;
    assert_eq!(status, StatusCode::OK, "{body}");
    body["sessionId"].as_str().unwrap().to_string()
}

async fn play(app: &Router, id: &str, mv: Value) -> (StatusCode, Value) {
    call(app, Method::POST, &format!("/games/{id}/moves"), Some(mv)).await
}

#[tokio::test]
async fn create_returns_summary_with_version() {
    let app = router(AppState::default());
    let (status, body) = call(&app, Method::POST, "/games", Some(config())).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body["v"], 1);
    let pos = &body["position"];
    assert_eq!(pos["roundsLeft"], 2);
    assert_eq!(pos["phase"]["kind"], "awaitingSpoiler");
    assert_eq!(pos["u"]["finalNode"], "d");
    // U: 2 copies of (s,s) for s in 4,5; E: 2 copies each of (3,s) and (s,3)
    assert_eq!(pos["u"]["components"].as_array().unwrap().len(), 4);
    assert_eq!(pos["e"]["components"].as_array().unwrap().len(), 8);
    assert_eq!(pos["u"]["components"][0]["n"], 4);
    assert_eq!(pos["u"]["components"][0]["m"], 4);
}

#[tokio::test]
async fn sizes_from_chains_endpoint_are_accepted() {
    let app = router(AppState::default());
    let (status, body) = call(&app, Method::GET, "/chains?k=2&maxlen=6", None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body["lengths"], json!([3, 4, 5, 6]));
    let cfg = json!({ "k": 2, "sizes": body["lengths"], "multiplicity": 2, "rounds": 2 });
    new_game(&app, cfg).await;
}

#[tokio::test]
async fn chains_rejects_out_of_range_queries() {
    let app = router(AppState::default());
    for uri in ["/chains?k=4&maxlen=3", "/chains?k=2&maxlen=0", "/chains?k=2&maxlen=99", "/chains?k=x"] {
        let (status, body) = call(&app, Method::GET, uri, None).await;
        assert_eq!(status, StatusCode::BAD_REQUEST, "{uri}");
        assert_eq!(body["v"], 1);
    }
}

#[tokio::test]
async fn invalid_parameters_are_400() {
    let app = router(AppState::default());
    let cases = [
        json!({ "k": 9, "sizes": [3, 4], "multiplicity": 2 }),
        json!({ "k": 2, "sizes": [3, 4], "multiplicity": 2, "rounds": 3 }),
        json!({ "k": 2, "sizes": [3, 4], "multiplicity": 5 }),
        json!({ "k": 2, "sizes": [4, 3], "multiplicity": 2 }),
        json!({ "k": 2, "sizes": [3], "multiplicity": 2 }),
        json!({ "k": 2, "sizes": [3, 40], "multiplicity": 2 }),
        json!({ "k": 2 }),
    ];
    for cfg in cases {
        let (status, body) = call(&app, Method::POST, "/games", Some(cfg.clone())).await;
        assert_eq!(status, StatusCode::BAD_REQUEST, "{cfg}");
        assert!(body["error"].is_string());
    }
}

#[tokio::test]
async fn inequivalent_sizes_are_422() {
    let app = router(AppState::default());
    let cfg = json!({ "k": 2, "sizes": [1, 2], "multiplicity": 1, "rounds": 2 });
    let (status, body) = call(&app, Method::POST, "/games", Some(cfg)).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(body["v"], 1);
}

#[tokio::test]
async fn final_node_is_answered_by_final_node() {
    let app = router(AppState::default());
    let id = new_game(&app, config()).await;
    let (status, body) = play(&app, &id, json!({ "type": "element", "side": "U", "node": "d" })).await;
    assert_eq!(status, StatusCode::OK, "{body}");
    assert_eq!(body["reply"], json!({ "type": "element", "side": "E", "node": "d" }));
    assert_eq!(body["position"]["roundsLeft"], 1);
    assert_eq!(body["position"]["eElems"], json!(["d"]));
    assert_eq!(body["position"]["uElems"], json!(["d"]));
}

#[tokio::test]
async fn bound_on_u_with_nothing_touched_is_twice_l() {
    let app = router(AppState::default());
    let id = new_game(&app, config()).await;
    let (status, body) = play(&app, &id, json!({ "type": "bound", "side": "U", "l": 3 })).await;
    assert_eq!(status, StatusCode::OK, "{body}");
    assert_eq!(body["reply"], json!({ "type": "boundReply", "m": 6 }));
    assert_eq!(body["position"]["phase"]["kind"], "awaitingBoundedSet");
    assert_eq!(body["position"]["phase"]["m"], 6);
}

#[tokio::test]
async fn full_game_reports_verdict() {
    let app = router(AppState::default());
    let id = new_game(&app, config()).await;
    let (_, body) = play(&app, &id, json!({ "type": "element", "side": "U", "node": "W0_La2_2" })).await;
    assert_eq!(body["reply"]["side"], "E");
    assert!(body["verdict"].is_null());
    let (status, body) = play(&app, &id, json!({ "type": "set", "side": "left", "nodes": ["d", "W0_l"] })).await;
    assert_eq!(status, StatusCode::OK, "{body}");
    assert_eq!(body["position"]["roundsLeft"], 0);
    assert_eq!(body["verdict"]["duplicatorWins"], true);
    assert!(body["verdict"]["membership"].is_null());
    assert_eq!(body["position"]["winner"], "duplicator");
    // the game is over now
    let (status, _) = play(&app, &id, json!({ "type": "element", "side": "U", "node": "d" })).await;
    assert_eq!(status, StatusCode::CONFLICT);
}

#[tokio::test]
async fn unknown_labels_and_wrong_phase_are_409() {
    let app = router(AppState::default());
    let id = new_game(&app, config()).await;
    let (status, body) = play(&app, &id, json!({ "type": "set", "side": "U", "nodes": ["d", "nope"] })).await;
    assert_eq!(status, StatusCode::CONFLICT);
    assert!(body["legalMoves"].as_array().unwrap().len() >= 3);
    let (status, _) = play(&app, &id, json!({ "type": "boundedSet", "nodes": ["d"] })).await;
    assert_eq!(status, StatusCode::CONFLICT);
    // a bounded set smaller than the demand
    play(&app, &id, json!({ "type": "bound", "side": "U", "l": 1 })).await;
    let (status, body) = play(&app, &id, json!({ "type": "boundedSet", "nodes": ["d"] })).await;
    assert_eq!(status, StatusCode::CONFLICT, "{body}");
}

#[tokio::test]
async fn malformed_moves_are_400() {
    let app = router(AppState::default());
    let id = new_game(&app, config()).await;
    let (status, _) = play(&app, &id, json!({ "type": "teleport" })).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn unknown_sessions_are_404() {
    let app = router(AppState::default());
    let ghost = "00000000-0000-4000-8000-000000000000";
    let (status, _) = call(&app, Method::GET, &format!("/games/{ghost}"), None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    let (status, _) = play(&app, ghost, json!({ "type": "element", "side": "U", "node": "d" })).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    let (status, _) = call(&app, Method::GET, "/games/not-a-uuid", None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn delete_ends_the_session() {
    let app = router(AppState::default());
    let id = new_game(&app, config()).await;
    let (status, _) = call(&app, Method::DELETE, &format!("/games/{id}"), None).await;
    assert_eq!(status, StatusCode::NO_CONTENT);
    let (status, _) = call(&app, Method::DELETE, &format!("/games/{id}"), None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn get_returns_history() {
    let app = router(AppState::default());
    let id = new_game(&app, config()).await;
    play(&app, &id, json!({ "type": "element", "side": "U", "node": "d" })).await;
    let (status, body) = call(&app, Method::GET, &format!("/games/{id}"), None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body["sessionId"], id.as_str());
    assert_eq!(body["config"]["k"], 2);
    let h = body["history"].as_array().unwrap();
    assert_eq!(h.len(), 1);
    assert_eq!(h[0]["spoiler"]["node"], "d");
    assert_eq!(h[0]["reply"]["node"], "d");
}

#[tokio::test]
async fn replaying_history_reproduces_replies() {
    let app = router(AppState::default());
    let moves = [
        json!({ "type": "element", "side": "E", "node": "W5_La1_2" }),
        json!({ "type": "set", "side": "U", "nodes": ["W1_La2_1", "W1_La2_3", "W2_l", "d"] }),
    ];
    let mut runs = Vec::new();
    for _ in 0..2 {
        let id = new_game(&app, config()).await;
        let mut replies = Vec::new();
        for mv in &moves {
            let (status, body) = play(&app, &id, mv.clone()).await;
            assert_eq!(status, StatusCode::OK, "{body}");
            replies.push(body["reply"].clone());
        }
        let (_, state) = call(&app, Method::GET, &format!("/games/{id}"), None).await;
        runs.push((replies, state["position"].clone()));
    }
    assert_eq!(runs[0], runs[1]);
}

#[tokio::test]
async fn idle_sessions_expire() {
    let state = AppState::new(ServerConfig {
        idle_expiry: Duration::ZERO,
    });
    let app = router(state.clone());
    new_game(&app, config()).await;
    assert_eq!(state.session_count(), 1);
    assert_eq!(state.expire_idle(), 1);
    assert_eq!(state.session_count(), 0);
}

#[tokio::test]
async fn cors_preflight_is_allowed() {
    let app = router(AppState::default());
    let req = Request::builder()
        .method(Method::OPTIONS)
        .uri("/games")
        .header("origin", "http://localhost:5173")
        .header("access-control-request-method", "POST")
        .body(Body::empty())
        .unwrap();
    let resp = app.oneshot(req).await.unwrap();
    assert!(resp.headers().contains_key("access-control-allow-origin"));
}
