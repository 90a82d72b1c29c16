mod common;

use std::sync::Arc;

use axum::body::Body;
use axum::http::{header, Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use tower::ServiceExt;

use ee_dialogue::server::{router, WireMessage, NDJSON};

fn app() -> Router {
    router(Arc::new(common::isolation_service()))
}

async fn call(app: &Router, method: &str, uri: &str, body: Option<&str>) -> (StatusCode, String, String) {
    let mut req = Request::builder().method(method).uri(uri);
    if body.is_some() {
        req = req.header(header::CONTENT_TYPE, "application/json");
    }
    let req = req.body(Body::from(body.unwrap_or_default().to_owned())).unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let ctype =
        resp.headers().get(header::CONTENT_TYPE).map(|v| v.to_str().unwrap().to_owned()).unwrap_or_default();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    (status, ctype, String::from_utf8(bytes.to_vec()).unwrap())
}

fn messages(body: &str) -> Vec<WireMessage> {
    body.lines().map(|l| serde_json::from_str(l).unwrap()).collect()
}

#[tokio::test]
async fn health_and_specs() {
    let app = app();
    assert_eq!(call(&app, "GET", "/health", None).await.2, "ok");
    let (status, _, body) = call(&app, "GET", "/specs", None).await;
    assert_eq!(status, StatusCode::OK);
    let ids: Vec<String> = serde_json::from_str(&body).unwrap();
    assert_eq!(ids, ["loan", "radiograph"]);
}

#[tokio::test]
async fn conversation_over_ndjson() {
    let app = app();
    let (status, ctype, body) = call(&app, "POST", "/sessions", Some(r#"{"spec_id":"radiograph"}"#)).await;
    assert_eq!((status, ctype.as_str()), (StatusCode::CREATED, NDJSON));
    let msgs = messages(&body);
    let WireMessage::BotUtterance { node_id, choices, .. } = &msgs[0] else { panic!("{body}") };
    assert_eq!((node_id.as_str(), choices.len()), ("greet.consent", 2));
    let Some(WireMessage::SessionState { session_id: Some(id), waiting_node, .. }) = msgs.last() else {
        panic!("{body}")
    };
    assert_eq!(waiting_node.as_deref(), Some("greet.consent"));

    let event = r#"{"type":"user_event","event":{"choice_index":0}}"#;
    let (status, _, body) = call(&app, "POST", &format!("/sessions/{id}/events"), Some(event)).await;
    assert_eq!(status, StatusCode::OK, "{body}");
    assert!(body.contains("\"persona.ai\""));

    let event = r#"{"type":"user_event","event":{"choice_index":9}}"#;
    let (status, _, body) = call(&app, "POST", &format!("/sessions/{id}/events"), Some(event)).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert!(matches!(&messages(&body)[0], WireMessage::Error { code, .. } if code == "choice_out_of_range"));

    let (status, _, body) = call(&app, "GET", &format!("/sessions/{id}/transcript"), None).await;
    assert_eq!(status, StatusCode::OK);
    let transcript: serde_json::Value = serde_json::from_str(&body).unwrap();
    assert_eq!(transcript["session_id"], id.as_str());

    let (status, _, body) = call(&app, "GET", "/specs/radiograph/sessions", None).await;
    assert_eq!(status, StatusCode::OK);
    assert!(body.contains(id.as_str()));
}

#[tokio::test]
async fn errors_are_wire_messages() {
    let app = app();
    let (status, _, body) = call(&app, "POST", "/sessions", Some(r#"{"spec_id":"nope"}"#)).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert!(matches!(&messages(&body)[0], WireMessage::Error { code, .. } if code == "unknown_spec"));

    let (status, _, _) = call(&app, "POST", "/sessions", Some("{")).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);

    let (status, _, _) = call(
        &app,
        "POST",
        "/sessions/s999999/events",
        Some(r#"{"type":"user_event","event":{"free_text":"hi"}}"#),
    )
    .await;
    assert_eq!(status, StatusCode::NOT_FOUND);

    let (status, _, body) = call(&app, "GET", "/specs/loan/verdict", None).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert!(body.contains("no_evaluations"));
}
