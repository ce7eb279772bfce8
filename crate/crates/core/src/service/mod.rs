//! Line-delimited JSON protocol over TCP.
//!
//! Every frame is one UTF-8 JSON object followed by `\n`. A request looks like
//! `{"kind":"search","query":"data mining","k":5,"request_id":7}` and receives
//! exactly one response, `{"request_id":7,"status":"ok","payload":{...}}`.
//! Responses on a connection arrive in request order.

pub mod client;
pub mod server;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::engine::Engine;
use crate::knowledge::SearchStatus;
use crate::scalar::Scalar;
use crate::suggest::{SuggestStatus, DEFAULT_LIMIT};

pub use client::{Client, ClientError};
pub use server::{serve, ServerConfig, ServerHandle};

pub const DEFAULT_K: usize = 10;
pub const MAX_FRAME_BYTES: usize = 1 << 20;
pub const ENV_LISTEN_ADDR: &str = "EXPERT_LISTEN_ADDR";
pub const DEFAULT_LISTEN_ADDR: &str = "127.0.0.1:7878";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RequestKind {
    Search,
    Suggest,
    Browse,
    Ping,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Request {
    pub kind: RequestKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub query: Option<String>,
    /// Result count for search.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    /// Suggestion count for suggest.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub limit: Option<usize>,
    /// Browse subtree root; the whole tree when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub node: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub request_id: Option<i64>,
}

impl Request {
    fn bare(kind: RequestKind, request_id: i64) -> Self {
        Request { kind, query: None, k: None, limit: None, node: None, request_id: Some(request_id) }
    }

    pub fn ping(request_id: i64) -> Self {
        Self::bare(RequestKind::Ping, request_id)
    }

    pub fn search(query: impl Into<String>, k: usize, request_id: i64) -> Self {
        Request { query: Some(query.into()), k: Some(k), ..Self::bare(RequestKind::Search, request_id) }
    }

    pub fn suggest(prefix: impl Into<String>, limit: usize, request_id: i64) -> Self {
        Request { query: Some(prefix.into()), limit: Some(limit), ..Self::bare(RequestKind::Suggest, request_id) }
    }

    pub fn browse(node: Option<String>, request_id: i64) -> Self {
        Request { node, ..Self::bare(RequestKind::Browse, request_id) }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Ok,
    NoTerms,
    TooShort,
    Error,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Response {
    pub request_id: Option<i64>,
    pub status: Status,
    #[serde(default)]
    pub payload: Value,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error_message: Option<String>,
}

impl Response {
    pub fn error(request_id: Option<i64>, message: impl Into<String>) -> Self {
        Response { request_id, status: Status::Error, payload: Value::Null, error_message: Some(message.into()) }
    }
}

/// Answer one request against the engine. Used by the server for every frame.
pub fn dispatch<S: Scalar>(engine: &Engine<S>, req: &Request) -> Response {
    let id = req.request_id;
    let ok = |status, payload| Response { request_id: id, status, payload, error_message: None };
    match req.kind {
        RequestKind::Ping => ok(Status::Ok, json!({})),
        RequestKind::Search => {
            let Some(q) = &req.query else {
                return Response::error(id, "search needs a query");
            };
            let outcome = engine.search(q, req.k.unwrap_or(DEFAULT_K));
            let status = match outcome.status {
                SearchStatus::Ok => Status::Ok,
                SearchStatus::NoTerms => Status::NoTerms,
            };
            let results: Vec<Value> =
                outcome.results.iter().map(|(r, s)| json!({"researcher": r, "score": s.as_f64()})).collect();
            ok(status, json!({"terms": outcome.terms, "results": results}))
        }
        RequestKind::Suggest => {
            let Some(q) = &req.query else {
                return Response::error(id, "suggest needs a query");
            };
            let s = engine.suggest(q, req.limit.unwrap_or(DEFAULT_LIMIT));
            let status = match s.status {
                SuggestStatus::Ok => Status::Ok,
                SuggestStatus::TooShort => Status::TooShort,
            };
            ok(status, json!({"suggestions": s.items}))
        }
        RequestKind::Browse => {
            let doc = engine.browse();
            let node = match &req.node {
                None => Some(&doc.root),
                Some(n) => doc.subtree(n),
            };
            match node {
                Some(n) => ok(Status::Ok, serde_json::to_value(n).expect("browse node serializes")),
                None => Response::error(id, format!("no emitted node {:?}", req.node.as_deref().unwrap_or(""))),
            }
        }
    }
}

/// Parse a raw frame and dispatch it; malformed frames get an error response
/// carrying the request id when one can be recovered.
pub fn handle_frame<S: Scalar>(engine: &Engine<S>, frame: &[u8]) -> Response {
    let text = match std::str::from_utf8(frame) {
        Ok(t) => t.trim(),
        Err(_) => return Response::error(None, "frame is not UTF-8"),
    };
    match serde_json::from_str::<Request>(text) {
        Ok(req) => dispatch(engine, &req),
        Err(e) => {
            let id = serde_json::from_str::<Value>(text).ok().and_then(|v| v.get("request_id")?.as_i64());
            Response::error(id, format!("malformed request: {e}"))
        }
    }
}
