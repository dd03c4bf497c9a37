//! Headless client helpers for the live service.
#![allow(dead_code)]

use std::net::SocketAddr;
use std::path::PathBuf;
use std::time::Duration;

use futures::{SinkExt, StreamExt};
use sitrep_cli::service::{self, LoopOptions, RunningService};
use sitrep_cli::wire::StreamMessage;
use sitrep_cli::EngineHandle;
use sitrep_core::engine::{Config, Engine};
use sitrep_core::{ingest, InspectReport, Ontology, Snapshot};
use tokio::io::{AsyncReadExt, AsyncWriteExt};
use tokio::net::TcpStream;
use tokio_tungstenite::tungstenite::Message;

pub fn repo_root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

pub fn fire_block_engine() -> Engine {
    let dir = repo_root().join("scenarios");
    let scenario = ingest::read_scenario(&std::fs::read_to_string(dir.join("fire-block.scenario")).unwrap()).unwrap();
    let map = ingest::load_worldmap(&std::fs::read_to_string(dir.join("fire-block.map.jsonl")).unwrap()).unwrap();
    Engine::new(Ontology::default_rcr(), map, Config::default()).unwrap().with_feed(scenario)
}

pub struct Harness {
    pub handle: EngineHandle,
    pub server: RunningService,
}

impl Harness {
    pub async fn start(tick: Duration) -> Harness {
        let engine = fire_block_engine();
        let cycles = engine.feed_length();
        let (handle, _task) = service::spawn_engine(engine, LoopOptions { tick, cycles }, None);
        let server = service::serve(handle.clone(), "127.0.0.1:0").await.expect("bind");
        Harness { handle, server }
    }

    pub fn addr(&self) -> SocketAddr {
        self.server.addr
    }
}

/// One HTTP/1.1 exchange with `Connection: close`; returns status and body.
pub async fn http(addr: SocketAddr, method: &str, path: &str, body: Option<&str>) -> (u16, String) {
    let mut stream = TcpStream::connect(addr).await.expect("connect");
    let body = body.unwrap_or("");
    let request = format!(
        "{method} {path} HTTP/1.1\r\nHost: {addr}\r\nConnection: close\r\nContent-Type: application/json\r\nContent-Length: {}\r\n\r\n{body}",
        body.len()
    );
    stream.write_all(request.as_bytes()).await.unwrap();
    let mut raw = Vec::new();
    stream.read_to_end(&mut raw).await.unwrap();
    let text = String::from_utf8(raw).unwrap();
    let (head, rest) = text.split_once("\r\n\r\n").expect("response head");
    let status = head.split_whitespace().nth(1).unwrap().parse().unwrap();
    let chunked = head.to_ascii_lowercase().contains("transfer-encoding: chunked");
    (status, if chunked { dechunk(rest) } else { rest.to_owned() })
}

fn dechunk(mut rest: &str) -> String {
    let mut out = String::new();
    loop {
        let (size, tail) = rest.split_once("\r\n").unwrap();
        let n = usize::from_str_radix(size.trim(), 16).unwrap();
        if n == 0 {
            return out;
        }
        out.push_str(&tail[..n]);
        rest = &tail[n + 2..];
    }
}

pub type Ws = tokio_tungstenite::WebSocketStream<tokio_tungstenite::MaybeTlsStream<TcpStream>>;

pub async fn subscribe(addr: SocketAddr) -> Ws {
    let (ws, _) = tokio_tungstenite::connect_async(format!("ws://{addr}/stream")).await.expect("ws connect");
    ws
}

pub async fn send(ws: &mut Ws, text: &str) {
    ws.send(Message::Text(text.into())).await.unwrap();
}

pub async fn next_message(ws: &mut Ws) -> StreamMessage {
    loop {
        let msg = tokio::time::timeout(Duration::from_secs(5), ws.next())
            .await
            .expect("stream message within 5s")
            .expect("stream open")
            .expect("frame");
        if let Message::Text(t) = msg {
            return StreamMessage::decode(t.as_str()).expect("valid stream message");
        }
    }
}

/// Skips messages until one matches.
pub async fn wait_for(ws: &mut Ws, pred: impl Fn(&StreamMessage) -> bool) -> StreamMessage {
    loop {
        let m = next_message(ws).await;
        if pred(&m) {
            return m;
        }
    }
}

fn ensure(cond: bool, what: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(what.into())
    }
}

/// Freeze, re-emission, step and inspect, driven only through the stream
/// and HTTP.
pub async fn service_contract() -> Result<(), String> {
    let h = Harness::start(Duration::from_millis(20)).await;
    let addr = h.addr();
    h.handle.wait_for_cycle(3).await.map_err(|e| e.to_string())?;
    let mut ws = subscribe(addr).await;
    ensure(matches!(next_message(&mut ws).await, StreamMessage::Snapshot(_)), "first stream message is a snapshot")?;

    send(&mut ws, r#"{"cmd":"freeze"}"#).await;
    let frozen_at = match wait_for(&mut ws, |m| matches!(m, StreamMessage::Ack(_))).await {
        StreamMessage::Ack(a) if a.cmd == "freeze" => a.cycle,
        other => return Err(format!("expected freeze ack, got {other:?}")),
    };
    let mut cycles = Vec::new();
    while cycles.len() < 5 {
        if let StreamMessage::Snapshot(s) = next_message(&mut ws).await {
            ensure(s.frozen, "snapshots after freeze are marked frozen")?;
            cycles.push(s.cycle);
        }
    }
    ensure(cycles.iter().all(|c| *c == frozen_at), format!("frozen snapshots moved: {cycles:?} vs {frozen_at}"))?;

    send(&mut ws, r#"{"cmd":"step"}"#).await;
    let step = wait_for(&mut ws, |m| matches!(m, StreamMessage::Ack(_))).await;
    ensure(step.cycle() == frozen_at + 1, format!("step ack at {} after freeze at {frozen_at}", step.cycle()))?;
    let after = wait_for(&mut ws, |m| matches!(m, StreamMessage::Snapshot(_))).await;
    ensure(after.cycle() == frozen_at + 1, "snapshot after step advanced by exactly one")?;

    let (status, body) = http(addr, "POST", "/control", Some(r#"{"cmd":"step"}"#)).await;
    ensure(status == 200, format!("HTTP step: {status} {body}"))?;
    let (_, body) = http(addr, "GET", "/snapshot", None).await;
    let snap = Snapshot::from_json(&body).map_err(|e| e.to_string())?;
    ensure(snap.cycle == frozen_at + 2 && snap.frozen, "HTTP step advanced by one and stayed frozen")?;
    ensure(!snap.agents.is_empty(), "fire-block has agents by now")?;
    for row in &snap.agents {
        let (status, body) = http(addr, "GET", &format!("/agents/{}", row.id), None).await;
        ensure(status == 200, format!("inspect {}: {status}", row.id))?;
        let report: InspectReport = serde_json::from_str(&body).map_err(|e| e.to_string())?;
        ensure(report.cycle == snap.cycle, "inspect reports the frozen cycle")?;
        ensure(&report.agent == row, format!("inspect row for {} differs from snapshot", row.id))?;
    }
    let (status, _) = http(addr, "GET", "/agents/99999", None).await;
    ensure(status == 404, format!("unknown agent gives {status}"))?;

    send(&mut ws, r#"{"cmd":"resume"}"#).await;
    wait_for(&mut ws, |m| matches!(m, StreamMessage::Ack(a) if a.cmd == "resume")).await;
    let moving = wait_for(&mut ws, |m| matches!(m, StreamMessage::Snapshot(s) if !s.frozen && s.cycle > frozen_at + 2)).await;
    ensure(moving.cycle() > frozen_at + 2, "ticking resumes")?;
    h.server.stop().await.map_err(|e| e.to_string())
}
