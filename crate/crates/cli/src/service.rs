//! Network access to a running engine.
//!
//! The engine lives in one task that owns it exclusively. HTTP handlers and
//! stream connections talk to it through a command queue; it publishes
//! every outgoing stream message once, tagged with a sequence number, to a
//! bounded broadcast channel. A subscriber that falls behind loses the
//! oldest messages and is told how many in-band.

use std::io::Write;
use std::net::SocketAddr;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;
use std::time::Duration;

use axum::extract::ws::{Message, WebSocket, WebSocketUpgrade};
use axum::extract::{Path, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::Router;
use futures::{SinkExt, StreamExt};
use sitrep_core::engine::canonical_json;
use sitrep_core::{Control, ControlError, ControlReply, Engine, Snapshot};
use thiserror::Error;
use tokio::sync::{broadcast, mpsc, oneshot, watch};
use tokio::task::JoinHandle;
use tokio::time::Instant;

use crate::wire::{Ack, ErrorReport, StreamMessage};

/// Messages buffered per subscriber before the oldest are dropped.
pub const STREAM_BUFFER: usize = 256;

/// Shortest interval between snapshot re-emissions while frozen.
pub const MIN_FROZEN_PERIOD: Duration = Duration::from_millis(50);

#[derive(Debug, Error)]
pub enum ServiceError {
    #[error("cannot bind {addr}: {source}")]
    BindFailure {
        addr: String,
        source: std::io::Error,
    },
    #[error("engine stopped")]
    EngineGone,
}

/// A published stream message. `target` restricts delivery to one
/// connection (acks and errors for commands it sent).
#[derive(Debug)]
pub struct Published {
    pub seq: u64,
    pub target: Option<u64>,
    pub text: String,
}

#[derive(Debug, Clone)]
pub struct Current {
    pub seq: u64,
    pub snapshot: Arc<Snapshot>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Origin {
    Http,
    Stream(u64),
}

type Reply = oneshot::Sender<Result<ControlReply, ControlError>>;

enum Request {
    Control {
        cmd: Control,
        origin: Origin,
        reply: Option<Reply>,
    },
    Reject {
        conn: u64,
        message: String,
    },
}

/// Cloneable access to the engine task.
#[derive(Clone)]
pub struct EngineHandle {
    requests: mpsc::Sender<Request>,
    current: watch::Receiver<Current>,
    stream: broadcast::Sender<Arc<Published>>,
    connections: Arc<AtomicU64>,
}

#[derive(Debug, Clone)]
pub struct LoopOptions {
    /// Time between ticks; zero runs as fast as possible.
    pub tick: Duration,
    /// Stop advancing after this cycle.
    pub cycles: u64,
}

impl EngineHandle {
    pub fn current(&self) -> Current {
        self.current.borrow().clone()
    }

    pub fn snapshot(&self) -> Arc<Snapshot> {
        self.current.borrow().snapshot.clone()
    }

    /// Applies a command between ticks and waits for the outcome.
    pub async fn control(&self, cmd: Control) -> Result<Result<ControlReply, ControlError>, ServiceError> {
        let (tx, rx) = oneshot::channel();
        self.requests
            .send(Request::Control {
                cmd,
                origin: Origin::Http,
                reply: Some(tx),
            })
            .await
            .map_err(|_| ServiceError::EngineGone)?;
        rx.await.map_err(|_| ServiceError::EngineGone)
    }

    /// Waits until the engine has produced at least `cycle`.
    pub async fn wait_for_cycle(&self, cycle: u64) -> Result<(), ServiceError> {
        let mut rx = self.current.clone();
        rx.wait_for(|c| c.snapshot.cycle >= cycle)
            .await
            .map(|_| ())
            .map_err(|_| ServiceError::EngineGone)
    }
}

struct EngineTask {
    engine: Engine,
    seq: u64,
    current: watch::Sender<Current>,
    stream: broadcast::Sender<Arc<Published>>,
    log: Option<Box<dyn Write + Send>>,
}

impl EngineTask {
    fn publish(&mut self, msg: &StreamMessage, target: Option<u64>) {
        self.seq += 1;
        if let StreamMessage::Snapshot(s) = msg {
            self.current.send_replace(Current {
                seq: self.seq,
                snapshot: Arc::new(s.clone()),
            });
        }
        let _ = self.stream.send(Arc::new(Published {
            seq: self.seq,
            target,
            text: msg.encode(),
        }));
    }

    fn publish_snapshot(&mut self) {
        let snap = self.engine.snapshot().clone();
        self.publish(&StreamMessage::Snapshot(snap), None);
    }

    /// Publishes the snapshot of a tick that just ran, its salient facts,
    /// and appends it to the log.
    fn after_tick(&mut self) -> std::io::Result<()> {
        let snap = self.engine.snapshot().clone();
        if let Some(log) = self.log.as_mut() {
            writeln!(log, "{}", snap.to_json())?;
            log.flush()?;
        }
        let salient = snap.salient.clone();
        self.publish(&StreamMessage::Snapshot(snap), None);
        for fact in salient {
            self.publish(&StreamMessage::Salient(fact), None);
        }
        Ok(())
    }

    fn handle(&mut self, req: Request) -> std::io::Result<()> {
        let (cmd, origin, reply) = match req {
            Request::Reject { conn, message } => {
                let report = ErrorReport {
                    cycle: self.engine.cycle(),
                    message,
                    cmd: None,
                    dropped: None,
                };
                self.publish(&StreamMessage::Error(report), Some(conn));
                return Ok(());
            }
            Request::Control { cmd, origin, reply } => (cmd, origin, reply),
        };
        let target = match origin {
            Origin::Stream(conn) => Some(conn),
            Origin::Http => None,
        };
        if target.is_some() && matches!(cmd, Control::Inspect { .. }) {
            let report = ErrorReport {
                cycle: self.engine.cycle(),
                message: "inspect is served by GET /agents/{id}".into(),
                cmd: Some(cmd.name().into()),
                dropped: None,
            };
            self.publish(&StreamMessage::Error(report), target);
            return Ok(());
        }
        let before = self.engine.cycle();
        let outcome = self.engine.handle_control(&cmd);
        if let Some(conn) = target {
            let msg = match &outcome {
                Ok(ControlReply::Ack { cmd, cycle }) => StreamMessage::Ack(Ack {
                    cmd: cmd.clone(),
                    cycle: *cycle,
                }),
                Ok(ControlReply::Inspect(_)) => unreachable!("inspect is rejected on the stream"),
                Err(e) => StreamMessage::Error(ErrorReport {
                    cycle: self.engine.cycle(),
                    message: e.to_string(),
                    cmd: Some(cmd.name().into()),
                    dropped: None,
                }),
            };
            self.publish(&msg, Some(conn));
        }
        if outcome.is_ok() {
            if self.engine.cycle() != before {
                self.after_tick()?;
            } else if matches!(cmd, Control::Freeze | Control::Resume) {
                self.publish_snapshot();
            }
        }
        if let Some(reply) = reply {
            let _ = reply.send(outcome);
        }
        Ok(())
    }
}

/// Starts the engine task. It ticks every `opts.tick` until `opts.cycles`,
/// re-emits the current snapshot periodically while frozen, and applies
/// commands between ticks.
pub fn spawn_engine(
    engine: Engine,
    opts: LoopOptions,
    log: Option<Box<dyn Write + Send>>,
) -> (EngineHandle, JoinHandle<std::io::Result<()>>) {
    let (req_tx, mut req_rx) = mpsc::channel(64);
    let (stream_tx, _) = broadcast::channel(STREAM_BUFFER);
    let (current_tx, current_rx) = watch::channel(Current {
        seq: 0,
        snapshot: Arc::new(engine.snapshot().clone()),
    });
    let handle = EngineHandle {
        requests: req_tx,
        current: current_rx,
        stream: stream_tx.clone(),
        connections: Arc::new(AtomicU64::new(1)),
    };
    let mut task = EngineTask {
        engine,
        seq: 0,
        current: current_tx,
        stream: stream_tx,
        log,
    };
    let frozen_period = opts.tick.max(MIN_FROZEN_PERIOD);
    let join = tokio::spawn(async move {
        let mut next_tick = Instant::now() + opts.tick;
        let mut next_reemit = Instant::now() + frozen_period;
        loop {
            let running = !task.engine.is_frozen() && task.engine.cycle() < opts.cycles;
            let frozen = task.engine.is_frozen();
            let deadline = if running {
                Some(next_tick)
            } else if frozen {
                Some(next_reemit)
            } else {
                None
            };
            tokio::select! {
                req = req_rx.recv() => match req {
                    Some(req) => task.handle(req)?,
                    None => return Ok(()),
                },
                _ = tokio::time::sleep_until(deadline.unwrap_or_else(Instant::now)), if deadline.is_some() => {
                    let now = Instant::now();
                    if running {
                        task.engine.advance().expect("not frozen");
                        task.after_tick()?;
                        next_tick = (next_tick + opts.tick).max(now);
                        if opts.tick.is_zero() {
                            tokio::task::yield_now().await;
                        }
                    } else {
                        task.publish_snapshot();
                        next_reemit = now + frozen_period;
                    }
                    if !frozen {
                        next_reemit = now + frozen_period;
                    }
                }
            }
        }
    });
    (handle, join)
}

fn json_response(status: StatusCode, body: String) -> Response {
    (status, [(header::CONTENT_TYPE, "application/json")], body).into_response()
}

fn error_response(status: StatusCode, message: &str) -> Response {
    json_response(status, canonical_json(&serde_json::json!({ "error": message })))
}

fn control_error_status(e: &ControlError) -> StatusCode {
    match e {
        ControlError::UnknownAgent(_) => StatusCode::NOT_FOUND,
        ControlError::NotFrozen | ControlError::Frozen => StatusCode::CONFLICT,
        ControlError::UnknownConfigKey(_) | ControlError::InvalidValue { .. } => StatusCode::BAD_REQUEST,
    }
}

fn reply_response(outcome: Result<Result<ControlReply, ControlError>, ServiceError>) -> Response {
    match outcome {
        Ok(Ok(ControlReply::Ack { cmd, cycle })) => {
            json_response(StatusCode::OK, StreamMessage::Ack(Ack { cmd, cycle }).encode())
        }
        Ok(Ok(ControlReply::Inspect(report))) => json_response(StatusCode::OK, canonical_json(&report)),
        Ok(Err(e)) => error_response(control_error_status(&e), &e.to_string()),
        Err(e) => error_response(StatusCode::SERVICE_UNAVAILABLE, &e.to_string()),
    }
}

async fn get_snapshot(State(h): State<EngineHandle>) -> Response {
    json_response(StatusCode::OK, h.snapshot().to_json())
}

async fn get_agent(State(h): State<EngineHandle>, Path(id): Path<String>) -> Response {
    match id.parse() {
        Ok(agent) => reply_response(h.control(Control::Inspect { agent }).await),
        Err(_) => error_response(StatusCode::BAD_REQUEST, "agent id must be an integer"),
    }
}

async fn post_control(State(h): State<EngineHandle>, body: String) -> Response {
    match Control::from_json(&body) {
        Ok(cmd) => reply_response(h.control(cmd).await),
        Err(e) => error_response(StatusCode::BAD_REQUEST, &e.to_string()),
    }
}

async fn get_health(State(h): State<EngineHandle>) -> Response {
    let snap = h.snapshot();
    let body = serde_json::json!({
        "status": "ok",
        "cycle": snap.cycle,
        "frozen": snap.frozen,
        "agents": snap.agents.len(),
    });
    json_response(StatusCode::OK, canonical_json(&body))
}

async fn get_stream(State(h): State<EngineHandle>, ws: WebSocketUpgrade) -> Response {
    ws.on_upgrade(move |socket| subscriber(socket, h))
}

async fn subscriber(socket: WebSocket, h: EngineHandle) {
    let conn = h.connections.fetch_add(1, Ordering::Relaxed);
    let mut feed = h.stream.subscribe();
    let start = h.current();
    let (mut sink, mut source) = socket.split();
    let first = StreamMessage::Snapshot((*start.snapshot).clone()).encode();
    if sink.send(Message::Text(first.into())).await.is_err() {
        return;
    }
    let mut last_seq = start.seq;
    loop {
        tokio::select! {
            published = feed.recv() => {
                let text = match published {
                    Ok(p) => {
                        if p.seq <= last_seq || p.target.is_some_and(|t| t != conn) {
                            continue;
                        }
                        last_seq = p.seq;
                        p.text.clone()
                    }
                    Err(broadcast::error::RecvError::Lagged(n)) => StreamMessage::Error(ErrorReport {
                        cycle: h.snapshot().cycle,
                        message: format!("subscriber fell behind; dropped {n} messages"),
                        cmd: None,
                        dropped: Some(n),
                    })
                    .encode(),
                    Err(broadcast::error::RecvError::Closed) => break,
                };
                if sink.send(Message::Text(text.into())).await.is_err() {
                    break;
                }
            }
            incoming = source.next() => {
                let text = match incoming {
                    Some(Ok(Message::Text(t))) => t,
                    Some(Ok(Message::Close(_))) | Some(Err(_)) | None => break,
                    Some(Ok(_)) => continue,
                };
                let req = match Control::from_json(text.as_str()) {
                    Ok(cmd) => Request::Control { cmd, origin: Origin::Stream(conn), reply: None },
                    Err(e) => Request::Reject { conn, message: e.to_string() },
                };
                if h.requests.send(req).await.is_err() {
                    break;
                }
            }
        }
    }
}

pub fn router(handle: EngineHandle) -> Router {
    Router::new()
        .route("/snapshot", get(get_snapshot))
        .route("/agents/{id}", get(get_agent))
        .route("/control", post(post_control))
        .route("/health", get(get_health))
        .route("/stream", get(get_stream))
        .with_state(handle)
}

pub struct RunningService {
    pub addr: SocketAddr,
    shutdown: Option<oneshot::Sender<()>>,
    task: JoinHandle<std::io::Result<()>>,
}

impl RunningService {
    pub async fn stop(mut self) -> std::io::Result<()> {
        if let Some(tx) = self.shutdown.take() {
            let _ = tx.send(());
        }
        self.task.await.unwrap_or(Ok(()))
    }

    /// Waits until the server exits on its own (it normally does not).
    pub async fn join(self) -> std::io::Result<()> {
        self.task.await.unwrap_or(Ok(()))
    }
}

/// Binds `addr` and serves the API for `handle` in the background.
pub async fn serve(handle: EngineHandle, addr: &str) -> Result<RunningService, ServiceError> {
    let listener = tokio::net::TcpListener::bind(addr)
        .await
        .map_err(|source| ServiceError::BindFailure {
            addr: addr.to_owned(),
            source,
        })?;
    let local = listener.local_addr().map_err(|source| ServiceError::BindFailure {
        addr: addr.to_owned(),
        source,
    })?;
    let (tx, rx) = oneshot::channel::<()>();
    let app = router(handle);
    let task = tokio::spawn(async move {
        axum::serve(listener, app)
            .with_graceful_shutdown(async {
                let _ = rx.await;
            })
            .await
    });
    Ok(RunningService {
        addr: local,
        shutdown: Some(tx),
        task,
    })
}
