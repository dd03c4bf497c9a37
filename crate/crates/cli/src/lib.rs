//! Process-facing surface of the engine: the live HTTP/stream service and
//! the `sitrep` command line.

pub mod commands;
pub mod service;
pub mod wire;

pub use service::{serve, spawn_engine, EngineHandle, LoopOptions, RunningService, ServiceError};
pub use wire::StreamMessage;
