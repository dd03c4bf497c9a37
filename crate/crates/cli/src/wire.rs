//! Messages sent from the service to stream subscribers.
//!
//! Every message is one JSON object with sorted keys and a `kind` field;
//! the payload's own fields sit next to it:
//!
//! ```text
//! {"cmd":"freeze","cycle":12,"kind":"ack"}
//! {"agent":3,"cycle":9,"feature":"(...)","key":"Phenomenon#14","kind":"salient","type":"fire"}
//! ```

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use sitrep_core::{SalientFact, Snapshot};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq)]
pub enum StreamMessage {
    Snapshot(Snapshot),
    Ack(Ack),
    Error(ErrorReport),
    Salient(SalientFact),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Ack {
    pub cmd: String,
    pub cycle: u64,
}

/// A rejected command, or a report that this subscriber fell behind and
/// lost `dropped` messages.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ErrorReport {
    pub cycle: u64,
    pub message: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cmd: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dropped: Option<u64>,
}

#[derive(Debug, Error)]
pub enum DecodeError {
    #[error("not a JSON object: {0}")]
    Json(#[from] serde_json::Error),
    #[error("missing or unknown message kind")]
    Kind,
}

impl StreamMessage {
    pub fn kind(&self) -> &'static str {
        match self {
            StreamMessage::Snapshot(_) => "snapshot",
            StreamMessage::Ack(_) => "ack",
            StreamMessage::Error(_) => "error",
            StreamMessage::Salient(_) => "salient",
        }
    }

    pub fn cycle(&self) -> u64 {
        match self {
            StreamMessage::Snapshot(s) => s.cycle,
            StreamMessage::Ack(a) => a.cycle,
            StreamMessage::Error(e) => e.cycle,
            StreamMessage::Salient(s) => s.cycle,
        }
    }

    pub fn encode(&self) -> String {
        let payload = match self {
            StreamMessage::Snapshot(s) => serde_json::to_value(s),
            StreamMessage::Ack(a) => serde_json::to_value(a),
            StreamMessage::Error(e) => serde_json::to_value(e),
            StreamMessage::Salient(s) => serde_json::to_value(s),
        }
        .expect("stream payloads serialize");
        let mut map = match payload {
            Value::Object(map) => map,
            _ => Map::new(),
        };
        map.insert("kind".into(), Value::String(self.kind().into()));
        serde_json::to_string(&Value::Object(map)).expect("values serialize")
    }

    pub fn decode(text: &str) -> Result<Self, DecodeError> {
        let mut map: Map<String, Value> = serde_json::from_str(text)?;
        let kind = match map.remove("kind") {
            Some(Value::String(k)) => k,
            _ => return Err(DecodeError::Kind),
        };
        let payload = Value::Object(map);
        Ok(match kind.as_str() {
            "snapshot" => StreamMessage::Snapshot(serde_json::from_value(payload)?),
            "ack" => StreamMessage::Ack(serde_json::from_value(payload)?),
            "error" => StreamMessage::Error(serde_json::from_value(payload)?),
            "salient" => StreamMessage::Salient(serde_json::from_value(payload)?),
            _ => return Err(DecodeError::Kind),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ack_form() {
        let m = StreamMessage::Ack(Ack { cmd: "freeze".into(), cycle: 12 });
        assert_eq!(m.encode(), r#"{"cmd":"freeze","cycle":12,"kind":"ack"}"#);
        assert_eq!(StreamMessage::decode(&m.encode()).unwrap(), m);
    }

    #[test]
    fn salient_form() {
        let m = StreamMessage::Salient(SalientFact {
            cycle: 9,
            agent: 3,
            key: "Phenomenon#14".into(),
            kind: "fire".into(),
            feature: "(Phenomenon#14, type, fire, intensity, strongly, localisation, 20|25, time, 9)".into(),
        });
        let text = m.encode();
        assert!(text.starts_with(r#"{"agent":3,"cycle":9,"#));
        assert!(text.contains(r#""kind":"salient","type":"fire""#));
        assert_eq!(StreamMessage::decode(&text).unwrap(), m);
    }

    #[test]
    fn error_and_drop_reports() {
        let m = StreamMessage::Error(ErrorReport {
            cycle: 4,
            message: "dropped 3 messages".into(),
            cmd: None,
            dropped: Some(3),
        });
        assert_eq!(m.encode(), r#"{"cycle":4,"dropped":3,"kind":"error","message":"dropped 3 messages"}"#);
        assert_eq!(StreamMessage::decode(&m.encode()).unwrap(), m);
    }

    #[test]
    fn rejects_unknown_kinds() {
        assert!(matches!(StreamMessage::decode(r#"{"kind":"delta"}"#), Err(DecodeError::Kind)));
        assert!(matches!(StreamMessage::decode(r#"{"cycle":1}"#), Err(DecodeError::Kind)));
        assert!(StreamMessage::decode(r#"{"kind":"ack","cmd":"x","cycle":1,"extra":0}"#).is_err());
    }
}
