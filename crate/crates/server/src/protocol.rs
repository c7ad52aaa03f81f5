//! Newline-delimited JSON messages exchanged with a UI.
//!
//! Every message is one JSON object carrying `"v": 1` and a `"type"`.
//! Inbound: `frame_in` (a trace record) and `config_in` (a settings patch).
//! Outbound: the session events, tagged `cursor_out`, `dwell_out`,
//! `selection_out`, `dispatch_out` and `error_out`.

use carecall_core::session::{ConfigPatch, Session, SessionEvent};
use carecall_core::trace::TraceRecord;
use serde::{Deserialize, Serialize};
use serde_json::Value;

pub const VERSION: u64 = 1;

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "type")]
pub enum Inbound {
    #[serde(rename = "frame_in")]
    Frame(TraceRecord),
    #[serde(rename = "config_in")]
    Config(ConfigPatch),
}

#[derive(Serialize)]
struct Outbound<'a> {
    v: u64,
    #[serde(flatten)]
    event: &'a SessionEvent,
}

pub fn encode(event: &SessionEvent) -> String {
    serde_json::to_string(&Outbound { v: VERSION, event }).expect("events serialize")
}

pub fn encode_inbound_frame(record: &TraceRecord) -> String {
    let mut value = serde_json::to_value(record).expect("records serialize");
    if let Value::Object(map) = &mut value {
        map.insert("v".into(), VERSION.into());
        map.insert("type".into(), "frame_in".into());
    }
    value.to_string()
}

pub fn encode_inbound_config(patch: &ConfigPatch) -> String {
    let mut value = serde_json::to_value(patch).expect("patches serialize");
    if let Value::Object(map) = &mut value {
        map.insert("v".into(), VERSION.into());
        map.insert("type".into(), "config_in".into());
    }
    value.to_string()
}

pub fn decode(line: &str) -> Result<Inbound, String> {
    let mut value: Value = serde_json::from_str(line).map_err(|e| format!("malformed message: {e}"))?;
    let map = value.as_object_mut().ok_or("malformed message: expected a JSON object")?;
    match map.remove("v") {
        Some(v) if v.as_u64() == Some(VERSION) => {}
        Some(v) => return Err(format!("unsupported protocol version {v}")),
        None => return Err("missing protocol version \"v\"".into()),
    }
    serde_json::from_value(value).map_err(|e| format!("malformed message: {e}"))
}

fn error(frame_index: Option<u64>, reason: String) -> SessionEvent {
    SessionEvent::Error { frame_index, reason }
}

/// Applies one inbound line to `session` and returns the encoded replies.
/// Blank lines are ignored; anything unparseable yields one `error_out`.
pub fn respond(session: &mut Session, line: &str) -> Vec<String> {
    let line = line.trim();
    if line.is_empty() {
        return Vec::new();
    }
    let events = match decode(line) {
        Ok(Inbound::Frame(record)) => session.process_record(&record),
        Ok(Inbound::Config(patch)) => match session.apply_patch(&patch) {
            Ok(()) => Vec::new(),
            Err(e) => vec![error(None, e.to_string())],
        },
        Err(reason) => vec![error(None, reason)],
    };
    events.iter().map(encode).collect()
}
