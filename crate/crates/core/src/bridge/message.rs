//! Control and reply messages, and their JSON wire form.
//!
//! On the wire every message is a record `{"type": TAG, "seq": N, "payload": ...}`.
//! Unit variants omit `payload`. Byte payloads travel as arrays of numbers.

use serde::{Deserialize, Serialize};

use crate::engine::{CompileResult, Diagnostic, ScoreEvent};

pub type RequestId = u64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", content = "payload")]
pub enum ControlMessage {
    CompileOrc(String),
    ReadScore(String),
    Event(ScoreEvent),
    SetChannel { name: String, value: f64 },
    GetChannel { name: String, request_id: RequestId },
    Midi { status: u8, d1: u8, d2: u8 },
    WriteFile { path: String, bytes: Vec<u8> },
    ListFiles { prefix: String, request_id: RequestId },
    Start,
    Stop,
    Reset,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", content = "payload")]
pub enum ReplyMessage {
    ChannelValue { request_id: RequestId, value: f64 },
    FileList { request_id: RequestId, entries: Vec<(String, usize)> },
    Console(String),
    CompileResult { ok: bool, diagnostics: Vec<Diagnostic> },
    Finished,
}

impl From<CompileResult> for ReplyMessage {
    fn from(r: CompileResult) -> Self {
        ReplyMessage::CompileResult {
            ok: r.ok,
            diagnostics: r.diagnostics,
        }
    }
}

/// A message stamped with its per-sender sequence number.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Envelope<M> {
    pub seq: u64,
    #[serde(flatten)]
    pub msg: M,
}

pub fn encode<M: Serialize>(env: &Envelope<M>) -> String {
    serde_json::to_string(env).expect("message types serialize infallibly")
}

pub fn decode<M: for<'de> Deserialize<'de>>(text: &str) -> Result<Envelope<M>, serde_json::Error> {
    serde_json::from_str(text)
}
