//! Control/render bridge.
//!
//! A [`Node`] lives in the control context and a [`ProcessorState`] in the
//! render context. They share exactly two bounded lock-free queues:
//! [`ControlMessage`]s flow to the processor and [`ReplyMessage`]s flow
//! back. The processor applies messages only at the start of a
//! [`process`](ProcessorState::process) call, so audio never observes a
//! half-applied message.

mod backend;
pub mod message;
mod midi;
mod node;
mod processor;

pub use backend::{select_backend, BackendKind, HostCapabilities};
pub use message::{ControlMessage, Envelope, ReplyMessage, RequestId};
pub use midi::{key_to_hz, midi_to_event};
pub use node::{
    create_node, AudioContext, EngineFacade, Node, NodeId, NodeOptions, DEFAULT_REPLY_TIMEOUT,
};
pub use processor::{ProcessorPort, ProcessorState, INBOX_CAPACITY, OUTBOX_CAPACITY};

use crate::engine::EngineError;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum BridgeError {
    #[error("requested backend is not supported by this host")]
    OverrideUnsupported,
    #[error("processor inbox is full")]
    QueueFull,
    #[error("no reply before the deadline")]
    Timeout,
    #[error("node has no inline processor")]
    NotInline,
    #[error(transparent)]
    Engine(#[from] EngineError),
}
