//! A miniature block-based synthesis engine.
//!
//! An [`EngineInstance`] compiles orchestra source, queues score events and
//! renders interleaved audio one `ksmps` block per [`EngineInstance::perform_block`]
//! call. Samples inside the engine are in engine scale, i.e. full scale is
//! `zerodbfs`.

mod bus;
mod config;
mod instance;
pub mod orc;
pub mod phase;
mod score;

pub use bus::ChannelBus;
pub use config::EngineConfig;
pub use instance::{EngineInstance, PerformStatus, MAX_VOICES};
pub use orc::{CompileResult, Diagnostic, Instrument};
pub use score::{parse_score, EventKind, ScoreEvent};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EngineError {
    #[error("invalid engine config: {0}")]
    InvalidConfig(&'static str),
    #[error("channel name must not be empty")]
    EmptyName,
    #[error("invalid event: {0}")]
    InvalidEvent(&'static str),
    #[error("score parse failed: {}", .0.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("; "))]
    Score(Vec<Diagnostic>),
}
