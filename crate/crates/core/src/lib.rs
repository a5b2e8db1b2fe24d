//! Block-based audio engine with a worklet-style host bridge.
//!
//! - [`engine`]: the scriptable synthesis engine rendering `ksmps` frames per call.
//! - [`vfs`]: per-engine in-memory file sandbox.
//! - [`bridge`]: control-side node and render-side processor exchanging
//!   messages over bounded queues, plus backend selection.
//! - [`packager`]: embeds binary modules as base64 or byte-array-literal text.
//! - [`hostsim`]: deterministic virtual-time host with dropout accounting,
//!   and an offline WAV renderer.

pub mod bridge;
pub mod engine;
pub mod hostsim;
pub mod packager;
pub mod sample;
pub mod vfs;

pub use engine::{
    ChannelBus, CompileResult, Diagnostic, EngineConfig, EngineError, EventKind, PerformStatus,
    ScoreEvent,
};
pub use sample::Sample;
pub use vfs::{Vfs, VfsError};

/// Engine with the default 64-bit internal sample type.
pub type Engine = engine::EngineInstance<f64>;
/// Engine rendering in 32-bit floating point.
pub type EngineF32 = engine::EngineInstance<f32>;
/// Processor owning a 64-bit engine.
pub type Processor = bridge::ProcessorState<f64>;
/// Control-side node for a 64-bit engine.
pub type EngineNode = bridge::Node<f64>;
