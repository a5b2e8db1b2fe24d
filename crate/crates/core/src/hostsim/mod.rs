//! Virtual-time audio host and offline renderer.

mod offline;
mod sim;
pub mod wav;

pub use offline::{render_blocks, render_offline, OfflineRender};
pub use sim::{inject_main_task, run_sim, HostConfig, MainTask, RunReport, ThreadMode};

use crate::engine::{Diagnostic, EngineError};

#[derive(Debug, thiserror::Error)]
pub enum SimError {
    #[error("orchestra failed to compile: {}", .0.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("; "))]
    CompileFailed(Vec<Diagnostic>),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}
