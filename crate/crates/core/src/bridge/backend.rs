use serde::{Deserialize, Serialize};

use super::BridgeError;

/// Where the processor runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BackendKind {
    /// Dedicated render context; messages cross asynchronously.
    Worklet,
    /// Inline in the control context, driven by a synchronous callback.
    ScriptProcessor,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct HostCapabilities {
    pub worklet_available: bool,
    pub secure_context: bool,
}

impl HostCapabilities {
    pub fn new(worklet_available: bool, secure_context: bool) -> Self {
        Self {
            worklet_available,
            secure_context,
        }
    }
}

/// Picks the worklet backend when the host can load it, otherwise the
/// script processor fallback. An explicit override wins when supportable.
pub fn select_backend(
    caps: HostCapabilities,
    requested: Option<BackendKind>,
) -> Result<BackendKind, BridgeError> {
    let worklet_ok = caps.worklet_available && caps.secure_context;
    match requested {
        Some(BackendKind::Worklet) if !worklet_ok => Err(BridgeError::OverrideUnsupported),
        Some(kind) => Ok(kind),
        None if worklet_ok => Ok(BackendKind::Worklet),
        None => Ok(BackendKind::ScriptProcessor),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults() {
        assert_eq!(
            select_backend(HostCapabilities::new(true, true), None).unwrap(),
            BackendKind::Worklet
        );
        assert_eq!(
            select_backend(HostCapabilities::new(true, false), None).unwrap(),
            BackendKind::ScriptProcessor
        );
        assert!(matches!(
            select_backend(HostCapabilities::new(false, true), Some(BackendKind::Worklet)),
            Err(BridgeError::OverrideUnsupported)
        ));
        assert_eq!(
            select_backend(HostCapabilities::new(true, true), Some(BackendKind::ScriptProcessor)).unwrap(),
            BackendKind::ScriptProcessor
        );
    }
}
