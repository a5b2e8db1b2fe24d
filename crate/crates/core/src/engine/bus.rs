use std::collections::HashMap;

use super::EngineError;

/// Named control-rate channels shared between the host and instruments.
#[derive(Debug, Clone, Default)]
pub struct ChannelBus<S> {
    channels: HashMap<String, S>,
}

impl<S: Copy + Default> ChannelBus<S> {
    pub fn new() -> Self {
        Self {
            channels: HashMap::new(),
        }
    }

    pub fn set(&mut self, name: &str, value: S) -> Result<(), EngineError> {
        if name.is_empty() {
            return Err(EngineError::EmptyName);
        }
        match self.channels.get_mut(name) {
            Some(v) => *v = value,
            None => {
                self.channels.insert(name.to_owned(), value);
            }
        }
        Ok(())
    }

    /// Unset channels read as zero.
    pub fn get(&self, name: &str) -> Result<S, EngineError> {
        if name.is_empty() {
            return Err(EngineError::EmptyName);
        }
        Ok(self.peek(name))
    }

    pub(crate) fn peek(&self, name: &str) -> S {
        self.channels.get(name).copied().unwrap_or_default()
    }

    pub fn len(&self) -> usize {
        self.channels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.channels.is_empty()
    }

    pub fn clear(&mut self) {
        self.channels.clear();
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_and_round_trip() {
        let mut bus = ChannelBus::<f64>::new();
        assert_eq!(bus.get("freq").unwrap(), 0.0);
        bus.set("freq", 440.0).unwrap();
        assert_eq!(bus.get("freq").unwrap(), 440.0);
        assert!(matches!(bus.set("", 1.0), Err(EngineError::EmptyName)));
        assert!(matches!(bus.get(""), Err(EngineError::EmptyName)));
    }
}
