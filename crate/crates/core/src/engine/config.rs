use serde::{Deserialize, Serialize};

use super::EngineError;

/// Engine configuration. Fixed for the lifetime of an engine instance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EngineConfig {
    /// Sample rate in Hz.
    pub sr: u32,
    /// Frames rendered per perform call.
    pub ksmps: usize,
    /// Output channel count.
    pub nchnls: usize,
    /// Input channel count, may be zero.
    pub nchnls_i: usize,
    /// Engine-scale amplitude of full scale. Powers of two keep host
    /// scaling exact.
    pub zerodbfs: f64,
}

impl Default for EngineConfig {
    fn default() -> Self {
        Self {
            sr: 44100,
            ksmps: 32,
            nchnls: 2,
            nchnls_i: 1,
            zerodbfs: 32768.0,
        }
    }
}

impl EngineConfig {
    pub fn new(sr: u32, ksmps: usize, nchnls: usize, nchnls_i: usize, zerodbfs: f64) -> Self {
        Self {
            sr,
            ksmps,
            nchnls,
            nchnls_i,
            zerodbfs,
        }
    }

    pub fn validate(&self) -> Result<(), EngineError> {
        if self.sr < 1 {
            return Err(EngineError::InvalidConfig("sr must be >= 1"));
        }
        if self.ksmps < 1 {
            return Err(EngineError::InvalidConfig("ksmps must be >= 1"));
        }
        if self.nchnls < 1 {
            return Err(EngineError::InvalidConfig("nchnls must be >= 1"));
        }
        if !(self.zerodbfs.is_finite() && self.zerodbfs > 0.0) {
            return Err(EngineError::InvalidConfig("zerodbfs must be positive and finite"));
        }
        Ok(())
    }

    /// Length of the interleaved output block buffer.
    pub fn spout_len(&self) -> usize {
        self.ksmps * self.nchnls
    }

    /// Length of the interleaved input block buffer.
    pub fn spin_len(&self) -> usize {
        self.ksmps * self.nchnls_i
    }

    /// Duration of one block in seconds.
    pub fn block_seconds(&self) -> f64 {
        self.ksmps as f64 / self.sr as f64
    }

    /// Number of whole blocks needed to cover `seconds`, rounded up.
    pub fn blocks_ceil(&self, seconds: f64) -> u64 {
        let blocks = seconds * self.sr as f64 / self.ksmps as f64;
        snap(blocks).ceil().max(0.0) as u64
    }

    /// Number of whole blocks elapsed at `seconds`, rounded down.
    pub fn blocks_floor(&self, seconds: f64) -> u64 {
        let blocks = seconds * self.sr as f64 / self.ksmps as f64;
        snap(blocks).floor().max(0.0) as u64
    }
}

// Values within a few ulps of an integer count as that integer, so that
// `0.3 s` at a rate that divides it evenly does not land one block off.
fn snap(x: f64) -> f64 {
    let r = x.round();
    if (x - r).abs() <= 1e-9 * r.abs().max(1.0) {
        r
    } else {
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_each_bound() {
        let ok = EngineConfig::default();
        assert!(ok.validate().is_ok());
        for bad in [
            EngineConfig { sr: 0, ..ok },
            EngineConfig { ksmps: 0, ..ok },
            EngineConfig { nchnls: 0, ..ok },
            EngineConfig { zerodbfs: 0.0, ..ok },
            EngineConfig { zerodbfs: -1.0, ..ok },
            EngineConfig { zerodbfs: f64::NAN, ..ok },
        ] {
            assert!(matches!(bad.validate(), Err(EngineError::InvalidConfig(_))), "{bad:?}");
        }
        assert!(EngineConfig { nchnls_i: 0, ..ok }.validate().is_ok());
    }

    #[test]
    fn block_rounding() {
        let c = EngineConfig::new(44100, 32, 1, 0, 1.0);
        assert_eq!(c.blocks_ceil(1.0), 1379);
        assert_eq!(c.blocks_floor(1.0), 1378);
        let c = EngineConfig::new(44100, 4, 1, 0, 1.0);
        assert_eq!(c.blocks_ceil(1.0), 11025);
        assert_eq!(c.blocks_floor(1.0), 11025);
        let c = EngineConfig::new(10, 1, 1, 0, 1.0);
        assert_eq!(c.blocks_floor(0.3), 3);
        assert_eq!(c.blocks_ceil(0.3), 3);
    }
}
