use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use super::{wav, SimError};
use crate::engine::{EngineConfig, EngineInstance, PerformStatus};
use crate::sample::Sample;

/// Engine-scale output of an offline run, interleaved.
#[derive(Debug, Clone)]
pub struct OfflineRender<S> {
    pub config: EngineConfig,
    pub frames: usize,
    pub samples: Vec<S>,
}

impl<S: Sample> OfflineRender<S> {
    /// Output divided by `zerodbfs`, as the host would see it.
    pub fn host_samples(&self) -> Vec<f32> {
        let z = S::from_real(self.config.zerodbfs);
        self.samples.iter().map(|&s| (s / z).to_host()).collect()
    }
}

/// Renders `duration` seconds, rounded up to whole blocks, by calling
/// `perform_block` directly. Blocks after the engine finishes are silent.
pub fn render_blocks<S: Sample>(
    orc: &str,
    sco: &str,
    config: EngineConfig,
    duration: f64,
) -> Result<OfflineRender<S>, SimError> {
    let mut engine = EngineInstance::<S>::new(config)?;
    let result = engine.compile_orc(orc);
    if !result.ok {
        return Err(SimError::CompileFailed(result.diagnostics));
    }
    engine.read_score(sco)?;
    let blocks = config.blocks_ceil(duration) as usize;
    let mut samples = Vec::with_capacity(blocks * config.spout_len());
    for _ in 0..blocks {
        match engine.perform_block() {
            PerformStatus::Continue => samples.extend_from_slice(engine.spout()),
            PerformStatus::Finished => samples.resize(samples.len() + config.spout_len(), S::zero()),
        }
    }
    Ok(OfflineRender {
        config,
        frames: blocks * config.ksmps,
        samples,
    })
}

/// Renders offline and writes a 32-bit float WAV file to `out_path`.
pub fn render_offline(
    orc: &str,
    sco: &str,
    config: EngineConfig,
    duration: f64,
    out_path: &Path,
) -> Result<OfflineRender<f64>, SimError> {
    let render = render_blocks::<f64>(orc, sco, config, duration)?;
    let file = BufWriter::new(File::create(out_path)?);
    wav::write_wav_f32(file, config.sr, config.nchnls as u16, &render.host_samples())?;
    Ok(render)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn silent_second_is_whole_blocks() {
        let c = EngineConfig::new(44100, 32, 1, 0, 32768.0);
        let r = render_blocks::<f64>("", "", c, 1.0).unwrap();
        assert_eq!(r.frames, 44128);
        assert_eq!(r.samples.len(), 44128);
        assert!(r.samples.iter().all(|&s| s == 0.0));
    }

    #[test]
    fn compile_failure_reported() {
        let c = EngineConfig::default();
        let err = render_blocks::<f64>("instr 1\n out nope\nendin", "", c, 0.1).unwrap_err();
        assert!(matches!(err, SimError::CompileFailed(d) if d[0].line == 2));
    }

    #[test]
    fn finished_blocks_are_silent() {
        let c = EngineConfig::new(100, 10, 1, 0, 1.0);
        let r = render_blocks::<f64>("instr 1\n out 1\nendin", "i 1 0 10\ne 0.5", c, 1.0).unwrap();
        assert!(r.samples[..50].iter().all(|&s| s == 1.0));
        assert!(r.samples[50..].iter().all(|&s| s == 0.0));
    }
}
