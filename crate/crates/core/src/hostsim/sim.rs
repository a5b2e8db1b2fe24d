use serde::{Deserialize, Serialize};

use crate::bridge::ProcessorState;
use crate::sample::Sample;

/// Where the audio callback runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThreadMode {
    /// Own thread; main-thread work cannot delay it.
    Dedicated,
    /// Shares the main thread with `main_tasks`.
    Shared,
}

/// A blocking piece of main-thread work, in seconds of virtual time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MainTask {
    pub start: f64,
    pub duration: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HostConfig {
    pub sr: u32,
    /// Frames per callback.
    pub quantum: usize,
    pub mode: ThreadMode,
    pub main_tasks: Vec<MainTask>,
    /// Fixed extra cost added to every callback, seconds.
    pub per_callback_stall: Option<f64>,
}

impl HostConfig {
    pub fn new(sr: u32, mode: ThreadMode) -> Self {
        Self {
            sr,
            quantum: 128,
            mode,
            main_tasks: Vec::new(),
            per_callback_stall: None,
        }
    }

    /// Time budget of one callback, seconds.
    pub fn period(&self) -> f64 {
        self.quantum as f64 / self.sr as f64
    }

    /// Busy intervals of the main thread. Tasks run one at a time in start
    /// order, so overlapping tasks push each other back.
    fn busy_intervals(&self) -> Vec<(f64, f64)> {
        let mut tasks: Vec<MainTask> = self
            .main_tasks
            .iter()
            .copied()
            .filter(|t| t.duration > 0.0)
            .collect();
        tasks.sort_by(|a, b| a.start.total_cmp(&b.start));
        let mut out: Vec<(f64, f64)> = Vec::with_capacity(tasks.len());
        let mut free_at = f64::NEG_INFINITY;
        for t in tasks {
            let begin = t.start.max(free_at);
            let end = begin + t.duration;
            match out.last_mut() {
                Some(last) if last.1 >= begin => last.1 = end,
                _ => out.push((begin, end)),
            }
            free_at = end;
        }
        out
    }
}

/// Returns `config` with one more main-thread task. Negative durations
/// count as zero.
pub fn inject_main_task(config: &HostConfig, start: f64, duration: f64) -> HostConfig {
    let mut c = config.clone();
    c.main_tasks.push(MainTask {
        start,
        duration: duration.max(0.0),
    });
    c
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub callbacks_total: u64,
    pub dropouts: u64,
    /// Indices of callbacks that missed their deadline.
    pub dropped_callbacks: Vec<u64>,
    /// Seconds by which the latest callback missed its deadline.
    pub worst_lateness: f64,
    pub channels: usize,
    /// Interleaved host-scale output; dropped quanta are silent.
    #[serde(skip)]
    pub rendered: Vec<f32>,
}

impl RunReport {
    pub fn dropout_ratio(&self) -> f64 {
        if self.callbacks_total == 0 {
            0.0
        } else {
            self.dropouts as f64 / self.callbacks_total as f64
        }
    }
}

/// Drives `processor` in virtual time for `duration` seconds.
///
/// Callback `k` is released at `k * period` and must finish by
/// `(k + 1) * period`. It starts once released and once the previous
/// callback has finished; in shared mode it also waits out any main-thread
/// task in progress. Its cost is `cost_model(k)` plus the fixed stall. A
/// late callback still advances the engine, but its quantum is replaced by
/// silence.
pub fn run_sim<S: Sample>(
    config: &HostConfig,
    processor: &mut ProcessorState<S>,
    duration: f64,
    mut cost_model: impl FnMut(u64) -> f64,
) -> RunReport {
    let period = config.period();
    let quantum = config.quantum;
    let channels = processor.engine().config().nchnls;
    let blocks = duration * config.sr as f64 / quantum as f64;
    let total = if (blocks - blocks.round()).abs() < 1e-9 {
        blocks.round()
    } else {
        blocks.ceil()
    }
    .max(0.0) as u64;

    let busy = match config.mode {
        ThreadMode::Shared => config.busy_intervals(),
        ThreadMode::Dedicated => Vec::new(),
    };
    let stall = config.per_callback_stall.unwrap_or(0.0).max(0.0);

    let mut planes = vec![vec![0.0f32; quantum]; channels];
    let mut rendered = Vec::with_capacity(total as usize * quantum * channels);
    let mut dropped = Vec::new();
    let mut worst: f64 = 0.0;
    let mut prev_done = 0.0f64;
    let mut next_busy = 0;

    for k in 0..total {
        let release = k as f64 * period;
        let deadline = (k + 1) as f64 * period;
        let mut begin = release.max(prev_done);
        while next_busy < busy.len() {
            let (s, e) = busy[next_busy];
            if e <= begin {
                next_busy += 1;
            } else if s <= begin {
                begin = e;
                next_busy += 1;
            } else {
                break;
            }
        }
        let done = begin + cost_model(k).max(0.0) + stall;
        prev_done = done;

        for p in planes.iter_mut() {
            p.iter_mut().for_each(|s| *s = 0.0);
        }
        {
            let mut outs: Vec<&mut [f32]> = planes.iter_mut().map(|p| p.as_mut_slice()).collect();
            processor.process(&[], &mut outs);
        }

        let late = done > deadline;
        if late {
            dropped.push(k);
            worst = worst.max(done - deadline);
        }
        for i in 0..quantum {
            for p in &planes {
                rendered.push(if late { 0.0 } else { p[i] });
            }
        }
    }

    RunReport {
        callbacks_total: total,
        dropouts: dropped.len() as u64,
        dropped_callbacks: dropped,
        worst_lateness: worst,
        channels,
        rendered,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bridge::{ControlMessage, Envelope};
    use crate::engine::EngineConfig;

    fn processor() -> ProcessorState<f64> {
        let p = ProcessorState::new(EngineConfig::new(44100, 32, 1, 0, 32768.0)).unwrap();
        let port = p.port();
        for (seq, msg) in [
            ControlMessage::CompileOrc("instr 1\n out oscil(16384, 441)\nendin".into()),
            ControlMessage::ReadScore("i 1 0 100".into()),
            ControlMessage::Start,
        ]
        .into_iter()
        .enumerate()
        {
            port.inbox.push(Envelope { seq: seq as u64, msg }).unwrap();
        }
        p
    }

    #[test]
    fn zero_load_no_dropouts() {
        let cfg = HostConfig::new(44100, ThreadMode::Dedicated);
        let r = run_sim(&cfg, &mut processor(), 1.0, |_| 0.0);
        assert_eq!(r.callbacks_total, 345);
        assert_eq!(r.dropouts, 0);
        assert_eq!(r.rendered.len(), 345 * 128);
    }

    #[test]
    fn double_stall_drops_everything() {
        let mut cfg = HostConfig::new(44100, ThreadMode::Dedicated);
        cfg.per_callback_stall = Some(2.0 * cfg.period());
        let r = run_sim(&cfg, &mut processor(), 0.5, |_| 0.0);
        assert_eq!(r.dropouts, r.callbacks_total);
        assert!(r.rendered.iter().all(|&s| s == 0.0));
    }

    #[test]
    fn serialised_tasks() {
        let cfg = HostConfig::new(1000, ThreadMode::Shared);
        let cfg = inject_main_task(&cfg, 0.1, 0.05);
        let cfg = inject_main_task(&cfg, 0.12, 0.05);
        let cfg = inject_main_task(&cfg, 0.5, 0.0);
        let cfg = inject_main_task(&cfg, 0.3, 0.01);
        assert_eq!(cfg.busy_intervals(), vec![(0.1, 0.2), (0.3, 0.31)]);
    }

    #[test]
    fn dedicated_ignores_tasks() {
        let base = HostConfig::new(44100, ThreadMode::Dedicated);
        let loaded = inject_main_task(&base, 0.1, 0.2);
        let a = run_sim(&base, &mut processor(), 0.5, |_| 0.001);
        let b = run_sim(&loaded, &mut processor(), 0.5, |_| 0.001);
        assert_eq!(a, b);
        assert_eq!(a.rendered, b.rendered);
    }
}
