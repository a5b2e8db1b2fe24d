use std::collections::{BTreeMap, VecDeque};

use super::orc::{self, Code, CompileResult, Instrument, Op};
use super::phase;
use super::score::{parse_score, EventKind, ScoreEvent};
use super::{ChannelBus, EngineConfig, EngineError};
use crate::sample::Sample;

/// Upper bound on simultaneously sounding notes. Voice storage is
/// allocated once, up front.
pub const MAX_VOICES: usize = 256;

/// Result of one perform call.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PerformStatus {
    Continue,
    Finished,
}

impl PerformStatus {
    pub fn code(self) -> i32 {
        match self {
            PerformStatus::Continue => 0,
            PerformStatus::Finished => 1,
        }
    }

    /// Any nonzero code means finished.
    pub fn from_code(code: i32) -> Self {
        if code == 0 {
            PerformStatus::Continue
        } else {
            PerformStatus::Finished
        }
    }
}

#[derive(Debug, Clone)]
struct Pending {
    block: u64,
    at: f64,
    event: ScoreEvent,
}

#[derive(Debug, Clone, Copy)]
struct OscState {
    phase: u64,
    freq_bits: u64,
    inc: u64,
}

impl OscState {
    const FRESH: OscState = OscState {
        phase: 0,
        freq_bits: 0x7ff8_0000_0000_0000,
        inc: 0,
    };
}

#[derive(Debug)]
struct Voice {
    instr: u32,
    p2: f64,
    p3: f64,
    pfields: Vec<f64>,
    /// First block in which the voice no longer sounds; `None` while held.
    end_block: Option<u64>,
    /// Frames rendered since activation.
    frame: u64,
    osc: Vec<OscState>,
}

type ConsoleHook = Box<dyn FnMut(&str) + Send>;

/// A self-contained engine: config, compiled program, event queue,
/// channel bus and the interleaved `spin`/`spout` block buffers.
///
/// Single-context: callers hand an instance between threads, never share it.
pub struct EngineInstance<S: Sample> {
    config: EngineConfig,
    program: BTreeMap<u32, Instrument<S>>,
    pending: VecDeque<Pending>,
    voices: Vec<Voice>,
    osc_pool: Vec<Vec<OscState>>,
    osc_capacity: usize,
    bus: ChannelBus<S>,
    spin: Vec<S>,
    spout: Vec<S>,
    /// Whether any voice has written each spout sample this block.
    spout_written: Vec<bool>,
    block_index: u64,
    finished: bool,
    stack: Vec<S>,
    locals: Vec<S>,
    nonfinite: u64,
    console: Vec<String>,
    console_hook: Option<ConsoleHook>,
}

impl<S: Sample> std::fmt::Debug for EngineInstance<S> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("EngineInstance")
            .field("config", &self.config)
            .field("instruments", &self.program.keys().collect::<Vec<_>>())
            .field("pending", &self.pending.len())
            .field("voices", &self.voices.len())
            .field("block_index", &self.block_index)
            .field("finished", &self.finished)
            .finish()
    }
}

impl<S: Sample> EngineInstance<S> {
    pub fn new(config: EngineConfig) -> Result<Self, EngineError> {
        config.validate()?;
        Ok(Self {
            config,
            program: BTreeMap::new(),
            pending: VecDeque::new(),
            voices: Vec::with_capacity(MAX_VOICES),
            osc_pool: (0..MAX_VOICES).map(|_| Vec::new()).collect(),
            osc_capacity: 0,
            bus: ChannelBus::new(),
            spin: vec![S::zero(); config.spin_len()],
            spout: vec![S::zero(); config.spout_len()],
            spout_written: vec![false; config.spout_len()],
            block_index: 0,
            finished: false,
            stack: Vec::new(),
            locals: Vec::new(),
            nonfinite: 0,
            console: Vec::new(),
            console_hook: None,
        })
    }

    pub fn config(&self) -> &EngineConfig {
        &self.config
    }

    pub fn spout(&self) -> &[S] {
        &self.spout
    }

    pub fn spin(&self) -> &[S] {
        &self.spin
    }

    /// Input block consumed by the next perform call.
    pub fn spin_mut(&mut self) -> &mut [S] {
        &mut self.spin
    }

    pub fn block_index(&self) -> u64 {
        self.block_index
    }

    /// Engine time in seconds at the start of the next block.
    pub fn time(&self) -> f64 {
        self.block_index as f64 * self.config.block_seconds()
    }

    pub fn is_finished(&self) -> bool {
        self.finished
    }

    /// Number of output samples replaced by zero because they were not finite.
    pub fn nonfinite_count(&self) -> u64 {
        self.nonfinite
    }

    pub fn active_voices(&self) -> usize {
        self.voices.len()
    }

    pub fn pending_events(&self) -> usize {
        self.pending.len()
    }

    pub fn instrument(&self, number: u32) -> Option<&Instrument<S>> {
        self.program.get(&number)
    }

    pub fn instruments(&self) -> impl Iterator<Item = &Instrument<S>> {
        self.program.values()
    }

    /// Routes console output to `hook` instead of the internal buffer.
    pub fn set_console_hook(&mut self, hook: impl FnMut(&str) + Send + 'static) {
        self.console_hook = Some(Box::new(hook));
    }

    /// Takes buffered console lines.
    pub fn drain_console(&mut self) -> Vec<String> {
        std::mem::take(&mut self.console)
    }

    fn say(&mut self, line: String) {
        match self.console_hook.as_mut() {
            Some(hook) => hook(&line),
            None => self.console.push(line),
        }
    }

    /// Compiles `source`, merging its instruments into the program by
    /// number. A failed compile leaves the program untouched.
    pub fn compile_orc(&mut self, source: &str) -> CompileResult {
        match orc::compile::<S>(source, &self.config) {
            Ok(instruments) => {
                let numbers: Vec<u32> = instruments.iter().map(|i| i.number()).collect();
                for inst in instruments {
                    self.reserve_for(&inst);
                    self.program.insert(inst.number(), inst);
                }
                let list = numbers.iter().map(u32::to_string).collect::<Vec<_>>().join(", ");
                self.say(format!("compiled {} instrument(s): {list}", numbers.len()));
                CompileResult {
                    ok: true,
                    instruments: numbers,
                    diagnostics: Vec::new(),
                }
            }
            Err(diagnostics) => {
                for d in &diagnostics {
                    self.say(format!("error: {d}"));
                }
                CompileResult {
                    ok: false,
                    instruments: Vec::new(),
                    diagnostics,
                }
            }
        }
    }

    // Grows every scratch buffer the render path touches so that rendering
    // with this instrument never reallocates.
    fn reserve_for(&mut self, inst: &Instrument<S>) {
        if inst.max_stack > self.stack.capacity() {
            self.stack.reserve_exact(inst.max_stack - self.stack.len());
        }
        if inst.n_locals > self.locals.len() {
            self.locals.resize(inst.n_locals, S::zero());
        }
        if inst.n_osc > self.osc_capacity {
            self.osc_capacity = inst.n_osc;
            for buf in self.osc_pool.iter_mut() {
                buf.reserve_exact(inst.n_osc);
            }
            for v in self.voices.iter_mut() {
                v.osc.reserve_exact(inst.n_osc.saturating_sub(v.osc.len()));
            }
        }
    }

    /// Parses score text and queues every event. Nothing is queued if any
    /// line fails to parse.
    pub fn read_score(&mut self, text: &str) -> Result<Vec<ScoreEvent>, EngineError> {
        let events = parse_score(text).map_err(EngineError::Score)?;
        for ev in &events {
            self.send_event(ev.clone())?;
        }
        Ok(events)
    }

    /// Queues an event; its start is relative to the current engine time
    /// and is rounded down to a block boundary.
    pub fn send_event(&mut self, event: ScoreEvent) -> Result<(), EngineError> {
        if !(event.start.is_finite() && event.start >= 0.0) {
            return Err(EngineError::InvalidEvent("start must be finite and >= 0"));
        }
        if event.kind == EventKind::Note && !event.dur.is_finite() {
            return Err(EngineError::InvalidEvent("duration must be finite"));
        }
        let block = self.block_index + self.config.blocks_floor(event.start);
        let at = self.time() + event.start;
        let idx = self.pending.partition_point(|p| p.block <= block);
        self.pending.insert(idx, Pending { block, at, event });
        Ok(())
    }

    pub fn set_channel(&mut self, name: &str, value: S) -> Result<(), EngineError> {
        self.bus.set(name, value)
    }

    pub fn get_channel(&self, name: &str) -> Result<S, EngineError> {
        self.bus.get(name)
    }

    pub fn bus(&self) -> &ChannelBus<S> {
        &self.bus
    }

    /// Clears program, events, voices, bus and buffers. Config is kept.
    pub fn reset(&mut self) {
        self.program.clear();
        self.pending.clear();
        while let Some(v) = self.voices.pop() {
            self.osc_pool.push(v.osc);
        }
        self.bus.clear();
        self.spin.iter_mut().for_each(|s| *s = S::zero());
        self.spout.iter_mut().for_each(|s| *s = S::zero());
        self.block_index = 0;
        self.finished = false;
        self.nonfinite = 0;
        self.console.clear();
    }

    /// Renders one block into `spout`, consuming `spin`.
    ///
    /// Once an end event is reached this returns `Finished` forever and
    /// leaves `spout` untouched.
    pub fn perform_block(&mut self) -> PerformStatus {
        if self.finished {
            return PerformStatus::Finished;
        }
        let now = self.block_index;

        let mut i = 0;
        while i < self.voices.len() {
            if self.voices[i].end_block.is_some_and(|end| end <= now) {
                let v = self.voices.remove(i);
                self.osc_pool.push(v.osc);
            } else {
                i += 1;
            }
        }

        while self.pending.front().is_some_and(|p| p.block <= now) {
            let Pending { at, event, .. } = self.pending.pop_front().unwrap();
            match event.kind {
                EventKind::End => {
                    self.finished = true;
                    return PerformStatus::Finished;
                }
                EventKind::Note if event.instr < 0 => self.release(event),
                EventKind::Note => self.activate(at, event),
            }
        }

        for inst in self.program.values_mut() {
            for (slot, name) in inst.chan_cache.iter_mut().zip(inst.channels.iter()) {
                *slot = self.bus.peek(name);
            }
        }

        self.spout.iter_mut().for_each(|s| *s = S::zero());
        self.spout_written.iter_mut().for_each(|w| *w = false);
        let ctx = RenderCtx {
            config: &self.config,
            spin: &self.spin,
        };
        for voice in self.voices.iter_mut() {
            let Some(inst) = self.program.get(&voice.instr) else {
                continue;
            };
            if voice.osc.len() != inst.n_osc {
                voice.osc.resize(inst.n_osc, OscState::FRESH);
            }
            ctx.render_voice(
                voice,
                inst,
                &mut self.stack,
                &mut self.locals,
                &mut self.spout,
                &mut self.spout_written,
            );
        }

        for s in self.spout.iter_mut() {
            if !s.is_finite() {
                *s = S::zero();
                self.nonfinite += 1;
            }
        }

        self.block_index += 1;
        PerformStatus::Continue
    }

    fn activate(&mut self, at: f64, event: ScoreEvent) {
        let number = event.instr as u32;
        if !self.program.contains_key(&number) {
            self.say(format!("warning: instr {number} not defined, note dropped"));
            return;
        }
        if self.voices.len() >= MAX_VOICES {
            self.say(format!("warning: voice limit {MAX_VOICES} reached, instr {number} dropped"));
            return;
        }
        let end_block = (event.dur >= 0.0).then(|| self.block_index + self.config.blocks_ceil(event.dur));
        let mut osc = self.osc_pool.pop().unwrap_or_default();
        osc.clear();
        self.voices.push(Voice {
            instr: number,
            p2: at,
            p3: event.dur,
            pfields: event.pfields,
            end_block,
            frame: 0,
            osc,
        });
    }

    fn release(&mut self, event: ScoreEvent) {
        let number = event.instr.unsigned_abs();
        let key = event.pfields.get(1).map(|p| p.to_bits());
        let found = self.voices.iter().position(|v| {
            v.instr == number
                && v.end_block.is_none()
                && key.is_none_or(|k| v.pfields.get(1).map(|p| p.to_bits()) == Some(k))
        });
        if let Some(idx) = found {
            let v = self.voices.remove(idx);
            self.osc_pool.push(v.osc);
        }
    }

    /// Compiles `orc`, then reads `sco`, both in one call. Convenience for
    /// hosts that load a whole piece at once.
    pub fn load(&mut self, orc: &str, sco: &str) -> Result<CompileResult, EngineError> {
        let result = self.compile_orc(orc);
        if result.ok {
            self.read_score(sco)?;
        }
        Ok(result)
    }
}

struct RenderCtx<'a, S> {
    config: &'a EngineConfig,
    spin: &'a [S],
}

impl<S: Sample> RenderCtx<'_, S> {
    fn render_voice(
        &self,
        voice: &mut Voice,
        inst: &Instrument<S>,
        stack: &mut Vec<S>,
        locals: &mut [S],
        spout: &mut [S],
        written: &mut [bool],
    ) {
        let nchnls = self.config.nchnls;
        for frame in 0..self.config.ksmps {
            for code in &inst.code {
                match code {
                    Code::Assign(slot, ops) => {
                        let v = self.eval(ops, voice, inst, frame, stack, locals);
                        locals[*slot] = v;
                    }
                    Code::Out(channels) => {
                        for (ch, ops) in channels.iter().enumerate() {
                            let v = self.eval(ops, voice, inst, frame, stack, locals);
                            let idx = frame * nchnls + ch;
                            // Assigning the first contribution keeps -0.0 intact.
                            if written[idx] {
                                spout[idx] += v;
                            } else {
                                spout[idx] = v;
                                written[idx] = true;
                            }
                        }
                    }
                }
            }
            voice.frame += 1;
        }
    }

    #[inline]
    fn eval(
        &self,
        ops: &[Op<S>],
        voice: &mut Voice,
        inst: &Instrument<S>,
        frame: usize,
        stack: &mut Vec<S>,
        locals: &[S],
    ) -> S {
        stack.clear();
        for op in ops {
            let v = match op {
                Op::Const(c) => *c,
                Op::PField(n) => S::from_real(match n {
                    1 => voice.instr as f64,
                    2 => voice.p2,
                    3 => voice.p3,
                    n => voice.pfields.get(n - 4).copied().unwrap_or(0.0),
                }),
                Op::Local(i) => locals[*i],
                Op::In(ch) => {
                    let n = self.config.nchnls_i;
                    if *ch < n {
                        self.spin[frame * n + ch]
                    } else {
                        S::zero()
                    }
                }
                Op::Chan(i) => inst.chan_cache[*i],
                Op::Neg => {
                    let a = stack.pop().unwrap();
                    -a
                }
                Op::Add | Op::Sub | Op::Mul | Op::Div => {
                    let b = stack.pop().unwrap();
                    let a = stack.pop().unwrap();
                    match op {
                        Op::Add => a + b,
                        Op::Sub => a - b,
                        Op::Mul => a * b,
                        _ => a / b,
                    }
                }
                Op::Oscil(slot) => {
                    let freq = stack.pop().unwrap();
                    let amp = stack.pop().unwrap();
                    let st = &mut voice.osc[*slot];
                    let f = freq.to_real();
                    if f.to_bits() != st.freq_bits {
                        st.freq_bits = f.to_bits();
                        st.inc = phase::increment(f, self.config.sr);
                    }
                    let angle = phase::to_cycles(st.phase) * std::f64::consts::TAU;
                    st.phase = st.phase.wrapping_add(st.inc);
                    amp * S::from_real(angle.sin())
                }
                Op::Line => {
                    let to = stack.pop().unwrap();
                    let dur = stack.pop().unwrap();
                    let from = stack.pop().unwrap();
                    let t = voice.frame as f64 / self.config.sr as f64;
                    let d = dur.to_real();
                    if d <= 0.0 || t >= d {
                        to
                    } else {
                        from + (to - from) * S::from_real(t / d)
                    }
                }
            };
            stack.push(v);
        }
        stack.pop().unwrap_or_else(S::zero)
    }
}
