use std::sync::Arc;

use crossbeam_queue::ArrayQueue;

use super::message::{ControlMessage, Envelope, ReplyMessage};
use super::midi::midi_to_event;
use super::BridgeError;
use crate::engine::{EngineConfig, EngineError, EngineInstance, PerformStatus};
use crate::sample::Sample;
use crate::vfs::Vfs;

/// Capacity of the control-to-render queue.
pub const INBOX_CAPACITY: usize = 1024;
/// Capacity of the render-to-control queue.
pub const OUTBOX_CAPACITY: usize = 4096;

pub(crate) type Inbox = Arc<ArrayQueue<Envelope<ControlMessage>>>;
pub(crate) type Outbox = Arc<ArrayQueue<Envelope<ReplyMessage>>>;

/// Control-side ends of a processor's two queues.
#[derive(Debug, Clone)]
pub struct ProcessorPort {
    pub(crate) inbox: Inbox,
    pub(crate) outbox: Outbox,
}

impl ProcessorPort {
    /// Enqueues a control message for the next `process` call.
    pub fn send(&self, env: Envelope<ControlMessage>) -> Result<(), BridgeError> {
        self.inbox.push(env).map_err(|_| BridgeError::QueueFull)
    }

    /// Takes the oldest pending reply.
    pub fn recv(&self) -> Option<Envelope<ReplyMessage>> {
        self.outbox.pop()
    }
}

/// Render-context half of the bridge. Owns the engine and its file
/// sandbox; reachable from the control context only through its queues.
///
/// `cnt`, `status` and `running` persist across [`process`](Self::process)
/// calls.
pub struct ProcessorState<S: Sample> {
    engine: EngineInstance<S>,
    vfs: Vfs,
    cnt: usize,
    status: PerformStatus,
    running: bool,
    inbox: Inbox,
    outbox: Outbox,
    reply_seq: u64,
    last_applied: Option<u64>,
    dropped_replies: u64,
    finished_reported: bool,
}

impl<S: Sample> std::fmt::Debug for ProcessorState<S> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ProcessorState")
            .field("engine", &self.engine)
            .field("cnt", &self.cnt)
            .field("status", &self.status)
            .field("running", &self.running)
            .finish()
    }
}

impl<S: Sample> ProcessorState<S> {
    /// Creates the engine. The processor starts stopped, with `cnt = ksmps`
    /// so the first running frame performs immediately.
    pub fn new(config: EngineConfig) -> Result<Self, EngineError> {
        let engine = EngineInstance::new(config)?;
        Ok(Self {
            cnt: config.ksmps,
            engine,
            vfs: Vfs::new(),
            status: PerformStatus::Continue,
            running: false,
            inbox: Arc::new(ArrayQueue::new(INBOX_CAPACITY)),
            outbox: Arc::new(ArrayQueue::new(OUTBOX_CAPACITY)),
            reply_seq: 0,
            last_applied: None,
            dropped_replies: 0,
            finished_reported: false,
        })
    }

    pub fn port(&self) -> ProcessorPort {
        ProcessorPort {
            inbox: Arc::clone(&self.inbox),
            outbox: Arc::clone(&self.outbox),
        }
    }

    pub fn engine(&self) -> &EngineInstance<S> {
        &self.engine
    }

    pub fn vfs(&self) -> &Vfs {
        &self.vfs
    }

    pub fn cnt(&self) -> usize {
        self.cnt
    }

    pub fn status(&self) -> PerformStatus {
        self.status
    }

    pub fn is_running(&self) -> bool {
        self.running
    }

    /// Sequence number of the last message applied.
    pub fn last_applied_seq(&self) -> Option<u64> {
        self.last_applied
    }

    /// Replies discarded because the control side stopped draining.
    pub fn dropped_replies(&self) -> u64 {
        self.dropped_replies
    }

    fn reply(&mut self, msg: ReplyMessage) {
        let env = Envelope {
            seq: self.reply_seq,
            msg,
        };
        self.reply_seq += 1;
        if self.outbox.push(env).is_err() {
            self.dropped_replies += 1;
        }
    }

    fn forward_console(&mut self) {
        for line in self.engine.drain_console() {
            self.reply(ReplyMessage::Console(line));
        }
    }

    /// Drains the inbox and applies every message in arrival order.
    pub fn apply_messages(&mut self) {
        while let Some(env) = self.inbox.pop() {
            self.last_applied = Some(env.seq);
            self.apply(env.msg);
        }
        self.forward_console();
    }

    fn apply(&mut self, msg: ControlMessage) {
        match msg {
            ControlMessage::CompileOrc(src) => {
                let result = self.engine.compile_orc(&src);
                self.forward_console();
                self.reply(result.into());
            }
            ControlMessage::ReadScore(text) => {
                if let Err(e) = self.engine.read_score(&text) {
                    self.reply(ReplyMessage::Console(format!("error: {e}")));
                }
            }
            ControlMessage::Event(ev) => {
                if let Err(e) = self.engine.send_event(ev) {
                    self.reply(ReplyMessage::Console(format!("error: {e}")));
                }
            }
            ControlMessage::SetChannel { name, value } => {
                if let Err(e) = self.engine.set_channel(&name, S::from_real(value)) {
                    self.reply(ReplyMessage::Console(format!("error: {e}")));
                }
            }
            ControlMessage::GetChannel { name, request_id } => {
                let value = match self.engine.get_channel(&name) {
                    Ok(v) => v.to_real(),
                    Err(e) => {
                        self.reply(ReplyMessage::Console(format!("error: {e}")));
                        0.0
                    }
                };
                self.reply(ReplyMessage::ChannelValue { request_id, value });
            }
            ControlMessage::Midi { status, d1, d2 } => {
                if let Some(ev) = midi_to_event(status, d1, d2) {
                    if let Err(e) = self.engine.send_event(ev) {
                        self.reply(ReplyMessage::Console(format!("error: {e}")));
                    }
                }
            }
            ControlMessage::WriteFile { path, bytes } => {
                if let Err(e) = self.vfs.write(&path, bytes) {
                    self.reply(ReplyMessage::Console(format!("error: {e}")));
                }
            }
            ControlMessage::ListFiles { prefix, request_id } => {
                let entries = self.vfs.list(&prefix);
                self.reply(ReplyMessage::FileList { request_id, entries });
            }
            ControlMessage::Start => self.running = true,
            ControlMessage::Stop => self.running = false,
            ControlMessage::Reset => {
                self.engine.reset();
                self.cnt = self.engine.config().ksmps;
                self.status = PerformStatus::Continue;
                self.finished_reported = false;
            }
        }
    }

    /// Renders one host buffer.
    ///
    /// `outputs` holds one slice per output channel, all of the same
    /// length; `inputs` one slice per input channel. The engine block and
    /// the host buffer need not align: the engine performs whenever its
    /// current block is used up, so input reaches the engine one block
    /// after it arrives. Once the engine finishes, the remaining frames
    /// are zero. Always returns `true`.
    pub fn process(&mut self, inputs: &[&[f32]], outputs: &mut [&mut [f32]]) -> bool {
        self.apply_messages();
        if !self.running {
            return true;
        }
        let Some(buffer_len) = outputs.first().map(|c| c.len()) else {
            return true;
        };
        let cfg = *self.engine.config();
        let ksmps = cfg.ksmps;
        let nchnls = cfg.nchnls;
        let nchnls_i = cfg.nchnls_i;
        let zerodbfs = S::from_real(cfg.zerodbfs);
        let mut cnt = self.cnt;
        let mut status = self.status;

        for i in 0..buffer_len {
            if cnt == ksmps && status == PerformStatus::Continue {
                status = self.engine.perform_block();
                cnt = 0;
            }
            let live = status == PerformStatus::Continue;
            if live {
                let spin = self.engine.spin_mut();
                for ch in 0..nchnls_i {
                    let x = inputs.get(ch).and_then(|c| c.get(i)).copied().unwrap_or(0.0);
                    spin[cnt * nchnls_i + ch] = S::from_host(x) * zerodbfs;
                }
            }
            let spout = self.engine.spout();
            for (ch, out) in outputs.iter_mut().enumerate() {
                out[i] = if live && ch < nchnls {
                    (spout[cnt * nchnls + ch] / zerodbfs).to_host()
                } else {
                    0.0
                };
            }
            if live {
                cnt += 1;
            }
        }

        self.cnt = cnt;
        self.status = status;
        self.forward_console();
        if status == PerformStatus::Finished && !self.finished_reported {
            self.finished_reported = true;
            self.reply(ReplyMessage::Finished);
        }
        true
    }
}
