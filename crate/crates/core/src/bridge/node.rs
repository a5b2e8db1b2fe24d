use std::collections::{BTreeSet, VecDeque};
use std::ops::{Deref, DerefMut};
use std::time::{Duration, Instant};

use super::backend::{select_backend, BackendKind, HostCapabilities};
use super::message::{ControlMessage, Envelope, ReplyMessage, RequestId};
use super::processor::{ProcessorPort, ProcessorState};
use super::BridgeError;
use crate::engine::{EngineConfig, ScoreEvent};
use crate::sample::Sample;

/// Default wait for a request/reply round trip.
pub const DEFAULT_REPLY_TIMEOUT: Duration = Duration::from_secs(1);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(u64);

/// A host audio graph: what the host can do, and which nodes feed the
/// destination.
#[derive(Debug, Clone)]
pub struct AudioContext {
    caps: HostCapabilities,
    sample_rate: u32,
    next_id: u64,
    destination: BTreeSet<NodeId>,
}

impl AudioContext {
    pub fn new(caps: HostCapabilities, sample_rate: u32) -> Self {
        Self {
            caps,
            sample_rate,
            next_id: 0,
            destination: BTreeSet::new(),
        }
    }

    pub fn capabilities(&self) -> HostCapabilities {
        self.caps
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn connect<S: Sample>(&mut self, node: &Node<S>) {
        self.destination.insert(node.id);
    }

    pub fn disconnect<S: Sample>(&mut self, node: &Node<S>) {
        self.destination.remove(&node.id);
    }

    pub fn is_connected<S: Sample>(&self, node: &Node<S>) -> bool {
        self.destination.contains(&node.id)
    }

    fn allocate_id(&mut self) -> NodeId {
        let id = NodeId(self.next_id);
        self.next_id += 1;
        id
    }
}

#[derive(Debug, Clone, Copy)]
pub struct NodeOptions {
    pub backend: Option<BackendKind>,
    pub reply_timeout: Duration,
}

impl Default for NodeOptions {
    fn default() -> Self {
        Self {
            backend: None,
            reply_timeout: DEFAULT_REPLY_TIMEOUT,
        }
    }
}

/// Control-context handle of one engine.
///
/// Every operation posts a message and returns without waiting. With the
/// worklet backend the processor is handed to the render context via
/// [`take_processor`](Self::take_processor); with the script processor
/// backend the node keeps it and the host drives it through
/// [`render`](Self::render). Either way messages take effect at the next
/// block boundary.
pub struct Node<S: Sample> {
    id: NodeId,
    backend: BackendKind,
    port: ProcessorPort,
    seq: u64,
    next_request: RequestId,
    reply_timeout: Duration,
    stash: VecDeque<ReplyMessage>,
    worklet: Option<ProcessorState<S>>,
    inline: Option<ProcessorState<S>>,
}

impl<S: Sample> std::fmt::Debug for Node<S> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Node")
            .field("id", &self.id)
            .field("backend", &self.backend)
            .field("seq", &self.seq)
            .finish()
    }
}

/// Selects a backend for `ctx` and creates a node with its own engine.
/// The node is not connected; see [`EngineFacade`] for the managed path.
pub fn create_node<S: Sample>(
    ctx: &mut AudioContext,
    config: EngineConfig,
    options: NodeOptions,
) -> Result<Node<S>, BridgeError> {
    let backend = select_backend(ctx.caps, options.backend)?;
    let processor = ProcessorState::new(config)?;
    let port = processor.port();
    let (worklet, inline) = match backend {
        BackendKind::Worklet => (Some(processor), None),
        BackendKind::ScriptProcessor => (None, Some(processor)),
    };
    Ok(Node {
        id: ctx.allocate_id(),
        backend,
        port,
        seq: 0,
        next_request: 0,
        reply_timeout: options.reply_timeout,
        stash: VecDeque::new(),
        worklet,
        inline,
    })
}

impl<S: Sample> Node<S> {
    pub fn id(&self) -> NodeId {
        self.id
    }

    pub fn backend(&self) -> BackendKind {
        self.backend
    }

    /// Hands the processor to the render context. Only the worklet
    /// backend releases it, and only once.
    pub fn take_processor(&mut self) -> Option<ProcessorState<S>> {
        self.worklet.take()
    }

    /// Runs the inline processor for one host buffer.
    pub fn render(&mut self, inputs: &[&[f32]], outputs: &mut [&mut [f32]]) -> Result<bool, BridgeError> {
        match self.inline.as_mut() {
            Some(p) => Ok(p.process(inputs, outputs)),
            None => Err(BridgeError::NotInline),
        }
    }

    /// Inline processor, for inspection.
    pub fn inline_processor(&self) -> Option<&ProcessorState<S>> {
        self.inline.as_ref()
    }

    /// Enqueues `msg` and returns its sequence number. Never blocks.
    pub fn post(&mut self, msg: ControlMessage) -> Result<u64, BridgeError> {
        let seq = self.seq;
        self.seq += 1;
        self.port.send(Envelope { seq, msg })?;
        Ok(seq)
    }

    pub fn compile_orc(&mut self, source: &str) -> Result<u64, BridgeError> {
        self.post(ControlMessage::CompileOrc(source.to_owned()))
    }

    pub fn read_score(&mut self, text: &str) -> Result<u64, BridgeError> {
        self.post(ControlMessage::ReadScore(text.to_owned()))
    }

    pub fn send_event(&mut self, event: ScoreEvent) -> Result<u64, BridgeError> {
        self.post(ControlMessage::Event(event))
    }

    pub fn set_channel(&mut self, name: &str, value: f64) -> Result<u64, BridgeError> {
        self.post(ControlMessage::SetChannel {
            name: name.to_owned(),
            value,
        })
    }

    pub fn midi(&mut self, status: u8, d1: u8, d2: u8) -> Result<u64, BridgeError> {
        self.post(ControlMessage::Midi { status, d1, d2 })
    }

    pub fn write_file(&mut self, path: &str, bytes: Vec<u8>) -> Result<u64, BridgeError> {
        self.post(ControlMessage::WriteFile {
            path: path.to_owned(),
            bytes,
        })
    }

    pub fn start(&mut self) -> Result<u64, BridgeError> {
        self.post(ControlMessage::Start)
    }

    pub fn stop(&mut self) -> Result<u64, BridgeError> {
        self.post(ControlMessage::Stop)
    }

    pub fn reset(&mut self) -> Result<u64, BridgeError> {
        self.post(ControlMessage::Reset)
    }

    fn request_id(&mut self) -> RequestId {
        let id = self.next_request;
        self.next_request += 1;
        id
    }

    /// Asks for a channel value. Resolve with [`try_channel`](Self::try_channel)
    /// or [`wait_channel`](Self::wait_channel).
    pub fn request_channel(&mut self, name: &str) -> Result<RequestId, BridgeError> {
        let request_id = self.request_id();
        self.post(ControlMessage::GetChannel {
            name: name.to_owned(),
            request_id,
        })?;
        Ok(request_id)
    }

    pub fn request_file_list(&mut self, prefix: &str) -> Result<RequestId, BridgeError> {
        let request_id = self.request_id();
        self.post(ControlMessage::ListFiles {
            prefix: prefix.to_owned(),
            request_id,
        })?;
        Ok(request_id)
    }

    fn pump(&mut self) {
        while let Some(env) = self.port.recv() {
            self.stash.push_back(env.msg);
        }
    }

    fn take_matching<T>(&mut self, mut pick: impl FnMut(&ReplyMessage) -> Option<T>) -> Option<T> {
        self.pump();
        let idx = self.stash.iter().position(|m| pick(m).is_some())?;
        let msg = self.stash.remove(idx)?;
        pick(&msg)
    }

    pub fn try_channel(&mut self, id: RequestId) -> Option<f64> {
        self.take_matching(|m| match m {
            ReplyMessage::ChannelValue { request_id, value } if *request_id == id => Some(*value),
            _ => None,
        })
    }

    pub fn try_file_list(&mut self, id: RequestId) -> Option<Vec<(String, usize)>> {
        self.take_matching(|m| match m {
            ReplyMessage::FileList { request_id, entries } if *request_id == id => Some(entries.clone()),
            _ => None,
        })
    }

    fn wait<T>(&mut self, mut attempt: impl FnMut(&mut Self) -> Option<T>) -> Result<T, BridgeError> {
        let deadline = Instant::now() + self.reply_timeout;
        loop {
            if let Some(v) = attempt(self) {
                return Ok(v);
            }
            if Instant::now() >= deadline {
                return Err(BridgeError::Timeout);
            }
            std::thread::sleep(Duration::from_micros(200));
        }
    }

    /// Blocks until the reply for `id` arrives or the reply timeout passes.
    /// A timeout means the processor is no longer running.
    pub fn wait_channel(&mut self, id: RequestId) -> Result<f64, BridgeError> {
        self.wait(|n| n.try_channel(id))
    }

    pub fn wait_file_list(&mut self, id: RequestId) -> Result<Vec<(String, usize)>, BridgeError> {
        self.wait(|n| n.try_file_list(id))
    }

    /// Takes every reply received so far, in arrival order.
    pub fn drain_replies(&mut self) -> Vec<ReplyMessage> {
        self.pump();
        self.stash.drain(..).collect()
    }

    /// Messages posted but not yet applied.
    pub fn queued(&self) -> usize {
        self.port.inbox.len()
    }
}

/// Single-engine convenience wrapper that manages the audio graph: the
/// node is connected to the destination on creation.
pub struct EngineFacade<S: Sample> {
    node: Node<S>,
}

impl<S: Sample> EngineFacade<S> {
    pub fn new(ctx: &mut AudioContext, config: EngineConfig) -> Result<Self, BridgeError> {
        Self::with_options(ctx, config, NodeOptions::default())
    }

    pub fn with_options(
        ctx: &mut AudioContext,
        config: EngineConfig,
        options: NodeOptions,
    ) -> Result<Self, BridgeError> {
        let node = create_node(ctx, config, options)?;
        ctx.connect(&node);
        Ok(Self { node })
    }

    pub fn node(&self) -> &Node<S> {
        &self.node
    }

    pub fn into_node(self) -> Node<S> {
        self.node
    }
}

impl<S: Sample> Deref for EngineFacade<S> {
    type Target = Node<S>;
    fn deref(&self) -> &Node<S> {
        &self.node
    }
}

impl<S: Sample> DerefMut for EngineFacade<S> {
    fn deref_mut(&mut self) -> &mut Node<S> {
        &mut self.node
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn secure() -> AudioContext {
        AudioContext::new(HostCapabilities::new(true, true), 44100)
    }

    fn cfg() -> EngineConfig {
        EngineConfig::new(44100, 32, 1, 0, 32768.0)
    }

    #[test]
    fn facade_connects_raw_node_does_not() {
        let mut ctx = secure();
        let facade = EngineFacade::<f64>::new(&mut ctx, cfg()).unwrap();
        assert!(ctx.is_connected(facade.node()));
        let raw = create_node::<f64>(&mut ctx, cfg(), NodeOptions::default()).unwrap();
        assert!(!ctx.is_connected(&raw));
        ctx.connect(&raw);
        assert!(ctx.is_connected(&raw));
        assert_ne!(raw.id(), facade.id());
    }

    #[test]
    fn backend_follows_context() {
        let mut ctx = AudioContext::new(HostCapabilities::new(true, false), 44100);
        let mut n = create_node::<f64>(&mut ctx, cfg(), NodeOptions::default()).unwrap();
        assert_eq!(n.backend(), BackendKind::ScriptProcessor);
        assert!(n.take_processor().is_none());
        let mut w = create_node::<f64>(&mut secure(), cfg(), NodeOptions::default()).unwrap();
        assert_eq!(w.backend(), BackendKind::Worklet);
        assert!(w.take_processor().is_some());
        assert!(w.take_processor().is_none());
        let mut out = vec![0.0f32; 4];
        assert!(matches!(w.render(&[], &mut [&mut out]), Err(BridgeError::NotInline)));
    }

    #[test]
    fn queue_full_after_capacity() {
        let mut n = create_node::<f64>(&mut secure(), cfg(), NodeOptions::default()).unwrap();
        let _p = n.take_processor();
        for _ in 0..super::super::INBOX_CAPACITY {
            n.start().unwrap();
        }
        assert!(matches!(n.start(), Err(BridgeError::QueueFull)));
    }

    #[test]
    fn inline_messages_apply_at_next_render() {
        let mut ctx = AudioContext::new(HostCapabilities::default(), 44100);
        let mut n = create_node::<f64>(&mut ctx, cfg(), NodeOptions::default()).unwrap();
        n.set_channel("a", 1.0).unwrap();
        let id = n.request_channel("a").unwrap();
        assert_eq!(n.try_channel(id), None);
        let mut out = vec![0.0f32; 8];
        n.render(&[], &mut [&mut out]).unwrap();
        assert_eq!(n.try_channel(id), Some(1.0));
        let id = n.request_channel("unset").unwrap();
        n.render(&[], &mut [&mut out]).unwrap();
        assert_eq!(n.try_channel(id), Some(0.0));
    }

    #[test]
    fn timeout_when_processor_gone() {
        let opts = NodeOptions {
            reply_timeout: Duration::from_millis(30),
            ..NodeOptions::default()
        };
        let mut n = create_node::<f64>(&mut secure(), cfg(), opts).unwrap();
        drop(n.take_processor());
        let id = n.request_channel("a").unwrap();
        assert!(matches!(n.wait_channel(id), Err(BridgeError::Timeout)));
    }

    #[test]
    fn two_nodes_two_engines() {
        let mut ctx = AudioContext::new(HostCapabilities::default(), 44100);
        let mut a = create_node::<f64>(&mut ctx, cfg(), NodeOptions::default()).unwrap();
        let mut b = create_node::<f64>(&mut ctx, cfg(), NodeOptions::default()).unwrap();
        a.set_channel("x", 1.0).unwrap();
        b.set_channel("x", 2.0).unwrap();
        let mut out = vec![0.0f32; 4];
        a.render(&[], &mut [&mut out]).unwrap();
        b.render(&[], &mut [&mut out]).unwrap();
        let ia = a.request_channel("x").unwrap();
        let ib = b.request_channel("x").unwrap();
        a.render(&[], &mut [&mut out]).unwrap();
        b.render(&[], &mut [&mut out]).unwrap();
        assert_eq!(a.try_channel(ia), Some(1.0));
        assert_eq!(b.try_channel(ib), Some(2.0));
    }
}
