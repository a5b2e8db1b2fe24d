//! Runs an engine against a virtual-time host and reports dropouts.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use anyhow::{bail, Context};
use blockbridge::bridge::{create_node, AudioContext, BackendKind, HostCapabilities, NodeOptions};
use blockbridge::hostsim::{inject_main_task, run_sim, HostConfig, ThreadMode};
use blockbridge::EngineConfig;
use clap::{Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "sim", about = "Simulate an audio host in virtual time")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    Run(RunArgs),
}

#[derive(clap::Args)]
struct RunArgs {
    #[arg(long)]
    orc: PathBuf,
    #[arg(long)]
    sco: PathBuf,
    #[arg(long, value_enum, default_value_t = Mode::Dedicated)]
    mode: Mode,
    /// Seconds of virtual time.
    #[arg(long)]
    dur: f64,
    /// Extra time spent in every callback, milliseconds.
    #[arg(long)]
    stall_ms: Option<f64>,
    /// Main-thread task as START:DUR in seconds. Repeatable.
    #[arg(long = "task", num_args = 1..)]
    tasks: Vec<Task>,
    /// Render cost of each callback as a fraction of its period.
    #[arg(long, default_value_t = 0.0)]
    load: f64,
    #[arg(long, default_value_t = 44100)]
    sr: u32,
    #[arg(long, default_value_t = 32)]
    ksmps: usize,
    #[arg(long, default_value_t = 2)]
    nchnls: usize,
    /// Frames per host callback.
    #[arg(long, default_value_t = 128)]
    quantum: usize,
    #[arg(long)]
    json: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Shared,
    Dedicated,
}

#[derive(Clone, Copy, Debug)]
struct Task {
    start: f64,
    dur: f64,
}

impl FromStr for Task {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (a, b) = s.split_once(':').ok_or_else(|| format!("expected START:DUR, got {s:?}"))?;
        let start: f64 = a.trim().parse().map_err(|_| format!("bad start {a:?}"))?;
        let dur: f64 = b.trim().parse().map_err(|_| format!("bad duration {b:?}"))?;
        if !start.is_finite() || !dur.is_finite() || dur < 0.0 {
            return Err(format!("task {s:?} must have finite start and non-negative duration"));
        }
        Ok(Task { start, dur })
    }
}

fn run(args: RunArgs) -> anyhow::Result<()> {
    anyhow::ensure!(args.dur.is_finite() && args.dur >= 0.0, "--dur must be a non-negative number");
    anyhow::ensure!(args.quantum > 0, "--quantum must be positive");
    let orc = fs::read_to_string(&args.orc).with_context(|| format!("reading {}", args.orc.display()))?;
    let sco = fs::read_to_string(&args.sco).with_context(|| format!("reading {}", args.sco.display()))?;
    let config = EngineConfig::new(args.sr, args.ksmps, args.nchnls, 0, EngineConfig::default().zerodbfs);

    let mut ctx = AudioContext::new(HostCapabilities::new(true, true), args.sr);
    let options = NodeOptions {
        backend: Some(BackendKind::Worklet),
        ..NodeOptions::default()
    };
    let mut node = create_node::<f64>(&mut ctx, config, options)?;
    let mut processor = node.take_processor().context("worklet processor already taken")?;
    node.compile_orc(&orc)?;
    node.read_score(&sco)?;
    node.start()?;
    processor.apply_messages();
    for reply in node.drain_replies() {
        if let blockbridge::bridge::ReplyMessage::CompileResult { ok: false, diagnostics } = reply {
            for d in &diagnostics {
                eprintln!("{}: {d}", args.orc.display());
            }
            bail!("orchestra failed to compile");
        }
    }

    let mode = match args.mode {
        Mode::Shared => ThreadMode::Shared,
        Mode::Dedicated => ThreadMode::Dedicated,
    };
    let mut host = HostConfig::new(args.sr, mode);
    host.quantum = args.quantum;
    host.per_callback_stall = args.stall_ms.map(|ms| ms / 1000.0);
    for t in &args.tasks {
        host = inject_main_task(&host, t.start, t.dur);
    }
    let period = host.period();
    let cost = args.load.max(0.0) * period;
    let report = run_sim(&host, &mut processor, args.dur, |_| cost);

    if args.json {
        println!("{}", serde_json::to_string(&report)?);
    } else {
        println!("callbacks      {}", report.callbacks_total);
        println!("dropouts       {}", report.dropouts);
        println!("dropout ratio  {:.4}", report.dropout_ratio());
        println!("worst late ms  {:.3}", report.worst_lateness * 1000.0);
    }
    Ok(())
}

fn main() -> ExitCode {
    let result = match Cli::parse().command {
        Command::Run(args) => run(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("sim: {e:#}");
            ExitCode::FAILURE
        }
    }
}
