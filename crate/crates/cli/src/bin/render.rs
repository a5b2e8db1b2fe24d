//! Renders an orchestra and score offline to a 32-bit float WAV file.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use blockbridge::hostsim::render_offline;
use blockbridge::EngineConfig;
use clap::Parser;

#[derive(Parser)]
#[command(name = "render", about = "Render an orchestra and score to a WAV file")]
struct Args {
    #[arg(long)]
    orc: PathBuf,
    #[arg(long)]
    sco: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Seconds to render, rounded up to whole blocks.
    #[arg(long)]
    dur: f64,
    #[arg(long, default_value_t = 44100)]
    sr: u32,
    #[arg(long, default_value_t = 32)]
    ksmps: usize,
    #[arg(long, default_value_t = 2)]
    nchnls: usize,
}

fn run(args: Args) -> anyhow::Result<()> {
    anyhow::ensure!(args.dur.is_finite() && args.dur >= 0.0, "--dur must be a non-negative number");
    let orc = fs::read_to_string(&args.orc).with_context(|| format!("reading {}", args.orc.display()))?;
    let sco = fs::read_to_string(&args.sco).with_context(|| format!("reading {}", args.sco.display()))?;
    let config = EngineConfig::new(args.sr, args.ksmps, args.nchnls, 0, EngineConfig::default().zerodbfs);
    config.validate()?;
    let render = render_offline(&orc, &sco, config, args.dur, &args.out)?;
    let peak = render
        .host_samples()
        .iter()
        .fold(0.0f32, |m, s| m.max(s.abs()));
    println!(
        "wrote {} frames x {} ch at {} Hz to {} (peak {:.6})",
        render.frames,
        config.nchnls,
        config.sr,
        args.out.display(),
        peak
    );
    Ok(())
}

fn main() -> ExitCode {
    match run(Args::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("render: {e:#}");
            ExitCode::FAILURE
        }
    }
}
