//! Embeds a binary module as text, unpacks it again, compares encodings
//! or writes browser loader scripts.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use blockbridge::packager::{
    self, bench_report, loader_artifacts, Encoding, PackError, PackagedModule, DEFAULT_PROCESSOR_NAME,
};
use clap::{Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "pack", about = "Embed binary modules as source text")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Wrap a binary file in a loadable text artifact.
    Encode {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, value_enum)]
        format: Format,
        #[arg(long)]
        out: PathBuf,
    },
    /// Recover the bytes from an artifact written by `encode`.
    Decode {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Compare file size, deflated size and decode time of both encodings.
    Bench {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Write the browser loader scripts for a module into a directory.
    Loader {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
        #[arg(long, default_value = DEFAULT_PROCESSOR_NAME)]
        name: String,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Base64,
    Bytes,
}

impl From<Format> for Encoding {
    fn from(f: Format) -> Self {
        match f {
            Format::Base64 => Encoding::Base64,
            Format::Bytes => Encoding::ByteArrayLiteral,
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Encode { input, format, out } => {
            let bytes = fs::read(&input).with_context(|| format!("reading {}", input.display()))?;
            let pkg = packager::encode(&bytes, format.into());
            fs::write(&out, pkg.artifact()).with_context(|| format!("writing {}", out.display()))?;
        }
        Command::Decode { input, out } => {
            let text = fs::read_to_string(&input).with_context(|| format!("reading {}", input.display()))?;
            let pkg = PackagedModule::from_artifact(&text)?;
            let bytes = packager::decode(&pkg)?;
            fs::write(&out, bytes).with_context(|| format!("writing {}", out.display()))?;
        }
        Command::Bench { input, json } => {
            let bytes = fs::read(&input).with_context(|| format!("reading {}", input.display()))?;
            let report = bench_report(&bytes);
            if json {
                println!("{}", report.to_json());
            } else {
                print!("{}", report.to_text());
            }
        }
        Command::Loader { input, out_dir, name } => {
            let bytes = fs::read(&input).with_context(|| format!("reading {}", input.display()))?;
            let artifacts = loader_artifacts(&bytes, &name)?;
            fs::create_dir_all(&out_dir).with_context(|| format!("creating {}", out_dir.display()))?;
            let files = artifacts.worklet_modules().into_iter().chain([artifacts.fallback_modules()[1].clone()]);
            for (file, text) in files {
                let path = out_dir.join(file);
                fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("pack: {e:#}");
            if matches!(e.downcast_ref::<PackError>(), Some(PackError::MalformedPayload(_))) {
                ExitCode::from(2)
            } else {
                ExitCode::FAILURE
            }
        }
    }
}
