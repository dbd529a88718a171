//! `morphboat`: simulation, identification, tracking, docking and bridge
//! runs from TOML configs, with a checksummed manifest per run.
//!
//! Exit codes: 0 success, 1 domain failure, 2 configuration error.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;
mod manifest;
mod plot;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use morphboat_core::control::reference::Shape;
use morphboat_core::sim::trials::{ControllerKind, Form, Water};
use morphboat_core::Error;

use commands::{Outcome, Run};
use config::{Overrides, RunConfig};
use manifest::{Output, RunManifest, MANIFEST_FILE};

const OUT_ENV: &str = "MORPHBOAT_OUT";

#[derive(Parser, Debug)]
#[command(
    name = "morphboat",
    version,
    about = "Expandable surface vessel: simulate, identify, track, dock, build"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run one closed-loop scenario (default: NMPC square lap).
    Simulate(Common),
    /// Identify the parameter functions from maneuver logs.
    Identify(Common),
    /// Compare controllers and forms on reference paths.
    Track(Common),
    /// Monte Carlo docking trials.
    Dock(Common),
    /// Build the floating bridge.
    Bridge(Common),
    /// Repeat a run from its manifest and compare artifact checksums.
    Rerun {
        manifest: PathBuf,
        /// Output directory for the repeat; defaults to `<out>-rerun`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args, Debug, Clone, Default)]
struct Common {
    /// TOML config; may be repeated, later files win.
    #[arg(long)]
    config: Vec<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory [default: $MORPHBOAT_OUT/<command>, else runs/<command>].
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    form: Option<Form>,
    #[arg(long)]
    controller: Option<ControllerKind>,
    #[arg(long)]
    shape: Option<Shape>,
    #[arg(long)]
    water: Option<Water>,
    #[arg(long)]
    repetitions: Option<usize>,
    #[arg(long)]
    blocks: Option<usize>,
    /// Comma-separated expansion lengths, m.
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    lengths: Option<Vec<f64>>,
}

impl Common {
    fn overrides(&self) -> Overrides {
        Overrides {
            seed: self.seed,
            form: self.form,
            controller: self.controller,
            shape: self.shape,
            water: self.water,
            repetitions: self.repetitions,
            blocks: self.blocks,
            lengths: self.lengths.clone(),
        }
    }
}

/// Failure with its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn config(message: impl Into<String>) -> Self {
        Self {
            code: 2,
            message: message.into(),
        }
    }

    fn domain(message: impl Into<String>) -> Self {
        Self {
            code: 1,
            message: message.into(),
        }
    }
}

/// Bad inputs are configuration errors; everything the computation itself
/// runs into is a domain failure.
fn classify(e: Error) -> Failure {
    match e {
        Error::Config { .. }
        | Error::Io { .. }
        | Error::Range { .. }
        | Error::Geometry(_)
        | Error::Parameter(_) => Failure::config(e.to_string()),
        Error::Log(_) | Error::Misaligned(_) => Failure::config(e.to_string()),
        _ => Failure::domain(e.to_string()),
    }
}

fn default_out(command: &str) -> PathBuf {
    let root = std::env::var_os(OUT_ENV)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("runs"));
    root.join(command)
}

/// Runs a command against an already-resolved config and writes the
/// manifest, including when the run fails after the output was created.
fn execute(
    command: &str,
    cfg: &RunConfig,
    config_paths: Vec<PathBuf>,
    overrides: Overrides,
    out_dir: PathBuf,
) -> Result<RunManifest, Failure> {
    cfg.validate().map_err(classify)?;
    let model = cfg.vessel.build().map_err(classify)?;
    let mut out = Output::create(out_dir.clone()).map_err(classify)?;
    out.write_str("config.toml", &cfg.to_toml().map_err(classify)?)
        .map_err(classify)?;

    let mut run = Run {
        cfg,
        model: &model,
        out: &mut out,
        inputs: Vec::new(),
    };
    let result = match command {
        "simulate" => commands::simulate(&mut run),
        "identify" => commands::identify(&mut run),
        "track" => commands::track(&mut run),
        "dock" => commands::dock(&mut run),
        "bridge" => commands::bridge(&mut run),
        other => unreachable!("unknown command {other}"),
    };
    let inputs = std::mem::take(&mut run.inputs);
    let (outcome, failure) = match result {
        Ok(Outcome::Success) => ("success".to_string(), None),
        Ok(Outcome::Failed(msg)) => (msg.clone(), Some(Failure::domain(msg))),
        Err(e) => {
            let f = classify(e);
            (f.message.clone(), Some(f))
        }
    };
    let manifest = RunManifest {
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        command: command.to_string(),
        config_paths,
        seed: cfg.seed,
        out_dir,
        overrides,
        effective_config: cfg.clone(),
        inputs,
        artifacts: out.artifacts(),
        outcome,
    };
    let mut text =
        serde_json::to_string_pretty(&manifest).map_err(|e| Failure::domain(e.to_string()))?;
    text.push('\n');
    manifest::write_atomic(&out.path(MANIFEST_FILE), text.as_bytes()).map_err(classify)?;
    match failure {
        Some(f) => Err(f),
        None => Ok(manifest),
    }
}

fn rerun(path: &Path, out: Option<PathBuf>) -> Result<(), Failure> {
    let original = RunManifest::load(path).map_err(classify)?;
    let out_dir = out.unwrap_or_else(|| {
        let mut s = original.out_dir.clone().into_os_string();
        s.push("-rerun");
        PathBuf::from(s)
    });
    if out_dir == original.out_dir {
        return Err(Failure::config(
            "rerun output directory must differ from the original",
        ));
    }
    let repeat = match execute(
        &original.command,
        &original.effective_config,
        vec![path.to_path_buf()],
        Overrides::default(),
        out_dir.clone(),
    ) {
        Ok(m) => m,
        Err(f) if f.code == 1 => {
            RunManifest::load(&out_dir.join(MANIFEST_FILE)).map_err(classify)?
        }
        Err(f) => return Err(f),
    };
    let diff = original.differences(&repeat);
    if diff.is_empty() && original.outcome == repeat.outcome {
        println!(
            "{} artifact(s) reproduced bit-exactly in {}",
            repeat.artifacts.len(),
            out_dir.display()
        );
        Ok(())
    } else {
        for d in &diff {
            eprintln!("  {d}");
        }
        if original.outcome != repeat.outcome {
            eprintln!(
                "  outcome `{}` became `{}`",
                original.outcome, repeat.outcome
            );
        }
        Err(Failure::domain(format!(
            "rerun differs in {} artifact(s)",
            diff.len()
        )))
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let (name, common) = match cli.command {
        Command::Simulate(c) => ("simulate", c),
        Command::Identify(c) => ("identify", c),
        Command::Track(c) => ("track", c),
        Command::Dock(c) => ("dock", c),
        Command::Bridge(c) => ("bridge", c),
        Command::Rerun { manifest, out } => {
            return match rerun(&manifest, out) {
                Ok(()) => ExitCode::SUCCESS,
                Err(f) => {
                    eprintln!("error: {}", f.message);
                    ExitCode::from(f.code)
                }
            };
        }
    };
    let overrides = common.overrides();
    let result = RunConfig::resolve(&common.config, &overrides)
        .map_err(classify)
        .and_then(|cfg| {
            let out = common.out.clone().unwrap_or_else(|| default_out(name));
            execute(name, &cfg, common.config.clone(), overrides.clone(), out)
        });
    match result {
        Ok(m) => {
            println!(
                "wrote {} artifact(s) to {}",
                m.artifacts.len(),
                m.out_dir.display()
            );
            ExitCode::SUCCESS
        }
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
