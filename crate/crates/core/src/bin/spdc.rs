use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use spdc_core::error::{Error, Result};
use spdc_core::io::PreviewScale;
use spdc_core::scenario::{
    run_preview, run_project, run_rowmap, run_sample, run_simulate, run_tailor, ScenarioConfig,
};

#[derive(Parser)]
#[command(name = "spdc", version, about = "Pump-shaped SPDC two-photon state simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Scenario file (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `output.directory`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides the measurement and tailoring seeds.
    #[arg(long)]
    seed: Option<u64>,
    /// Fail when the phase matching washes out the pump structure.
    #[arg(long)]
    strict: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Full pipeline: mask, pump spectrum, state, observables.
    Simulate(Common),
    /// Observables from a saved pump spectrum.
    Project {
        #[command(flatten)]
        common: Common,
        /// `pump_spectrum.bpf` written by `simulate`.
        #[arg(long)]
        state: PathBuf,
    },
    /// Row correlation map and its ridges.
    Rowmap(Common),
    /// Photon-counting measurement chain.
    Sample(Common),
    /// Phase-mask design for the configured ring target.
    Tailor(Common),
    /// PGM preview of a BPR1 array.
    Preview {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value = "log")]
        scale: Scale,
    },
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum Scale {
    Linear,
    Log,
}

fn load(c: &Common) -> Result<(ScenarioConfig, PathBuf)> {
    let mut cfg = ScenarioConfig::load(&c.config)?;
    if let Some(seed) = c.seed {
        cfg.override_seed(seed);
    }
    let out = c.out.clone().unwrap_or_else(|| cfg.output.directory.clone());
    Ok((cfg, out))
}

fn report(files: &[PathBuf]) {
    for f in files {
        println!("{}", f.display());
    }
}

fn run(cli: Cli) -> Result<()> {
    let start = std::time::Instant::now();
    match cli.command {
        Command::Simulate(c) => {
            let (cfg, out) = load(&c)?;
            report(&run_simulate(&cfg, &out, c.strict)?);
        }
        Command::Project { common, state } => {
            let (cfg, out) = load(&common)?;
            report(&run_project(&cfg, &state, &out, common.strict)?);
        }
        Command::Rowmap(c) => {
            let (cfg, out) = load(&c)?;
            report(&run_rowmap(&cfg, &out, c.strict)?);
        }
        Command::Sample(c) => {
            let (cfg, out) = load(&c)?;
            report(&run_sample(&cfg, &out, c.strict)?);
        }
        Command::Tailor(c) => {
            let (cfg, out) = load(&c)?;
            report(&run_tailor(&cfg, &out)?);
        }
        Command::Preview { input, out, scale } => {
            let scale = match scale {
                Scale::Linear => PreviewScale::Linear,
                Scale::Log => PreviewScale::Log,
            };
            run_preview(&input, Path::new(&out), scale)?;
            report(&[out]);
        }
    }
    log::info!("wall time {:.3} s", start.elapsed().as_secs_f64());
    Ok(())
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Schema(_) | Error::InvalidArgument(_) | Error::Unsupported(_) => 2,
        Error::Numerical(_) | Error::Range(_) => 3,
        Error::Io(_) | Error::Format(_) => 4,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
