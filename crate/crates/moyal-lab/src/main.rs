use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use moyal_lab::cli::config::{parse_document, ExperimentKind};
use moyal_lab::cli::{run, ExitStatus, RunConfig};

/// Batch front end for the phase-space dynamics laboratory.
#[derive(Parser)]
#[command(name = "moyal-lab", version, about)]
struct Args {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct ConfiguredRun {
    /// JSON configuration document.
    #[arg(long)]
    config: PathBuf,
    /// Where artifacts are written; overrides the config's output_dir.
    #[arg(long)]
    output_dir: Option<PathBuf>,
    /// Seed override for the experiments that consume randomness.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate one evolution law and dump the trajectory.
    Evolve(ConfiguredRun),
    /// Twin-run two evolution laws and record their L2 distance over time.
    Compare(ConfiguredRun),
    /// Build a wavepacket and emit its phase-space density.
    Transform(ConfiguredRun),
    /// Sample stochastic coordinate offsets and histogram the smeared point.
    Smear(ConfiguredRun),
    /// Run the two-cell box measurement.
    Measure(ConfiguredRun),
    /// Run the operator-identity property suites and print PASS/FAIL lines.
    IdentityChecks {
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn init_thread_pool() {
    if let Ok(value) = std::env::var("MOYAL_LAB_THREADS") {
        match value.parse::<usize>() {
            Ok(n) if n >= 1 => {
                rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build_global()
                    .expect("rayon pool is built once, before any parallel work");
            }
            _ => {
                eprintln!("warning: ignoring MOYAL_LAB_THREADS={value} (want a positive integer)");
            }
        }
    }
}

fn configured(kind: ExperimentKind, opts: &ConfiguredRun) -> Result<(RunConfig, PathBuf), String> {
    let text = std::fs::read_to_string(&opts.config)
        .map_err(|e| format!("cannot read {}: {e}", opts.config.display()))?;
    let mut config = parse_document(&text).map_err(|e| e.to_string())?;
    if config.experiment != kind {
        return Err(format!(
            "config declares experiment \"{}\" but the {kind} subcommand was invoked",
            config.experiment
        ));
    }
    if let Some(seed) = opts.seed {
        config.seed = Some(seed);
    }
    config.validate_and_resolve().map_err(|e| e.to_string())?;
    let output_dir = opts
        .output_dir
        .clone()
        .or_else(|| config.output_dir.as_ref().map(PathBuf::from))
        .ok_or_else(|| "no output directory: pass --output-dir or set output_dir".to_string())?;
    config.output_dir = Some(output_dir.display().to_string());
    Ok((config, output_dir))
}

fn main() -> ExitCode {
    env_logger::init();
    init_thread_pool();
    let args = Args::parse();
    let (kind, opts) = match &args.command {
        Command::Evolve(o) => (ExperimentKind::Evolve, o),
        Command::Compare(o) => (ExperimentKind::Compare, o),
        Command::Transform(o) => (ExperimentKind::Transform, o),
        Command::Smear(o) => (ExperimentKind::Smear, o),
        Command::Measure(o) => (ExperimentKind::Measure, o),
        Command::IdentityChecks { seed } => {
            let ok = moyal_lab::cli::experiments::run_identity_checks(*seed);
            return if ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(ExitStatus::ValidationError.code() as u8)
            };
        }
    };
    match configured(kind, opts) {
        Ok((config, output_dir)) => {
            let status = run(&config, &output_dir);
            ExitCode::from(status.code() as u8)
        }
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(ExitStatus::ValidationError.code() as u8)
        }
    }
}
