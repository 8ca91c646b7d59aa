mod commands;
mod config;
mod stage;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use attrib_core::attribution::Method;
use clap::{Args, Parser, Subcommand};

use commands::{FeatureSelection, ToyDataArgs, UsageError};
use config::{KindName, LoadedConfig};

/// Worker threads for the encoding and attribution pools; defaults to the
/// number of logical CPUs.
const WORKERS_ENV: &str = "ATTRIB_ENCODE_WORKERS";

#[derive(Parser)]
#[command(
    name = "attrib-encode",
    version,
    about = "Attribution feature spaces and voxelwise encoding models"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ConfigArgs {
    /// Pipeline configuration (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Override a config key, e.g. `--override encoder.n_folds=3`.
    #[arg(long = "override", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Train the toy language model on the transcript.
    TrainLm(ConfigArgs),
    /// Compute feature matrices.
    Features {
        #[command(flatten)]
        cfg: ConfigArgs,
        /// attribution, conductance, attention or activation.
        #[arg(long, value_parser = KindName::parse)]
        kind: Option<KindName>,
        /// grad_norm, grad_x_input, integrated_gradients or erasure.
        #[arg(long, value_parser = parse_method)]
        method: Option<Method>,
        /// Layer for conductance or activation features.
        #[arg(long)]
        layer: Option<usize>,
    },
    /// Generate synthetic BOLD runs from feature matrices.
    Synth(ConfigArgs),
    /// Fit encoding models for every feature matrix and subject.
    Encode(ConfigArgs),
    /// Inter-subject correlation noise ceiling.
    Ceiling(ConfigArgs),
    /// Voxelwise significance, ROI summaries and feature-space comparison.
    Stats(ConfigArgs),
    /// Conductance layer sweep, layer preference and importance alignment.
    Layers(ConfigArgs),
    /// Run every stage in order.
    Pipeline(ConfigArgs),
    /// Dump per-window token attributions as CSV.
    Attributions {
        #[command(flatten)]
        cfg: ConfigArgs,
        #[arg(long, value_parser = parse_method)]
        method: Method,
        /// Only the first N windows.
        #[arg(long)]
        max_windows: Option<usize>,
    },
    /// Write a toy transcript with POS tags and ROI labels.
    ToyData {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 300)]
        words: usize,
        /// Story duration in seconds.
        #[arg(long, default_value_t = 150.0)]
        duration: f64,
        #[arg(long, default_value_t = 200)]
        voxels: usize,
        #[arg(long, default_value_t = 4)]
        rois: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn parse_method(s: &str) -> Result<Method, String> {
    Method::parse(s).map_err(|e| e.to_string())
}

fn load(args: &ConfigArgs) -> Result<LoadedConfig> {
    if !args.config.exists() {
        return Err(commands::usage(format!("config not found: {}", args.config.display())));
    }
    config::load(&args.config, &args.overrides).map_err(|e| commands::usage(format!("{e:#}")))
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::TrainLm(a) => commands::train_lm(&load(&a)?),
        Command::Features { cfg, kind, method, layer } => {
            let sel = FeatureSelection { kind, method, layer };
            if sel.method.is_some() && sel.kind.is_none_or(|k| k != KindName::Attribution) {
                return Err(commands::usage("--method requires --kind attribution"));
            }
            commands::features(&load(&cfg)?, &sel)
        }
        Command::Synth(a) => commands::synth(&load(&a)?),
        Command::Encode(a) => commands::encode(&load(&a)?),
        Command::Ceiling(a) => commands::ceiling(&load(&a)?),
        Command::Stats(a) => commands::stats(&load(&a)?),
        Command::Layers(a) => commands::layers(&load(&a)?),
        Command::Pipeline(a) => commands::pipeline(&load(&a)?),
        Command::Attributions { cfg, method, max_windows } => {
            let path = commands::attributions(&load(&cfg)?, method, max_windows)?;
            println!("{}", path.display());
            Ok(())
        }
        Command::ToyData { out, words, duration, voxels, rois, seed } => commands::toy_data(&ToyDataArgs {
            out_dir: out,
            n_words: words,
            duration_s: duration,
            n_voxels: voxels,
            n_rois: rois,
            seed,
        }),
    }
}

fn init_workers() -> Result<()> {
    let Ok(raw) = std::env::var(WORKERS_ENV) else {
        return Ok(());
    };
    let n: usize = raw
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| commands::usage(format!("{WORKERS_ENV}={raw:?} is not a positive integer")))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    match init_workers().and_then(|()| run(cli)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<UsageError>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
