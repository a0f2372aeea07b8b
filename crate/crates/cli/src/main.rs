use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use coordsim_cli::config::VariantSpec;
use coordsim_cli::{exit_code, runner, CliError, Kind};

#[derive(Parser)]
#[command(name = "coordsim", version, about = "Seeded experiments on classical-quantum coordination")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Entropies, Holevo quantity and PPT spectra of a target.
    Info(Flags),
    /// Monte Carlo resolvability curve of a random codebook.
    Resolvability(Flags),
    /// Two-node protocol gap versus blocklength.
    SimulateTwoNode(Flags),
    /// No-communication protocol gap versus blocklength.
    SimulateNc(Flags),
    /// Broadcast protocol gap versus blocklength.
    SimulateBroadcast(Flags),
    /// Two-node rate-region boundary over an R0 grid.
    RegionTwoNode(Flags),
    /// No-communication common-randomness capacity.
    RegionNc(Flags),
    /// Broadcast rate-region boundary over an R0 grid.
    RegionBroadcast(Flags),
    /// Exhaustive grid search for classical targets.
    Oracle(Flags),
}

#[derive(clap::Args)]
struct Flags {
    /// JSON experiment config.
    #[arg(long)]
    config: PathBuf,
    /// Overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads; defaults to the number of available cores.
    #[arg(long)]
    threads: Option<usize>,
    /// Overrides the region reading used for boundaries.
    #[arg(long, value_enum)]
    region_variant: Option<VariantSpec>,
}

impl Command {
    fn split(self) -> (Kind, Flags) {
        match self {
            Command::Info(f) => (Kind::Info, f),
            Command::Resolvability(f) => (Kind::Resolvability, f),
            Command::SimulateTwoNode(f) => (Kind::SimulateTwoNode, f),
            Command::SimulateNc(f) => (Kind::SimulateNc, f),
            Command::SimulateBroadcast(f) => (Kind::SimulateBroadcast, f),
            Command::RegionTwoNode(f) => (Kind::RegionTwoNode, f),
            Command::RegionNc(f) => (Kind::RegionNc, f),
            Command::RegionBroadcast(f) => (Kind::RegionBroadcast, f),
            Command::Oracle(f) => (Kind::Oracle, f),
        }
    }
}

fn execute(kind: Kind, flags: Flags) -> Result<i32, CliError> {
    if let Some(threads) = flags.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| CliError::validation("--threads", &e.to_string()))?;
    }
    let mut cfg = runner::load_config(&flags.config, kind)?;
    if let Some(seed) = flags.seed {
        cfg.seed = seed;
    }
    if let Some(out) = flags.out {
        cfg.output.dir = out;
    }
    if let Some(v) = flags.region_variant {
        cfg.region_variant = v;
    }
    runner::apply_caps_env(&mut cfg, std::env::var("COORDSIM_CAPS").ok().as_deref())?;
    let base = flags.config.parent().map(PathBuf::from).unwrap_or_default();
    let output = runner::run(&cfg, &base)?;
    println!("{}", output.json_path.display());
    println!("{}", output.csv_path.display());
    if output.exit_code == exit_code::INFEASIBLE_ENTANGLED {
        eprintln!("target is entangled across a required cut: INFEASIBLE_ENTANGLED");
    }
    Ok(output.exit_code)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let (kind, flags) = Cli::parse().command.split();
    let code = match execute(kind, flags) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    };
    ExitCode::from(code as u8)
}
