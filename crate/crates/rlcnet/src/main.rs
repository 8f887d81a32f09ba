use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use rlcnet::{run, Experiment, ExperimentConfig, RunError};

#[derive(Parser)]
#[command(name = "rlcnet", version, about = "RLC lattice networks as quantum billiards")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Lowest lossless resonances.
    Spectrum(Args),
    /// Driven response with a single current source.
    Drive(Args),
    /// Resonance peaks over a frequency range.
    Sweep(Args),
    /// Tolerance-averaged histograms of Re V.
    Ensemble(Args),
    /// Density, heat and current statistics of a driven field.
    Stats(Args),
    /// Power-flow streamlines and vortices.
    Streamlines(Args),
    /// Monte Carlo check of the heat law.
    Oracle(Args),
}

#[derive(clap::Args)]
struct Args {
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `out` in the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides `seed` in the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads for parallel parts (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
}

fn execute(kind: Experiment, args: Args) -> Result<(), RunError> {
    let mut cfg = ExperimentConfig::load(&args.config)?;
    if let Some(s) = args.seed {
        cfg.seed = Some(s);
    }
    if let Some(o) = &args.out {
        cfg.out = Some(o.display().to_string());
    }
    let out = PathBuf::from(cfg.out.clone().unwrap_or_else(|| "out".into()));
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = args.threads {
        if n == 0 {
            return Err(RunError::Config("threads: must be at least 1".into()));
        }
        pool = pool.num_threads(n);
    }
    let pool = pool.build().map_err(|e| RunError::Config(format!("threads: {e}")))?;
    let report = pool.install(|| run(kind, &cfg, &out))?;
    for f in &report.files {
        println!("{}", report.out_dir.join(f).display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (kind, args) = match cli.command {
        Command::Spectrum(a) => (Experiment::Spectrum, a),
        Command::Drive(a) => (Experiment::Drive, a),
        Command::Sweep(a) => (Experiment::Sweep, a),
        Command::Ensemble(a) => (Experiment::Ensemble, a),
        Command::Stats(a) => (Experiment::Stats, a),
        Command::Streamlines(a) => (Experiment::Streamlines, a),
        Command::Oracle(a) => (Experiment::Oracle, a),
    };
    match execute(kind, args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("rlcnet: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
