use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use sievelab_core::lab::{run, Experiment, ExperimentConfig, RunError};
use sievelab_core::prime_engine::SieveConfig;

/// Run a sieve experiment from a JSON config.
///
/// Without --out the report is printed as JSON; with it, report.json and one
/// CSV per table are written to the directory.
#[derive(Debug, Parser)]
#[command(name = "sievelab", version)]
struct Cli {
    /// gap-tail, poisson-fit, model-compare, breakdown-scan or random-sieve
    experiment: String,
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides out_dir in the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Replace the config's seed list with this single seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker thread cap.
    #[arg(long)]
    threads: Option<usize>,
}

fn execute(cli: Cli) -> Result<String, RunError> {
    let experiment = Experiment::from_name(&cli.experiment)
        .ok_or_else(|| RunError::Config(format!("unknown experiment {:?}", cli.experiment)))?;
    let mut config = ExperimentConfig::from_path(&cli.config)?;
    if config.experiment != experiment {
        return Err(RunError::Config(format!(
            "config describes {} but {} was requested",
            config.experiment.name(),
            experiment.name()
        )));
    }
    if let Some(seed) = cli.seed {
        config.seeds = vec![seed];
    }
    if let Some(out) = &cli.out {
        config.out_dir = Some(out.display().to_string());
    }
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(RunError::Config("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| RunError::Config(format!("cannot set up {n} threads: {e}")))?;
    }
    let sieve = SieveConfig::from_env().map_err(|e| RunError::Config(e.to_string()))?;
    let report = run(&config, &sieve)?;
    match &config.out_dir {
        Some(dir) => {
            let dir = PathBuf::from(dir);
            report.write_to(&dir).map_err(|source| RunError::Module {
                context: format!("writing {}", dir.display()),
                source,
            })?;
            Ok(format!(
                "{}: {} tables written to {} in {:.2}s",
                experiment.name(),
                report.tables.len(),
                dir.display(),
                report.wall_clock_seconds
            ))
        }
        None => Ok(report.to_json()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(out) => {
            println!("{out}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("sievelab: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
