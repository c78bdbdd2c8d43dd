use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use otfs_dse::error::Result;
use otfs_dse::experiments::{
    analyze_grid, run, run_validate_report, sidecar_path, write_grid_csv, ExperimentConfig, RunConfig, Scenario,
};

const AFTER_HELP: &str = "\
Eb/N0 convention: Eb/N0 = σ_s² / (σ² log2 Q) with unit symbol energy σ_s² = 1,
so the noise variance at a sweep point is σ² = 1 / (log2 Q · 10^(Eb/N0 / 10)).
Pilot frames use σ² = 1 and a pilot amplitude of sqrt(SNR_p).

Trial t uses the seed base_seed XOR t at every sweep point. Output is identical
for any --workers value.";

#[derive(Parser, Debug)]
#[command(name = "otfs-dse", version, about = "OTFS Doppler-squint link simulations", after_help = AFTER_HELP)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    run: RunArgs,
}

#[derive(Args, Debug)]
struct RunArgs {
    /// TOML configuration file.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Base seed for all trials.
    #[arg(long, global = true, value_name = "U64")]
    seed: Option<u64>,
    /// Monte-Carlo trials per sweep point.
    #[arg(long, global = true, value_name = "N")]
    trials: Option<usize>,
    /// CSV output path; a `.meta.json` sidecar is written next to it.
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Worker threads.
    #[arg(long, global = true, value_name = "N")]
    workers: Option<usize>,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Command {
    /// Squint magnitude and pulse constraints per (M, v); with --out also dumps one coefficient grid.
    Analyze,
    /// NMSE of squint-free and closed-form DD channels against the exact channel.
    SigNmse,
    /// BER with perfect path parameters.
    SigBer,
    /// Estimation NMSE against pilot SNR.
    EstNmseSnr,
    /// Estimation NMSE against the number of subcarriers.
    EstNmseM,
    /// BER with estimated CSI.
    EstBer,
    /// Cross-model oracle suite; exits with status 1 if any check fails.
    Validate,
}

impl Command {
    fn scenario(self) -> Scenario {
        match self {
            Command::Analyze => Scenario::Analyze,
            Command::SigNmse => Scenario::SigNmse,
            Command::SigBer => Scenario::SigBer,
            Command::EstNmseSnr => Scenario::EstNmseSnr,
            Command::EstNmseM => Scenario::EstNmseM,
            Command::EstBer => Scenario::EstBer,
            Command::Validate => Scenario::Validate,
        }
    }
}

fn resolve(cli: &Cli) -> Result<(RunConfig, Option<PathBuf>)> {
    let mut file = match &cli.run.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    if cli.run.seed.is_some() {
        file.base_seed = cli.run.seed;
    }
    if cli.run.trials.is_some() {
        file.trials = cli.run.trials;
    }
    if cli.run.workers.is_some() {
        file.workers = cli.run.workers;
    }
    let out = cli.run.out.clone().or_else(|| file.output.clone());
    Ok((file.resolve(cli.command.scenario())?, out))
}

fn execute(cli: &Cli) -> Result<bool> {
    let (cfg, out) = resolve(cli)?;
    let mut passed = true;
    let table = if cfg.scenario == Scenario::Validate {
        let start = std::time::Instant::now();
        let report = run_validate_report(&cfg)?;
        eprint!("{report}");
        passed = report.passed();
        let mut table = report.to_table(&cfg);
        table.metadata.wall_time_s = start.elapsed().as_secs_f64();
        table
    } else {
        run(&cfg)?
    };
    match out {
        Some(path) => {
            let meta = table.save(&path)?;
            eprintln!("wrote {} and {}", path.display(), meta.display());
            if cfg.scenario == Scenario::Analyze {
                let grid_path = sidecar_path(&path, ".grid.csv");
                write_grid_csv(&analyze_grid(&cfg)?, std::fs::File::create(&grid_path)?)?;
                eprintln!("wrote {} ({} model)", grid_path.display(), cfg.model);
            }
        }
        None => table.write_csv(std::io::stdout().lock())?,
    }
    Ok(passed)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
