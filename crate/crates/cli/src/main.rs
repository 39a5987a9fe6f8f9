use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use hdfd_cli::{
    emit, load_config, run_scenario, Format, RawConfig, Result, ScenarioName, ScenarioSpec,
};

#[derive(Parser)]
#[command(
    name = "hdfd",
    version,
    about = "Scheduling experiments for collocated HD/FD networks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// JSON config file (or a JSON summary written by a previous run).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output file; stdout when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = OutFormat::Csv)]
    format: OutFormat,
    /// Master seed, overriding the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// 10^5 slots and at most 5 replications per cell.
    #[arg(long, global = true)]
    quick: bool,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    workers: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Mean queue per scheduler over a rho grid, with lower bounds.
    SweepDelay,
    /// Downsampled average-queue trajectory per scheduler.
    SamplePath,
    /// FD/HD and UL/DL queue-length ratios.
    Fairness {
        #[arg(long, value_enum, default_value_t = FairnessMode::Rho)]
        mode: FairnessMode,
    },
    /// Q-CSMA to H-GMS mean-queue ratios per weight function and rho.
    WeightTable,
    /// Capacity load, expansion factor and delay lower bounds over rho.
    Bounds,
    /// Arbitrary grid from the config file.
    Run,
}

#[derive(Clone, Copy, ValueEnum)]
enum FairnessMode {
    Sigma,
    Nfd,
    Rho,
}

#[derive(Clone, Copy, ValueEnum)]
enum OutFormat {
    Csv,
    Json,
}

impl Command {
    fn scenario(&self) -> ScenarioName {
        match self {
            Command::SweepDelay => ScenarioName::DelaySweep,
            Command::SamplePath => ScenarioName::SamplePath,
            Command::Fairness {
                mode: FairnessMode::Sigma,
            } => ScenarioName::FairnessSigma,
            Command::Fairness {
                mode: FairnessMode::Nfd,
            } => ScenarioName::FairnessNfd,
            Command::Fairness {
                mode: FairnessMode::Rho,
            } => ScenarioName::FairnessRho,
            Command::WeightTable => ScenarioName::WeightTable,
            Command::Bounds => ScenarioName::BoundsCurve,
            Command::Run => ScenarioName::Custom,
        }
    }
}

fn spec(cli: &Cli) -> Result<ScenarioSpec> {
    let scenario = cli.command.scenario();
    let mut spec = match &cli.config {
        Some(path) => load_config(path, Some(scenario))?,
        None => RawConfig::default().resolve(Some(scenario))?,
    };
    if let Some(seed) = cli.seed {
        spec.seed = seed;
    }
    if cli.quick {
        spec = spec.quick();
    }
    Ok(spec)
}

fn run(cli: &Cli) -> Result<()> {
    let spec = spec(cli)?;
    let table = run_scenario(&spec, cli.workers)?;
    let format = match cli.format {
        OutFormat::Csv => Format::Csv,
        OutFormat::Json => Format::Json,
    };
    emit(&spec, &table, format, cli.out.as_deref())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
