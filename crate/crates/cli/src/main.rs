use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use fracp_core::lab::{run, ExperimentConfig, LabError, Scenario};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Command {
    Derive,
    Oracle,
    Solve,
    Compare,
    Blowup,
    Tails,
    Check,
}

impl Command {
    fn scenario(self) -> Scenario {
        match self {
            Command::Derive => Scenario::Derive,
            Command::Oracle => Scenario::Oracle,
            Command::Solve => Scenario::Solve,
            Command::Compare => Scenario::Compare,
            Command::Blowup => Scenario::Blowup,
            Command::Tails => Scenario::Tails,
            Command::Check => Scenario::Check,
        }
    }
}

/// Numerical laboratory for the fractional (s,p)-Poisson equation.
#[derive(Debug, Parser)]
#[command(name = "fracp", version)]
struct Cli {
    scenario: Command,
    /// JSON experiment configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides the `output` field of the configuration.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed for property sweeps; overrides the configuration.
    #[arg(long)]
    seed: Option<u64>,
}

fn execute(cli: &Cli) -> Result<(), LabError> {
    let mut config = ExperimentConfig::load(&cli.config)?;
    if config.scenario != cli.scenario.scenario() {
        return Err(LabError::validation(
            "ScenarioMismatch",
            format!("command {} does not match configured scenario {}", cli.scenario.scenario().name(), config.scenario.name()),
        ));
    }
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    let out = cli.out.clone().or_else(|| config.output.clone()).unwrap_or_else(|| PathBuf::from("out"));
    let summary = run(&config, &out)?;
    for file in &summary.files {
        println!("{}", file.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
