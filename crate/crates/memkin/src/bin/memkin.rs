use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use memkin::config::{parse_config, Scenario, SimulationConfig};
use memkin::harness::{run, Status};
use memkin::Error;

#[derive(Parser, Debug)]
#[command(name = "memkin", version, about = "Memory-kernel and Landau velocity-space solvers")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// TOML configuration; defaults apply to every omitted key.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory for artifacts and the manifest.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Worker threads for the solvers.
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Assert that no randomness is used. Every scenario is deterministic,
    /// so this only documents intent.
    #[arg(long, global = true)]
    seedless: bool,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Command {
    /// Non-Markovian memory solver from a perturbed Maxwellian.
    SimulateMemory,
    /// Landau solver from a perturbed Maxwellian.
    SimulateLandau,
    /// Memory solutions against the Landau solution over an eps sweep.
    Converge,
    /// Closed-form kernels against independent quadratures.
    KernelCheck,
    /// Memory solver started at a Maxwellian over an eps sweep.
    Stationarity,
}

impl Command {
    fn scenario(self) -> Scenario {
        match self {
            Command::SimulateMemory => Scenario::Memory,
            Command::SimulateLandau => Scenario::Landau,
            Command::Converge => Scenario::Converge,
            Command::KernelCheck => Scenario::KernelCheck,
            Command::Stationarity => Scenario::Stationarity,
        }
    }
}

fn load(cli: &Cli, scenario: Scenario) -> Result<SimulationConfig, Error> {
    match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
            parse_config(&text)
        }
        None => Ok(SimulationConfig::for_scenario(scenario)),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let scenario = cli.command.scenario();
    let config = match load(&cli, scenario) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("memkin: {e}");
            return ExitCode::from(2);
        }
    };
    let out = cli.out.clone().or_else(|| config.out.clone()).unwrap_or_else(|| PathBuf::from("memkin-out").join(scenario.name()));
    match run(&config, scenario, &out, cli.threads) {
        Ok(summary) => {
            for c in &summary.manifest.checks {
                println!("{} {}: {:.4e} {} {:e}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.value, c.relation, c.bound);
            }
            if let Some(reason) = &summary.manifest.abort_reason {
                eprintln!("memkin: {reason}");
            }
            println!("{}: {:?}, artifacts in {}", scenario, summary.status, out.display());
            ExitCode::from(summary.status.exit_code() as u8)
        }
        Err(e @ Error::Config(_)) => {
            eprintln!("memkin: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("memkin: {e}");
            ExitCode::from(Status::Aborted.exit_code() as u8)
        }
    }
}
