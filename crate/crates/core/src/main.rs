use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use kemmer::scenario::{execute, list_scenarios, prepare, ScenarioConfig, ScenarioKind, VerifySection};

const EXIT_FAIL: u8 = 1;
const EXIT_INVALID: u8 = 2;
const DEFAULT_OUT: &str = "out";

/// Bohmian trajectories for Duffin-Kemmer-Petiau fields.
#[derive(Parser)]
#[command(name = "kemmer", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Artifact directory; overrides `[output] dir`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Master seed; overrides the configured one.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker threads for trajectory fan-out (default: one per processor).
    #[arg(long, global = true)]
    workers: Option<usize>,

    /// Also write the DKP matrices of both representations.
    #[arg(long, global = true)]
    dump_matrices: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario file.
    Run { config: PathBuf },
    /// Print the scenario catalog.
    List,
    /// Run the invariant suite of every module.
    Verify {
        /// Smaller ensembles and shorter runs.
        #[arg(long)]
        fast: bool,
    },
}

fn invalid(msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(EXIT_INVALID)
}

fn load(cli: &Cli) -> Result<ScenarioConfig, String> {
    match &cli.command {
        Command::Run { config } => {
            let text = fs::read_to_string(config).map_err(|e| format!("cannot read {}: {e}", config.display()))?;
            ScenarioConfig::parse(&text).map_err(|e| format!("{}: {e}", config.display()))
        }
        Command::Verify { fast } => Ok(ScenarioConfig {
            kind: ScenarioKind::Verify,
            seed: None,
            field: None,
            guidance: None,
            grid: None,
            observer: None,
            verify: Some(VerifySection { fast: Some(*fast) }),
            output: None,
        }),
        Command::List => unreachable!("list takes no configuration"),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Command::List = cli.command {
        print!("{}", list_scenarios());
        return ExitCode::SUCCESS;
    }
    if let Some(n) = cli.workers {
        if n == 0 {
            return invalid("--workers must be at least 1");
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            return invalid(e);
        }
    }
    let config = match load(&cli) {
        Ok(c) => c,
        Err(e) => return invalid(e),
    };
    let prepared = match prepare(&config, cli.seed) {
        Ok(p) => p,
        Err(e) => return invalid(e),
    };
    let out = cli
        .out
        .clone()
        .or_else(|| config.output.as_ref().and_then(|o| o.dir.clone()).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT));
    if let Err(e) = fs::create_dir_all(&out) {
        eprintln!("error: cannot create {}: {e}", out.display());
        return ExitCode::from(EXIT_FAIL);
    }
    match execute(&prepared, &out, cli.dump_matrices) {
        Ok(report) => {
            print!("{}", report.render());
            if report.passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(EXIT_FAIL)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_FAIL)
        }
    }
}
