use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};
use testimony_core::belief::UpdateMode;
use testimony_core::bundled;
use testimony_core::experiment::{self, Grid, MAX_GRID_POINTS};
use testimony_core::scenario::Scenario;

#[derive(Parser)]
#[command(name = "testimony", version, about = "Run testimony-updating scenarios, proposition batteries and sweeps")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write trace.csv, summary.json and report.txt
    Run {
        /// Scenario file, or the name of a bundled scenario
        scenario: String,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Run a sweep template over a parameter grid and write sweep.csv
    Sweep {
        template: String,
        #[arg(long)]
        grid: String,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Largest number of grid points accepted
        #[arg(long, default_value_t = MAX_GRID_POINTS)]
        cap: usize,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Check a scenario against the schema without running it
    Validate { scenario: String },
    /// List the bundled scenarios
    ListScenarios,
}

#[derive(Args)]
struct Overrides {
    #[arg(long)]
    horizon: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum)]
    mode: Option<Mode>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Chained,
    Standard,
}

impl Overrides {
    fn apply(&self, s: Scenario) -> Scenario {
        let mode = self.mode.map(|m| match m {
            Mode::Chained => UpdateMode::Chained,
            Mode::Standard => UpdateMode::Standard,
        });
        s.with_overrides(self.horizon, self.seed, mode)
    }
}

/// A failure with its exit code: 1 for I/O, 2 for invalid input, 3 for failed checks.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn io(e: anyhow::Error) -> Self {
        Failure { code: 1, message: format!("{e:#}") }
    }

    fn invalid(message: impl Into<String>) -> Self {
        Failure { code: 2, message: message.into() }
    }
}

/// Reads `arg` from disk, falling back to a bundled file of that name.
fn read_input(arg: &str) -> Result<String, Failure> {
    let path = Path::new(arg);
    if path.exists() {
        return std::fs::read_to_string(path).with_context(|| format!("reading {arg}")).map_err(Failure::io);
    }
    bundled::get(arg).map(str::to_string).ok_or_else(|| Failure { code: 1, message: format!("{arg}: no such file or bundled scenario") })
}

fn load_scenario(arg: &str, overrides: Option<&Overrides>) -> Result<Scenario, Failure> {
    let text = read_input(arg)?;
    let s: Scenario = serde_json::from_str(&text).map_err(|e| Failure::invalid(format!("{arg}: {e}")))?;
    let s = match overrides {
        Some(o) => o.apply(s),
        None => s,
    };
    let problems = s.diagnostics();
    if !problems.is_empty() {
        let list: Vec<String> = problems.iter().map(|p| format!("  - {p}")).collect();
        return Err(Failure::invalid(format!("{arg} is not a valid scenario:\n{}", list.join("\n"))));
    }
    Ok(s)
}

fn execute(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Run { scenario, out, overrides } => {
            let s = load_scenario(&scenario, Some(&overrides))?;
            let output = experiment::run(&s).map_err(|e| Failure::invalid(e.to_string()))?;
            experiment::write_artifacts(&output, &out).with_context(|| format!("writing to {}", out.display())).map_err(Failure::io)?;
            print!("{}", experiment::report(&output.summary));
            if !output.summary.passed {
                return Err(Failure { code: 3, message: "one or more checks failed".into() });
            }
        }
        Command::Sweep { template, grid, out, cap, overrides } => {
            let s = load_scenario(&template, Some(&overrides))?;
            let grid_text = read_input(&grid)?;
            let g: Grid = serde_json::from_str(&grid_text).map_err(|e| Failure::invalid(format!("{grid}: {e}")))?;
            let rows = experiment::sweep(&s, &g, cap).map_err(|e| Failure::invalid(e.to_string()))?;
            std::fs::create_dir_all(&out).and_then(|_| std::fs::write(out.join("sweep.csv"), experiment::sweep_csv(&s, &g, &rows)))
                .with_context(|| format!("writing to {}", out.display()))
                .map_err(Failure::io)?;
            let converged = rows.iter().filter(|r| r.converged).count();
            println!("{} grid points, {converged} converged; wrote {}", rows.len(), out.join("sweep.csv").display());
            for r in rows.iter().filter(|r| !r.flag.is_empty()) {
                println!("  point {}: {}", r.index, r.flag);
            }
        }
        Command::Validate { scenario } => {
            let s = load_scenario(&scenario, None)?;
            println!("{}: valid ({} assertions)", s.name, s.assertions.len());
        }
        Command::ListScenarios => {
            for name in bundled::scenario_names() {
                let s: Option<Scenario> = bundled::get(name).and_then(|t| serde_json::from_str(t).ok());
                println!("{name:<36} {}", s.map(|s| s.description).unwrap_or_default());
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
