use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use cutlab::config::{self, ConfigError, RunConfig};
use cutlab::{execute, scenarios, Command};

#[derive(Parser)]
#[command(name = "cutlab", version, about = "Cut loci, focal points and injectivity radii on surfaces")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Both injectivity radius estimators and the per-direction profiles.
    Inj(Common),
    /// Cut locus cloud, separating points and dichotomy flags.
    Cutlocus(Common),
    /// Convergence sweep over the configured family.
    Sweep(Common),
    /// Eikonal residuals, integrator refinement, focal brackets and the Warner comparison.
    Validate(Common),
}

#[derive(Args)]
struct Common {
    /// JSON run configuration.
    #[arg(long, conflicts_with = "scenario", required_unless_present = "scenario")]
    config: Option<PathBuf>,
    /// Bundled scenario name.
    #[arg(long)]
    scenario: Option<String>,
    /// Output directory (default `cutlab-out/<scenario>/<command>`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads.
    #[arg(long, env = "CUTLAB_THREADS")]
    threads: Option<usize>,
}

fn load(c: &Common) -> Result<RunConfig, ConfigError> {
    match (&c.config, &c.scenario) {
        (Some(path), _) => config::load(path),
        (None, Some(name)) => scenarios::builtin(name),
        (None, None) => unreachable!("clap requires one of --config and --scenario"),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, common) = match &cli.command {
        Cmd::Inj(c) => (Command::Inj, c),
        Cmd::Cutlocus(c) => (Command::Cutlocus, c),
        Cmd::Sweep(c) => (Command::Sweep, c),
        Cmd::Validate(c) => (Command::Validate, c),
    };
    let cfg = match load(common) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("cutlab: {e}");
            return ExitCode::from(2);
        }
    };
    if common.threads == Some(0) {
        eprintln!("cutlab: --threads must be at least 1");
        return ExitCode::from(2);
    }
    let out = common
        .out
        .clone()
        .or_else(|| cfg.output.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("cutlab-out").join(&cfg.scenario).join(command.name()));
    let threads = common.threads.or(cfg.threads);
    match execute(command, &cfg, &out, threads) {
        Ok(report) => {
            for v in &report.verdicts {
                println!("{} {}: {}", if v.passed { "PASS" } else { "FAIL" }, v.name, v.detail);
            }
            println!("outputs in {}", out.display());
            if report.passed() {
                ExitCode::SUCCESS
            } else {
                eprintln!("cutlab: failed verdicts: {}", report.failed().join(", "));
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("cutlab: {e:#}");
            ExitCode::from(1)
        }
    }
}
