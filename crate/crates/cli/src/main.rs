//! `chronolens`: temporal imaging of squeezed light from the command line.

mod commands;
mod output;
mod scenario;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{CliError, CliResult, CommandOutput};
use scenario::Scenario;

#[derive(Debug, Parser)]
#[command(name = "chronolens", version, about = "Quantum temporal imaging through an SFG time lens")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Scenario file; defaults apply to everything it omits.
    #[arg(long, global = true)]
    scenario: Option<PathBuf>,

    /// Directory receiving every output file.
    #[arg(long, global = true, default_value = ".")]
    out_dir: PathBuf,

    /// Safety margin of the design inequalities.
    #[arg(long, global = true)]
    margin: Option<f64>,

    /// Number of time-grid samples.
    #[arg(long, global = true)]
    grid_n: Option<usize>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Source and imaged squeezing spectra.
    Spectrum,
    /// Field envelopes of a pixel train along the imaging chain.
    Pixels,
    /// Resolution, pump and field-of-view budgets.
    Design,
    /// Phase mismatch over signal and idler detunings.
    MismatchMap,
    /// Analytic lens against RK4 integration of the coupled-mode equations.
    SfgVerify {
        /// Phase mismatch Δ [1/m].
        #[arg(long, allow_hyphen_values = true)]
        delta: Option<f64>,
        #[arg(long)]
        n_steps: Option<usize>,
    },
}

fn configure_threads() -> CliResult<()> {
    let Ok(value) = std::env::var("CHRONOLENS_THREADS") else {
        return Ok(());
    };
    let n: usize = value.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| {
        CliError::Config(format!("CHRONOLENS_THREADS must be a positive integer, got `{value}`"))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Failure(e.to_string()))
}

fn load_scenario(path: Option<&Path>) -> CliResult<Scenario> {
    let Some(path) = path else {
        return Ok(Scenario::default());
    };
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    let base = path.parent().unwrap_or(Path::new("."));
    Scenario::parse(&text, base).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

fn run(cli: Cli) -> CliResult<CommandOutput> {
    configure_threads()?;
    let mut scenario = load_scenario(cli.scenario.as_deref())?;
    if let Some(m) = cli.margin {
        if !(m > 0.0 && m.is_finite()) {
            return Err(CliError::Config(format!("--margin must be positive, got {m}")));
        }
        scenario.margin = m;
    }
    if cli.grid_n.is_some_and(|n| n < 2) {
        return Err(CliError::Config("--grid-n must be at least 2".into()));
    }
    let output = match cli.command {
        Command::Spectrum => commands::spectrum(&scenario)?,
        Command::Pixels => commands::pixels(&scenario, cli.grid_n)?,
        Command::Design => commands::design(&scenario)?,
        Command::MismatchMap => commands::mismatch(&scenario)?,
        Command::SfgVerify { delta, n_steps } => commands::sfg_verify(&scenario, cli.grid_n, delta, n_steps)?,
    };
    output::write_all(&cli.out_dir, &output.artifacts)
        .map_err(|e| CliError::Failure(format!("cannot write to {}: {e}", cli.out_dir.display())))?;
    for a in &output.artifacts {
        println!("wrote {}", cli.out_dir.join(&a.name).display());
    }
    Ok(output)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(out) if out.feasible => ExitCode::SUCCESS,
        Ok(_) => {
            eprintln!("design infeasible: at least one budget fails; see design_report.json");
            ExitCode::from(3)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
