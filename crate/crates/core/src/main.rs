use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use ermakov_lnt::scenario::{self, RunConfig, RunOutput};

#[derive(Parser)]
#[command(
    name = "ermakov-lnt",
    version,
    about = "Local-to-normal mode transitions of A2B molecules via the Ermakov equation"
)]
struct Cli {
    /// Directory for CSV files and the manifest.
    #[arg(long, global = true, default_value = "out")]
    out_dir: PathBuf,
    /// Replace the solver's rel_tol (abs_tol keeps its ratio).
    #[arg(long, global = true)]
    tolerance_override: Option<f64>,
    /// Append cm⁻¹ columns to energy tables.
    #[arg(long, global = true)]
    cm1: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate one configuration (or a previous manifest) and write its outputs.
    Run { config: PathBuf },
    /// Recompute the built-in parameter table.
    Table1,
    /// Run sudden, linear and adiabatic schedules side by side.
    Compare { config: PathBuf },
    /// Stationary energies along an angle grid.
    Correlate { config: PathBuf },
}

fn load(path: &Path, cli: &Cli) -> ermakov_lnt::Result<RunConfig> {
    let mut cfg = RunConfig::load(path)?;
    if let Some(tol) = cli.tolerance_override {
        cfg.override_tolerance(tol);
    }
    if cli.cm1 {
        cfg.outputs.cm1 = true;
    }
    Ok(cfg)
}

fn finish(out: RunOutput, dir: &Path) -> ermakov_lnt::Result<ExitCode> {
    out.write_to(dir)?;
    let checks = &out.manifest.manifest.checks;
    for (name, _) in &out.files {
        println!("wrote {}", dir.join(name).display());
    }
    println!("wrote {}", dir.join("manifest.toml").display());
    if out.within_budget() {
        Ok(ExitCode::SUCCESS)
    } else {
        eprintln!(
            "error: invariant budget exceeded (wronskian drift {:e}, companion deviation {:e}, uncertainty deviation {:e}, P_N mismatch {:e})",
            checks.max_wronskian_drift,
            checks.max_companion_deviation,
            checks.max_uncertainty_deviation,
            checks.max_pn_mismatch_t0
        );
        Ok(ExitCode::from(2))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Table1 => {
            print!("{}", scenario::table1_report());
            Ok(ExitCode::SUCCESS)
        }
        Command::Run { config } => load(config, &cli)
            .and_then(|c| scenario::run(&c))
            .and_then(|o| finish(o, &cli.out_dir)),
        Command::Compare { config } => load(config, &cli)
            .and_then(|c| scenario::compare(&c))
            .and_then(|o| finish(o, &cli.out_dir)),
        Command::Correlate { config } => load(config, &cli)
            .and_then(|c| scenario::correlate(&c))
            .and_then(|o| finish(o, &cli.out_dir)),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
