use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use dprd_sim::config::{self, ScenarioConfig};
use dprd_sim::fitio;
use dprd_sim::sim::{self, SimError};
use dprd_sim::sweep::{self, SweepSpec};

/// Simulator for joint UAV video coding and transmission optimization.
#[derive(Debug, Parser)]
#[command(name = "dprd-sim", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct CommonArgs {
    /// Scenario JSON; defaults to the built-in baseline.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory for CSV/JSON artifacts.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// RNG seed. The simulation pipeline is deterministic; the seed exists
    /// for forward compatibility and is recorded in summaries only.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one scenario and write per-slot CSV plus a summary JSON.
    Simulate(CommonArgs),
    /// Run one simulation per cell of a parameter grid.
    Sweep {
        #[command(flatten)]
        common: CommonArgs,
        /// Sweep axes JSON, e.g. {"axes":[["d_max",[2.8,2.9]]]}.
        #[arg(long)]
        spec: PathBuf,
    },
    /// Fit model coefficients from sample CSV files.
    Fit {
        #[command(flatten)]
        common: CommonArgs,
        /// Residual-deviation samples, header lambda,qp,sigma.
        #[arg(long)]
        sigma_csv: Option<PathBuf>,
        /// Delay-coefficient samples, header q,dcoe.
        #[arg(long)]
        dcoe_csv: Option<PathBuf>,
    },
    /// Run a scenario with the brute-force oracle on every slot and report
    /// the optimality gap.
    OracleCheck(CommonArgs),
}

// exit codes of the CLI contract
const EXIT_CONFIG: u8 = 2;
const EXIT_INFEASIBLE: u8 = 3;
const EXIT_NUMERIC: u8 = 4;

fn fail(code: u8, message: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {message}");
    ExitCode::from(code)
}

fn load_config(common: &CommonArgs) -> Result<ScenarioConfig, ExitCode> {
    match &common.config {
        Some(path) => config::load_scenario(path).map_err(|e| fail(EXIT_CONFIG, e)),
        None => Ok(ScenarioConfig::default()),
    }
}

fn ensure_out_dir(dir: &Path) -> Result<(), ExitCode> {
    std::fs::create_dir_all(dir).map_err(|e| {
        fail(EXIT_NUMERIC, format!("cannot create output directory {}: {e}", dir.display()))
    })
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), ExitCode> {
    let text = serde_json::to_string_pretty(value)
        .map_err(|e| fail(EXIT_NUMERIC, format!("cannot serialize {}: {e}", path.display())))?;
    std::fs::write(path, text + "\n")
        .map_err(|e| fail(EXIT_NUMERIC, format!("cannot write {}: {e}", path.display())))
}

fn run_simulate(common: &CommonArgs, force_oracle: bool) -> Result<(), ExitCode> {
    let mut config = load_config(common)?;
    if force_oracle {
        config.oracle_every = 1;
    }
    ensure_out_dir(&common.out)?;
    let csv_path = common.out.join("slots.csv");
    match sim::simulate(&config) {
        Ok(artifact) => {
            sim::write_csv(&csv_path, &artifact.records)
                .map_err(|e| fail(EXIT_NUMERIC, format!("cannot write slot CSV: {e}")))?;
            write_json(&common.out.join("summary.json"), &artifact.summary)?;
            if force_oracle {
                #[derive(Serialize)]
                struct GapReport {
                    slots: u64,
                    max_gap: Option<f64>,
                    mean_gap: Option<f64>,
                }
                let report = GapReport {
                    slots: artifact.summary.slots,
                    max_gap: artifact.summary.max_oracle_gap,
                    mean_gap: artifact.summary.mean_oracle_gap,
                };
                write_json(&common.out.join("gap_report.json"), &report)?;
                println!(
                    "oracle gap over {} slots: max {:?}, mean {:?}",
                    report.slots, report.max_gap, report.mean_gap
                );
            } else {
                println!(
                    "simulated {} slots; final X = {}, S_X = {}",
                    artifact.summary.slots, artifact.summary.final_x, artifact.summary.final_s_x
                );
            }
            Ok(())
        }
        Err(SimError::Infeasible { slot, constraints, partial }) => {
            // keep whatever completed before the infeasible slot
            let _ = sim::write_csv(&csv_path, &partial);
            Err(fail(
                EXIT_INFEASIBLE,
                format!("slot {slot} has no feasible decision (blocking: {constraints:?}); partial output kept"),
            ))
        }
        Err(e @ SimError::OracleInfeasible { .. }) => Err(fail(EXIT_INFEASIBLE, e)),
    }
}

fn run_sweep(common: &CommonArgs, spec_path: &Path) -> Result<(), ExitCode> {
    let config = load_config(common)?;
    let spec_text = std::fs::read_to_string(spec_path)
        .map_err(|e| fail(EXIT_CONFIG, format!("cannot read sweep spec: {e}")))?;
    let spec: SweepSpec = serde_json::from_str(&spec_text)
        .map_err(|e| fail(EXIT_CONFIG, format!("sweep spec schema error: {e}")))?;
    ensure_out_dir(&common.out)?;
    let cells = sweep::sweep(&config, &spec).map_err(|e| fail(EXIT_CONFIG, e))?;
    let failed = cells.iter().filter(|c| c.error.is_some()).count();
    sweep::write_csv(&common.out.join("sweep.csv"), &spec, &cells)
        .map_err(|e| fail(EXIT_NUMERIC, format!("cannot write sweep CSV: {e}")))?;
    println!("swept {} cells ({failed} failed)", cells.len());
    if failed == cells.len() {
        return Err(fail(EXIT_INFEASIBLE, "every sweep cell failed"));
    }
    Ok(())
}

fn run_fit(
    common: &CommonArgs,
    sigma_csv: Option<&Path>,
    dcoe_csv: Option<&Path>,
) -> Result<(), ExitCode> {
    if sigma_csv.is_none() && dcoe_csv.is_none() {
        return Err(fail(EXIT_CONFIG, "fit needs --sigma-csv and/or --dcoe-csv"));
    }
    ensure_out_dir(&common.out)?;
    let report = fitio::fit_from_files(sigma_csv, dcoe_csv).map_err(|e| match e {
        fitio::FitIoError::Fit(_) => fail(EXIT_NUMERIC, e),
        _ => fail(EXIT_CONFIG, e),
    })?;
    write_json(&common.out.join("fit.json"), &report)?;
    println!("fit written to {}", common.out.join("fit.json").display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Simulate(common) => run_simulate(common, false),
        Command::OracleCheck(common) => run_simulate(common, true),
        Command::Sweep { common, spec } => run_sweep(common, spec),
        Command::Fit { common, sigma_csv, dcoe_csv } => {
            run_fit(common, sigma_csv.as_deref(), dcoe_csv.as_deref())
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(code) => code,
    }
}
