use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use rhd_lab::run::{
    check_compat, resolve_output_dir, run_scenario, validate_model, OUTPUT_DIR_ENV,
};
use rhd_lab::scenario::builtin_scenarios;
use rhd_lab::{parse_config, LabError, RunConfig};

#[derive(Parser)]
#[command(
    name = "rhdlab",
    version,
    about = "Compressible radiation hydrodynamics laboratory"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a scenario and write snapshots, diagnostics and summary.json.
    Run { config: PathBuf },
    /// Classify the compatibility of the scenario's initial data at vacuum.
    CheckCompat { config: PathBuf },
    /// Check kernel integrability and coefficient regularity of the model.
    ValidateModel { config: PathBuf },
    /// Print the built-in scenarios.
    ListScenarios,
}

fn load(path: &Path) -> Result<RunConfig, LabError> {
    let text = std::fs::read_to_string(path).map_err(|e| LabError::io(path, e))?;
    Ok(parse_config(&text)?)
}

fn dispatch(cmd: Command) -> Result<ExitCode, LabError> {
    match cmd {
        Command::Run { config } => {
            let cfg = load(&config)?;
            let dir = resolve_output_dir(&cfg);
            let out = run_scenario(&cfg, &dir)?;
            let s = &out.summary;
            println!("scenario       {}", s.scenario);
            println!("output         {}", dir.display());
            println!(
                "slabs          {} ({} Picard iterations)",
                s.picard.slabs, s.picard.total_iterations
            );
            println!("mass drift     {:.3e}", s.conservation.max_relative_drift.0);
            println!("phi(final)     {:.6e}", s.final_state.phi.0);
            println!("compatibility  {}", s.verdicts.compatibility);
            println!("far field      {}", s.verdicts.farfield);
            println!(
                "monitor flags  {}",
                if s.verdicts.monitor_flagged {
                    "raised"
                } else {
                    "none"
                }
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::CheckCompat { config } => {
            let rep = check_compat(&load(&config)?)?;
            println!("{:>14}  {:>14}", "rho_cut", "g_l2");
            for (cut, g) in &rep.refinement_trace {
                println!("{cut:>14.6e}  {g:>14.6e}");
            }
            println!("verdict: {}", rep.verdict);
            Ok(ExitCode::SUCCESS)
        }
        Command::ValidateModel { config } => {
            let reports = validate_model(&load(&config)?)?;
            let mut ok = true;
            for (name, rep) in &reports {
                println!("== {name}\n{rep}");
                ok &= rep.passed();
            }
            println!(
                "{}",
                if ok {
                    "all checks passed"
                } else {
                    "some checks FAILED"
                }
            );
            Ok(if ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
        Command::ListScenarios => {
            for s in builtin_scenarios() {
                println!("{:<18} {}", s.name, s.description);
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error [{}]: {e}", e.category());
            if matches!(e, LabError::Io { .. }) {
                eprintln!("(the output directory can be overridden with {OUTPUT_DIR_ENV})");
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
