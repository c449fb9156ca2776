use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use skewlab::lab::{self, load_config, load_report, render_summary};
use skewlab::LabError;

/// Experiment runner for quasi-periodic reaction-diffusion semiflows.
///
/// Exit status: 0 all verifiers pass, 1 a verifier failed or errored,
/// 2 configuration error, 3 only unmet hypotheses.
#[derive(Parser)]
#[command(name = "skewlab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment and write its report, trajectory and plot data.
    Run {
        config: PathBuf,
        /// Output directory; overrides the one in the config.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check a config without running it.
    Validate { config: PathBuf },
    /// Re-render the summary of a finished run.
    Report { dir: PathBuf },
}

fn config_error(e: &LabError) -> bool {
    matches!(e, LabError::ConfigInvalid(_))
}

fn fail(e: LabError, code: u8) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(code)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = lab::configure_workers() {
        return fail(e, 2);
    }
    match cli.command {
        Command::Run { config, out } => {
            let cfg = match load_config(&config) {
                Ok(c) => c,
                Err(e) => return fail(e, 2),
            };
            let out = out.or_else(|| cfg.output_dir.clone());
            match lab::run(&cfg, out.as_deref()) {
                Ok(report) => {
                    print!("{}", render_summary(&report));
                    ExitCode::from(report.exit_code() as u8)
                }
                Err(e) => {
                    let code = if config_error(&e) { 2 } else { 1 };
                    fail(e, code)
                }
            }
        }
        Command::Validate { config } => match lab::validate(&config) {
            Ok(v) => {
                println!(
                    "{}: valid ({}, dt = {:.6}, L = {:.4}, verifiers: {})",
                    config.display(),
                    v.scenario,
                    v.dt,
                    v.lipschitz,
                    if v.verifiers.is_empty() {
                        "none".to_string()
                    } else {
                        v.verifiers.join(", ")
                    }
                );
                ExitCode::SUCCESS
            }
            Err(e) => fail(e, 2),
        },
        Command::Report { dir } => match load_report(&dir) {
            Ok(report) => {
                let text = render_summary(&report);
                if let Err(e) = std::fs::write(dir.join("summary.md"), &text) {
                    return fail(e.into(), 1);
                }
                print!("{text}");
                ExitCode::from(report.exit_code() as u8)
            }
            Err(e) => fail(e, 1),
        },
    }
}
