use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use pfc_inductor::capture::{import_capture, rms_of_samples};
use pfc_inductor::controller::Mode;
use pfc_inductor::report::{compare, litz_report, run, to_report_json};
use pfc_inductor::scenario::load_scenario;
use pfc_inductor::{Error, Strategy};

#[derive(Parser)]
#[command(
    name = "pfcsim",
    version,
    about = "Boost PFC inductor loss and thermal simulator"
)]
struct Cli {
    /// Evaluate everything on one thread.
    #[arg(long, global = true)]
    sequential: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario and write the report bundle.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Override the controller mode from the scenario.
        #[arg(long, value_enum)]
        mode: Option<ModeArg>,
    },
    /// Run two scenarios and write a side-by-side comparison.
    Compare {
        #[arg(long)]
        config_a: PathBuf,
        #[arg(long)]
        config_b: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Recommend a litz winding for the scenario.
    Litz {
        #[arg(long)]
        config: PathBuf,
    },
    /// RMS of an oscilloscope capture (CSV with time_s,current_A).
    Rms {
        #[arg(long)]
        capture: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    DcmCrcmQr,
    FixedFreqCcm,
    Mixed,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::DcmCrcmQr => Mode::DcmCrcmQr,
            ModeArg::FixedFreqCcm => Mode::FixedFreqCcm,
            ModeArg::Mixed => Mode::Mixed,
        }
    }
}

fn execute(cli: Cli) -> Result<(), Error> {
    let strategy = if cli.sequential {
        Strategy::Sequential
    } else {
        Strategy::default()
    };
    match cli.command {
        Command::Simulate { config, out, mode } => {
            let mut scenario = load_scenario(&config)?;
            if let Some(m) = mode {
                scenario.controller.mode = m.into();
                scenario.controller.validate("controller")?;
            }
            let sim = run(&scenario, &out, strategy)?;
            print!("{}", to_report_json(&sim.summary())?);
        }
        Command::Compare {
            config_a,
            config_b,
            out,
        } => {
            let a = load_scenario(&config_a)?;
            let b = load_scenario(&config_b)?;
            print!("{}", compare(&a, &b, &out, strategy)?.table());
        }
        Command::Litz { config } => {
            let scenario = load_scenario(&config)?;
            print!("{}", to_report_json(&litz_report(&scenario, strategy)?)?);
        }
        Command::Rms { capture } => {
            let cap = import_capture(&capture)?;
            let rms = rms_of_samples(&cap)?;
            print!(
                "{}",
                to_report_json(&json!({ "samples": cap.time.len(), "rms_current_A": rms }))?
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let body = json!({ "error": { "kind": e.kind(), "message": e.to_string() } });
            eprintln!("{body}");
            ExitCode::from(e.exit_code())
        }
    }
}
