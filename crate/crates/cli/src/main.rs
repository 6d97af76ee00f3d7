use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use lostfound::recovery::RecoveryKind;
use lostfound_cli::{
    classify_command, dilate_command, fidelity_command, load_channel, recover_command, zoo_export, zoo_listing,
    CliError, Report, Settings,
};

#[derive(Parser)]
#[command(
    name = "lostfound",
    version,
    about = "Classify and correct quantum channels by measuring the environment"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Channel file, or `zoo:<name>`.
    input: String,
    #[arg(long, default_value_t = Settings::default().seed)]
    seed: u64,
    #[arg(long, default_value_t = Settings::default().restarts)]
    restarts: usize,
    /// Descent steps per restart.
    #[arg(long, default_value_t = Settings::default().steps)]
    steps: usize,
    #[arg(long, default_value_t = Settings::default().tol)]
    tol: f64,
    #[arg(long = "basis-samples", default_value_t = Settings::default().basis_samples)]
    basis_samples: usize,
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Common {
    fn settings(&self) -> Settings {
        Settings {
            seed: self.seed,
            restarts: self.restarts,
            steps: self.steps,
            tol: self.tol,
            basis_samples: self.basis_samples,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Quantum,
    Classical,
    Optimal,
}

#[derive(Subcommand)]
enum Command {
    /// Decide the Q, DS, A and S properties.
    Classify(Common),
    /// Build restoring channels and report the corrected fidelity.
    Recover {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        mode: Mode,
        /// Encoding basis for classical mode: `standard` or a basis file.
        #[arg(long)]
        basis: Option<String>,
    },
    /// Channel fidelity with and without optimal correction.
    Fidelity(Common),
    /// Unitary dilation with a pure environment.
    Dilate(Common),
    /// Built-in example channels.
    Zoo {
        #[command(subcommand)]
        action: ZooAction,
    },
}

#[derive(Subcommand)]
enum ZooAction {
    List,
    Export {
        name: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn emit(text: &str, out: Option<&PathBuf>) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| CliError::Internal(format!("{}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run_report(
    common: &Common,
    f: impl FnOnce(&lostfound::channel::KrausChannel, &Settings) -> Result<Report, CliError>,
) -> Result<(), CliError> {
    let ch = load_channel(&common.input)?;
    let report = f(&ch, &common.settings())?;
    eprintln!("{}", report.summary());
    emit(&report.to_json(), common.out.as_ref())
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Classify(common) => run_report(&common, classify_command),
        Command::Recover { common, mode, basis } => {
            let kind = match mode {
                Mode::Quantum => RecoveryKind::Quantum,
                Mode::Classical => RecoveryKind::Classical,
                Mode::Optimal => RecoveryKind::Optimal,
            };
            run_report(&common, |ch, s| recover_command(ch, kind, basis.as_deref(), s))
        }
        Command::Fidelity(common) => run_report(&common, fidelity_command),
        Command::Dilate(common) => run_report(&common, dilate_command),
        Command::Zoo { action } => match action {
            ZooAction::List => emit(&zoo_listing(), None),
            ZooAction::Export { name, out } => emit(&zoo_export(&name)?, out.as_ref()),
        },
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
