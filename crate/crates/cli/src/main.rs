mod commands;
mod files;
mod output;

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use output::Format;

#[derive(Parser, Debug)]
#[command(name = "fockhtm", version, about = "Seeded runs of the two-photon invariant experiments")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct Global {
    /// Master seed for every random draw.
    #[arg(long, global = true, default_value_t = 1)]
    pub seed: u64,
    /// Directory receiving `<command>.<format>`; stdout when absent.
    #[arg(long, global = true)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Shots per setting or per observable; exact probabilities when absent.
    #[arg(long, global = true)]
    pub shots: Option<u64>,
    #[arg(long, global = true, value_enum, default_value_t = Detector::Ideal)]
    pub detector_model: Detector,
    /// Directory for cached Hermitian frames.
    #[arg(long, global = true, env = "FOCKHTM_FRAME_CACHE")]
    #[serde(skip)]
    pub frame_cache: Option<PathBuf>,
    /// Decimal places in emitted values.
    #[arg(long, global = true)]
    pub precision: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Detector {
    Ideal,
    Splitting,
}

impl From<Detector> for fockhtm::experiment::DetectorModel {
    fn from(d: Detector) -> Self {
        match d {
            Detector::Ideal => fockhtm::experiment::DetectorModel::Ideal,
            Detector::Splitting => fockhtm::experiment::DetectorModel::Splitting,
        }
    }
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "kebab-case", tag = "command")]
enum Command {
    /// Prepared-state table with invariants, checked against the printed values.
    TableS1,
    /// Invariants of ψ_α on a grid of α for plotting.
    Fig3Theory(commands::Fig3Args),
    /// Invariants before and after evolution, read out exactly, by tomography and directly.
    Conserve(commands::ConserveArgs),
    /// Invariants and density-vector coefficients of a state file.
    Invariants(commands::InvariantsArgs),
    /// State file for the HOM-prepared state at a half-wave angle.
    Prepare(commands::PrepareArgs),
    /// Simulated tomography counts.
    TomoSimulate(commands::TomoSimulateArgs),
    /// Least-squares reconstruction from a counts file.
    TomoReconstruct(commands::TomoReconstructArgs),
    /// Haar-random polarization unitaries with their wave-plate angles.
    SampleU2(commands::SampleU2Args),
    /// Fit of the HOM dip model to delay/coincidence samples.
    DipFit(commands::DipFitArgs),
}

#[derive(Debug)]
pub enum CliError {
    Input(String),
    Mismatch(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Input(s) => write!(f, "input error: {s}"),
            CliError::Mismatch(s) => write!(f, "numeric mismatch: {s}"),
        }
    }
}

impl From<fockhtm::Error> for CliError {
    fn from(e: fockhtm::Error) -> Self {
        use fockhtm::Error::*;
        match e {
            Convergence { .. } | InvariantMismatch { .. } | BlockStructure(_) | FrameCheck(_) => {
                CliError::Mismatch(e.to_string())
            }
            _ => CliError::Input(e.to_string()),
        }
    }
}

const EXIT_MISMATCH: u8 = 2;
const EXIT_INPUT: u8 = 3;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_MISMATCH),
        Err(e) => {
            eprintln!("fockhtm: {e}");
            ExitCode::from(match e {
                CliError::Input(_) => EXIT_INPUT,
                CliError::Mismatch(_) => EXIT_MISMATCH,
            })
        }
    }
}

fn run(cli: &Cli) -> Result<bool, CliError> {
    let ctx = commands::Context::new(cli.global.clone(), &cli.command)?;
    let (artifact, pass) = match &cli.command {
        Command::TableS1 => commands::table_s1(&ctx)?,
        Command::Fig3Theory(a) => commands::fig3_theory(&ctx, a)?,
        Command::Conserve(a) => commands::conserve(&ctx, a)?,
        Command::Invariants(a) => commands::invariants(&ctx, a)?,
        Command::Prepare(a) => commands::prepare(&ctx, a)?,
        Command::TomoSimulate(a) => commands::tomo_simulate(&ctx, a)?,
        Command::TomoReconstruct(a) => commands::tomo_reconstruct(&ctx, a)?,
        Command::SampleU2(a) => commands::sample_u2(&ctx, a)?,
        Command::DipFit(a) => commands::dip_fit(&ctx, a)?,
    };
    let text = artifact.render(cli.global.format);
    match &cli.global.out {
        Some(dir) => {
            std::fs::create_dir_all(dir).map_err(|e| CliError::Input(format!("{}: {e}", dir.display())))?;
            let path = dir.join(format!("{}.{}", ctx.command, cli.global.format.extension()));
            std::fs::write(&path, text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
            eprintln!("wrote {}", path.display());
        }
        None => print!("{text}"),
    }
    if !pass {
        eprintln!("fockhtm: one or more checks failed");
    }
    Ok(pass)
}
