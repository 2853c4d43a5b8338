//! `sim` — command-line front end for the feedback-loop atom solvers.
//!
//! ```text
//! sim <mode> --config <file> [--out <path>] [--format csv|jsonl] [--threads N]
//! sim preset [<name>] …
//! sim validate [--criteria 1,3] [--inject-gamma-prime X] …
//! ```
//!
//! Exit codes: 0 success (warnings go to stderr), 2 configuration error,
//! 3 numerical/runtime failure (including failed validation criteria).

mod config;
mod modes;
mod output;
mod presets;

use std::fmt;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

use output::Format;

#[derive(Debug)]
pub enum AppError {
    /// Bad input: unreadable/invalid config, out-of-domain parameters.
    Config(String),
    /// Failure while running or writing results.
    Runtime(String),
    Core(vqed_core::Error),
}

impl fmt::Display for AppError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AppError::Config(m) => write!(f, "{m}"),
            AppError::Runtime(m) => write!(f, "{m}"),
            AppError::Core(e) => write!(f, "{e}"),
        }
    }
}

impl From<vqed_core::Error> for AppError {
    fn from(e: vqed_core::Error) -> Self {
        AppError::Core(e)
    }
}

impl AppError {
    fn exit_code(&self) -> i32 {
        use vqed_core::Error as E;
        match self {
            AppError::Config(_) => 2,
            AppError::Runtime(_) => 3,
            AppError::Core(e) => match e {
                // The user asked for something outside the model's domain.
                E::InvalidParam(_) | E::UndefinedRegime(_) | E::BadCheckpoint(_) => 2,
                _ => 3,
            },
        }
    }
}

#[derive(Parser)]
#[command(
    name = "sim",
    version,
    about = "Solvers for a driven V-level atom in a mirror-terminated waveguide"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Output file (stdout when omitted).
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Row format; also settable per config file under [output].
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,

    /// Worker threads for grids and scans (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Markov steady state of the atom (single row of observables).
    Steady {
        #[arg(long)]
        config: PathBuf,
    },
    /// Markov master-equation time evolution from the ground state.
    Evolve {
        #[arg(long)]
        config: PathBuf,
    },
    /// Time-bin (finite round-trip delay) evolution.
    Mps {
        #[arg(long)]
        config: PathBuf,
    },
    /// Two-mode cavity model versus its adiabatic waveguide limit.
    Cavity {
        #[arg(long)]
        config: PathBuf,
    },
    /// Required drive and level energies of the phase-tunable dark state.
    DarkCurve {
        #[arg(long)]
        config: PathBuf,
    },
    /// Steady-state observables over a 1D or 2D parameter grid.
    Sweep {
        #[arg(long)]
        config: PathBuf,
    },
    /// Run a canned figure preset; without a name, list the presets.
    Preset { name: Option<String> },
    /// Cross-solver validation suite (one PASS/FAIL line per criterion).
    Validate {
        /// Comma-separated criterion ids (all when omitted).
        #[arg(long, value_delimiter = ',')]
        criteria: Vec<usize>,
        /// Negative control: run the loss-rate check with a wrong rate; the
        /// corresponding criterion must then fail (exit 3).
        #[arg(long)]
        inject_gamma_prime: Option<f64>,
    },
}

fn resolve_io(
    cli_out: Option<PathBuf>,
    cli_format: Option<Format>,
    cfg: Option<&config::RunConfig>,
) -> Result<(Option<PathBuf>, Format), AppError> {
    let out = cli_out.or_else(|| cfg.and_then(|c| c.output.path.clone()));
    let format = match cli_format {
        Some(f) => f,
        None => match cfg.and_then(|c| c.output.format.as_deref()) {
            Some(name) => Format::from_name(name)?,
            None => Format::Csv,
        },
    };
    Ok((out, format))
}

fn dispatch(cli: Cli) -> Result<i32, AppError> {
    let Cli {
        command,
        out,
        format,
        threads: _,
    } = cli;
    match command {
        Command::Steady { config: path } => {
            let cfg = config::load(&path, "steady")?;
            let (out, fmt) = resolve_io(out, format, Some(&cfg))?;
            modes::steady(&cfg, out.as_deref(), fmt)?;
            Ok(0)
        }
        Command::Evolve { config: path } => {
            let cfg = config::load(&path, "evolve")?;
            let (out, fmt) = resolve_io(out, format, Some(&cfg))?;
            modes::evolve_mode(&cfg, out.as_deref(), fmt)?;
            Ok(0)
        }
        Command::Mps { config: path } => {
            let cfg = config::load(&path, "mps")?;
            let (out, fmt) = resolve_io(out, format, Some(&cfg))?;
            modes::mps_mode(&cfg, out.as_deref(), fmt)?;
            Ok(0)
        }
        Command::Cavity { config: path } => {
            let cfg = config::load(&path, "cavity")?;
            let (out, fmt) = resolve_io(out, format, Some(&cfg))?;
            modes::cavity_mode(&cfg, out.as_deref(), fmt)?;
            Ok(0)
        }
        Command::DarkCurve { config: path } => {
            let cfg = config::load(&path, "dark-curve")?;
            let (out, fmt) = resolve_io(out, format, Some(&cfg))?;
            modes::dark_curve(&cfg, out.as_deref(), fmt)?;
            Ok(0)
        }
        Command::Sweep { config: path } => {
            let cfg = config::load(&path, "sweep")?;
            let (out, fmt) = resolve_io(out, format, Some(&cfg))?;
            modes::sweep(&cfg, out.as_deref(), fmt)?;
            Ok(0)
        }
        Command::Preset { name } => match name {
            None => {
                presets::list();
                Ok(0)
            }
            Some(name) => {
                let (out, fmt) = resolve_io(out, format, None)?;
                presets::run_preset(&name, out.as_deref(), fmt)?;
                Ok(0)
            }
        },
        Command::Validate {
            criteria,
            inject_gamma_prime,
        } => {
            for &id in &criteria {
                if !(1..=vqed_core::suite::CRITERIA).contains(&id) {
                    return Err(AppError::Config(format!(
                        "criterion id {id} out of range 1..={}",
                        vqed_core::suite::CRITERIA
                    )));
                }
            }
            let (out, fmt) = resolve_io(out, format, None)?;
            let all_pass = modes::validate(&criteria, inject_gamma_prime, out.as_deref(), fmt)?;
            if all_pass {
                Ok(0)
            } else {
                eprintln!("validation failed");
                Ok(3)
            }
        }
    }
}

fn main() {
    // Single-threaded BLAS keeps grid cells deterministic and lets rayon own
    // the parallelism.
    std::env::set_var("OPENBLAS_NUM_THREADS", "1");
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();

    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            log::warn!("could not size the thread pool: {e}");
        }
    }
    let code = match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    };
    std::process::exit(code);
}
