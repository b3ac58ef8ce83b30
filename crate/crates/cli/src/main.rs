//! `femtohom`: dip curves, visibility sweeps and amplitude maps from a
//! preset or a TOML scenario file, written as CSV.

mod config;
mod presets;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use femtohom::{Error, TabulatedSpectrum};

use config::{parse, QuadratureOverrides, Scenario};

#[derive(Parser, Debug)]
#[command(name = "femtohom", version, about = "Two-photon interference with femtosecond pumping")]
struct Args {
    /// Built-in figure preset (fig2 … fig8).
    #[arg(long, conflicts_with = "config", required_unless_present_any = ["config", "list_presets"])]
    preset: Option<String>,
    /// Scenario file in TOML.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Gauss-Legendre nodes per panel.
    #[arg(long)]
    quad_order: Option<usize>,
    /// Relative tolerance of the adaptive quadrature.
    #[arg(long)]
    quad_tol: Option<f64>,
    /// Maximum number of panel refinements.
    #[arg(long)]
    quad_max_refine: Option<u32>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
    /// Write results even when some samples missed the tolerance.
    #[arg(long)]
    allow_nonconverged: bool,
    /// Print the preset names and exit.
    #[arg(long)]
    list_presets: bool,
}

const EXIT_IO: u8 = 1;
const EXIT_INPUT: u8 = 2;
const EXIT_NUMERIC: u8 = 3;

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn input(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_INPUT,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::InvalidParameter { .. }
            | Error::NonPositiveMismatch { .. }
            | Error::OutOfRegime(_)
            | Error::DegenerateKernel
            | Error::Spectrum(_) => EXIT_INPUT,
            Error::NonFiniteIntegrand { .. }
            | Error::BranchGuard { .. }
            | Error::WindowTruncation { .. }
            | Error::SearchFailed(_) => EXIT_NUMERIC,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

/// Tabulated spectrum named by a scenario, resolved against the directory
/// of the scenario file.
fn spectrum(args: &Args, scenario: &Scenario) -> Result<Option<TabulatedSpectrum>, Failure> {
    let Some(name) = &scenario.spectrum_file else {
        return Ok(None);
    };
    let base = args
        .config
        .as_deref()
        .and_then(|c| c.parent())
        .unwrap_or_else(|| std::path::Path::new("."));
    Ok(Some(TabulatedSpectrum::from_file(&base.join(name))?))
}

fn scenarios(args: &Args, overrides: &QuadratureOverrides) -> Result<Vec<Scenario>, Failure> {
    let (docs, source) = match (&args.preset, &args.config) {
        (Some(name), _) => {
            let docs = presets::documents(name).ok_or_else(|| {
                Failure::input(format!("unknown preset {name:?}; known: {}", presets::NAMES.join(", ")))
            })?;
            (docs, format!("preset {name}"))
        }
        (None, Some(path)) => {
            let text = std::fs::read_to_string(path).map_err(|e| Failure {
                code: EXIT_IO,
                message: format!("cannot read {}: {e}", path.display()),
            })?;
            (vec![text], path.display().to_string())
        }
        (None, None) => return Err(Failure::input("need --preset or --config")),
    };
    docs.iter()
        .map(|d| parse(d, overrides).map_err(|e| Failure::input(format!("{source}: {e}"))))
        .collect()
}

fn execute(args: &Args) -> Result<(), Failure> {
    if args.list_presets {
        println!("{}", presets::NAMES.join("\n"));
        return Ok(());
    }
    if let Some(n) = args.threads {
        if n == 0 {
            return Err(Failure::input("--threads must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::input(format!("thread pool: {e}")))?;
    }
    let overrides = QuadratureOverrides {
        base_order: args.quad_order,
        rel_tol: args.quad_tol,
        max_refinements: args.quad_max_refine,
    };
    let scenarios = scenarios(args, &overrides)?;
    std::fs::create_dir_all(&args.out).map_err(|e| Failure {
        code: EXIT_IO,
        message: format!("cannot create {}: {e}", args.out.display()),
    })?;
    for scenario in &scenarios {
        let spectrum = spectrum(args, scenario)?;
        let rendered = run::run(scenario, spectrum.as_ref())?;
        if rendered.nonconverged > 0 && !args.allow_nonconverged {
            return Err(Failure {
                code: EXIT_NUMERIC,
                message: format!(
                    "{}: {} sample(s) missed the quadrature tolerance; raise --quad-max-refine or pass --allow-nonconverged",
                    scenario.output, rendered.nonconverged
                ),
            });
        }
        let path = args.out.join(&scenario.output);
        std::fs::write(&path, rendered.csv).map_err(|e| Failure {
            code: EXIT_IO,
            message: format!("cannot write {}: {e}", path.display()),
        })?;
        if rendered.nonconverged > 0 {
            eprintln!("warning: {} non-converged sample(s) in {}", rendered.nonconverged, path.display());
        }
        println!("{}", path.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let args = Args::parse();
    match execute(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
