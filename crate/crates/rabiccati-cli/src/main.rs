//! Command-line front end: build solvable cases, export traces, run the
//! verification suite, and explore general integrals.

mod config;
mod error;
mod model;
mod output;
mod verify;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use rabiccati::catalog::{build_case, list_cases, CaseParams};
use rabiccati::quad::Grid;
use rabiccati::riccati::GeneralIntegral;

use config::CustomConfig;
use error::AppError;
use model::Model;
use output::{family_trace, TraceMeta};

#[derive(Parser)]
#[command(
    name = "rabiccati",
    version,
    about = "Exactly solvable time-dependent SU(2) problems and their Riccati equations"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// List the available catalog cases
    List,
    /// Export a trace of the closed-form entries and derived quantities
    Run(RunArgs),
    /// Run the residual/oracle/invariant suite for one case
    Verify(VerifyArgs),
    /// Export general-integral traces for a family of constants
    GeneralIntegral(GeneralIntegralArgs),
    /// Build a model from a config file, then run or verify it
    Custom(CustomArgs),
}

#[derive(Args)]
struct CaseArgs {
    /// Case name (see `list`)
    case: String,
    /// Constant transverse magnitude |ω|
    #[arg(long, default_value_t = 1.0)]
    omega_mag: f64,
    /// Transverse phase φ_ω(t) as an expression (φ_ω(0) = 0)
    #[arg(long, default_value = "0")]
    phi_omega: String,
    /// Family constant for example1
    #[arg(long, default_value_t = 1.0)]
    c: f64,
    /// End of the working interval (default 3/|ω|)
    #[arg(long)]
    t_max: Option<f64>,
    /// Quadrature tolerance for the closed-form caches
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    /// Relative tolerance of the verification integrator
    #[arg(long, default_value_t = 1e-10)]
    rel_tol: f64,
    /// Absolute tolerance of the verification integrator
    #[arg(long, default_value_t = 1e-12)]
    abs_tol: f64,
}

impl CaseArgs {
    fn params(&self) -> CaseParams {
        CaseParams {
            omega_mag: self.omega_mag,
            phi_omega: self.phi_omega.clone(),
            c: self.c,
        }
    }

    fn model(&self) -> Result<Model, AppError> {
        let bundle = build_case(&self.case, &self.params(), self.t_max, self.tol)?;
        Ok(Model::from_bundle(bundle))
    }

    fn meta<'a>(&'a self, model: &Model, steps: usize) -> TraceMeta<'a> {
        TraceMeta {
            case: &self.case,
            parameters: vec![
                ("omega_mag", self.omega_mag.to_string()),
                ("phi_omega", self.phi_omega.clone()),
                ("c", self.c.to_string()),
            ],
            quad_tol: self.tol,
            rel_tol: self.rel_tol,
            abs_tol: self.abs_tol,
            t_max: model.t_max,
            steps,
        }
    }
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    case: CaseArgs,
    /// Number of grid points (including both ends)
    #[arg(long, default_value_t = 301)]
    steps: usize,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Output path (stdout when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    case: CaseArgs,
    /// Number of grid points for the checks
    #[arg(long, default_value_t = 1001)]
    steps: usize,
}

#[derive(Args)]
struct GeneralIntegralArgs {
    #[command(flatten)]
    case: CaseArgs,
    /// Comma-separated integration constants, e.g. "2,1+i,-3i"
    #[arg(long, default_value = "2,1+i,-3i")]
    constants: String,
    #[arg(long, default_value_t = 301)]
    steps: usize,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CustomArgs {
    /// JSON config with {mode, expressions, parameters, grid, tolerances}
    #[arg(long)]
    config: PathBuf,
    /// Run the verification suite instead of exporting a trace
    #[arg(long)]
    verify: bool,
    /// Override the config grid end
    #[arg(long)]
    t_max: Option<f64>,
    /// Override the config step count
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code())
        }
    }
}

fn dispatch(cli: Cli) -> Result<ExitCode, AppError> {
    match cli.command {
        Command::List => {
            for name in list_cases() {
                println!("{name}");
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Run(args) => run(args),
        Command::Verify(args) => run_verify(args),
        Command::GeneralIntegral(args) => general_integral(args),
        Command::Custom(args) => custom(args),
    }
}

fn open_sink(path: &Option<PathBuf>) -> Result<Box<dyn Write>, AppError> {
    Ok(match path {
        Some(p) => Box::new(std::io::BufWriter::new(std::fs::File::create(p)?)),
        None => Box::new(std::io::stdout().lock()),
    })
}

fn trace_grid(t_max: f64, steps: usize) -> Result<Grid, AppError> {
    if steps < 2 {
        return Err(AppError::Usage(format!("steps must be >= 2, got {steps}")));
    }
    Grid::new(0.0, t_max, steps).map_err(|e| AppError::usage(&e))
}

fn write_model_trace(
    model: &Model,
    meta: &TraceMeta,
    steps: usize,
    format: Format,
    out: &Option<PathBuf>,
) -> Result<(), AppError> {
    let grid = trace_grid(model.t_max, steps)?;
    let mut sink = open_sink(out)?;
    match format {
        Format::Csv => output::write_trace_csv(&mut sink, model, grid.points())?,
        Format::Json => output::write_trace_json(&mut sink, model, meta, grid.points())?,
    }
    sink.flush()?;
    Ok(())
}

fn run(args: RunArgs) -> Result<ExitCode, AppError> {
    let model = args.case.model()?;
    let meta = args.case.meta(&model, args.steps);
    write_model_trace(&model, &meta, args.steps, args.format, &args.out)?;
    Ok(ExitCode::SUCCESS)
}

fn run_verify(args: VerifyArgs) -> Result<ExitCode, AppError> {
    let model = args.case.model()?;
    let checks = verify::run_suite(&model, args.steps, args.case.rel_tol, args.case.abs_tol)?;
    let ok = verify::print_report(&model.name, &checks);
    Ok(if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn general_integral(args: GeneralIntegralArgs) -> Result<ExitCode, AppError> {
    let constants = parse_constants(&args.constants)?;
    let bundle = build_case(
        &args.case.case,
        &args.case.params(),
        args.case.t_max,
        args.case.tol,
    )?;
    let grid = trace_grid(bundle.t_max, args.steps)?;
    // The integrating-factor caches use a finer grid than the exported one.
    let cache_grid = Grid::new(0.0, bundle.t_max, 2001).map_err(|e| AppError::usage(&e))?;
    let times: Vec<f64> = grid.points().collect();
    let mut traces = Vec::new();
    for c0 in constants {
        let gi = GeneralIntegral::build(
            &bundle.dre,
            &bundle.particular,
            c0,
            cache_grid,
            args.case.tol,
        )?;
        traces.push(family_trace(&gi, c0, &times));
    }
    let model = Model::from_bundle(bundle);
    let meta = args.case.meta(&model, args.steps);
    let mut sink = open_sink(&args.out)?;
    match args.format {
        Format::Csv => output::write_family_csv(&mut sink, &traces)?,
        Format::Json => output::write_family_json(&mut sink, &meta, &traces)?,
    }
    sink.flush()?;
    Ok(ExitCode::SUCCESS)
}

fn custom(args: CustomArgs) -> Result<ExitCode, AppError> {
    let cfg = CustomConfig::load(&args.config)?;
    let model = cfg.build(args.t_max)?;
    let steps = args.steps.unwrap_or(cfg.grid.steps);
    if args.verify {
        let checks = verify::run_suite(&model, steps, cfg.tolerances.rel, cfg.tolerances.abs)?;
        let ok = verify::print_report(&model.name, &checks);
        return Ok(if ok {
            ExitCode::SUCCESS
        } else {
            ExitCode::from(1)
        });
    }
    let meta = TraceMeta {
        case: &model.name,
        parameters: cfg
            .parameters
            .iter()
            .map(|(k, v)| (k.as_str(), v.to_string()))
            .collect(),
        quad_tol: cfg.tolerances.quad,
        rel_tol: cfg.tolerances.rel,
        abs_tol: cfg.tolerances.abs,
        t_max: model.t_max,
        steps,
    };
    write_model_trace(&model, &meta, steps, args.format, &args.out)?;
    Ok(ExitCode::SUCCESS)
}

/// Parses "2,1+i,-3i,1.5-2.5i" into complex constants.
fn parse_constants(text: &str) -> Result<Vec<Complex64>, AppError> {
    let mut out = Vec::new();
    for part in text.split(',') {
        out.push(parse_complex(part.trim())?);
    }
    if out.is_empty() {
        return Err(AppError::Usage("no integration constants given".into()));
    }
    Ok(out)
}

fn parse_complex(s: &str) -> Result<Complex64, AppError> {
    let bad = || AppError::Usage(format!("cannot parse complex constant `{s}`"));
    if s.is_empty() {
        return Err(bad());
    }
    if !s.ends_with('i') {
        return s
            .parse::<f64>()
            .map(|re| Complex64::new(re, 0.0))
            .map_err(|_| bad());
    }
    let body = &s[..s.len() - 1];
    // Find the split between the real part and the imaginary coefficient:
    // the last sign that is neither leading nor part of an exponent.
    let bytes = body.as_bytes();
    let mut split = None;
    for k in (1..bytes.len()).rev() {
        if (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E') {
            split = Some(k);
            break;
        }
    }
    let (re_str, im_str) = match split {
        Some(k) => (&body[..k], &body[k..]),
        None => ("", body),
    };
    let re = if re_str.is_empty() {
        0.0
    } else {
        re_str.parse::<f64>().map_err(|_| bad())?
    };
    let im = match im_str {
        "" | "+" => 1.0,
        "-" => -1.0,
        other => other.parse::<f64>().map_err(|_| bad())?,
    };
    Ok(Complex64::new(re, im))
}
