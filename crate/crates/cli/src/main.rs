use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use cyclic_cli::commands;
use cyclic_cli::sweep::{self, Route, RunConfig};
use cyclic_core::derivative::{DemoRoute, BUMP_DEFAULT_KMAX};
use cyclic_core::error::Error;
use cyclic_core::precision::PrecisionConfig;
use cyclic_core::problem::Problem;

const EXIT_SPEC: u8 = 2;
const EXIT_NUMERIC: u8 = 3;

#[derive(Parser)]
#[command(name = "cyclic", version, about = "Projection distances and cyclicity checks for discrete-spectrum operators")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sweep ρ²(e_k, L_{2n+1}(f)) over a grid of k and n.
    Sweep(SweepArgs),
    /// Print the threshold constants c0 and sigma.
    Constants {
        #[arg(long, default_value_t = 256)]
        precision: u32,
    },
    /// Fit the coefficient decay of a problem file against the threshold.
    Theorem3 {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long, default_value_t = 20)]
        kmax: usize,
        #[arg(long)]
        precision: Option<u32>,
        #[arg(long)]
        json: bool,
    },
    /// Locate a zero of the bump transform and tabulate ρ²(e_0, ·).
    BumpDemo {
        #[arg(long)]
        radius: Option<f64>,
        #[arg(long, default_value_t = 8)]
        nmax: usize,
        #[arg(long, default_value_t = BUMP_DEFAULT_KMAX)]
        kmax: usize,
        #[arg(long, value_enum, default_value_t = DemoRouteArg::Gram)]
        route: DemoRouteArg,
        #[arg(long, default_value_t = 256)]
        precision: u32,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(clap::Args)]
struct SweepArgs {
    #[arg(long)]
    spec: PathBuf,
    /// Comma-separated indices or inclusive ranges, e.g. `-2..2`.
    #[arg(long, allow_hyphen_values = true)]
    k: String,
    #[arg(long)]
    n: String,
    #[arg(long, value_enum, default_value_t = RouteArg::Both)]
    routes: RouteArg,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Mantissa bits; overrides the problem file.
    #[arg(long)]
    precision: Option<u32>,
    #[arg(long)]
    tail_tol: Option<f64>,
    #[arg(long)]
    solve_tol: Option<f64>,
    #[arg(long, default_value_t = 1)]
    workers: usize,
    /// Exit with status 3 if any cell failed.
    #[arg(long)]
    strict: bool,
    /// Add per-record wall times (makes reports non-reproducible).
    #[arg(long)]
    timings: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum RouteArg {
    Kmatrix,
    Gram,
    Both,
}

#[derive(Clone, Copy, ValueEnum)]
enum DemoRouteArg {
    Kmatrix,
    Gram,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

enum Failure {
    Spec(String),
    Numeric(String),
    Io(String),
}

impl Failure {
    fn from_core(e: Error) -> Self {
        match e {
            Error::InvalidConfig(_) => Failure::Spec(e.to_string()),
            other => Failure::Numeric(format!("{}: {other}", other.name())),
        }
    }
}

fn load_problem(path: &Path) -> Result<Problem, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::Spec(format!("{}: {e}", path.display())))?;
    Problem::from_json(&text).map_err(|e| Failure::Spec(format!("{}: {e}", path.display())))
}

fn emit(text: &str, out: Option<&Path>) -> Result<(), Failure> {
    match out {
        Some(path) => fs::write(path, text).map_err(|e| Failure::Io(format!("{}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn precision_with(base: PrecisionConfig, bits: Option<u32>) -> Result<PrecisionConfig, Failure> {
    let cfg = PrecisionConfig {
        mantissa_bits: bits.unwrap_or(base.mantissa_bits),
        ..base
    };
    cfg.validate().map_err(Failure::from_core)?;
    Ok(cfg)
}

fn run_sweep(args: SweepArgs) -> Result<(), Failure> {
    let problem = load_problem(&args.spec)?;
    let mut precision = precision_with(problem.precision, args.precision)?;
    if let Some(t) = args.tail_tol {
        precision.tail_rel_tol = t;
    }
    if let Some(t) = args.solve_tol {
        precision.solve_rel_tol = t;
    }
    let k_list = commands::parse_list(&args.k).map_err(|e| Failure::Spec(format!("--k: {e}")))?;
    let n_list = commands::parse_list(&args.n).map_err(|e| Failure::Spec(format!("--n: {e}")))?;
    if n_list.iter().any(|&n| n < 1) {
        return Err(Failure::Spec("--n values must be at least 1".into()));
    }
    let routes = match args.routes {
        RouteArg::Kmatrix => vec![Route::Kmatrix],
        RouteArg::Gram => vec![Route::Gram],
        RouteArg::Both => vec![Route::Gram, Route::Kmatrix],
    };
    let cfg = RunConfig {
        spec: args.spec.clone(),
        k_list,
        n_list: n_list.into_iter().map(|n| n as usize).collect(),
        routes,
        precision,
        workers: args.workers,
        timings: args.timings,
    };
    let report = sweep::run(&cfg, &problem).map_err(Failure::from_core)?;
    let text = match args.format {
        Format::Json => report.to_json(),
        Format::Csv => report.to_csv().map_err(|e| Failure::Io(e.to_string()))?,
    };
    emit(&text, args.out.as_deref())?;
    if args.strict && report.has_errors() {
        let n = report.records.iter().filter(|r| r.error.is_some()).count();
        return Err(Failure::Numeric(format!("{n} cell(s) failed")));
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Sweep(args) => run_sweep(args),
        Command::Constants { precision } => {
            let cfg = precision_with(PrecisionConfig::default(), Some(precision))?;
            emit(&commands::constants_text(&cfg), None)
        }
        Command::Theorem3 {
            spec,
            kmax,
            precision,
            json,
        } => {
            let problem = load_problem(&spec)?;
            let cfg = precision_with(problem.precision, precision)?;
            let report = commands::theorem3_report(&problem, kmax, &cfg).map_err(Failure::from_core)?;
            let text = if json {
                serde_json::to_string_pretty(&report).expect("report serializes") + "\n"
            } else {
                commands::theorem3_text(&report)
            };
            emit(&text, None)
        }
        Command::BumpDemo {
            radius,
            nmax,
            kmax,
            route,
            precision,
            format,
            out,
        } => {
            let cfg = precision_with(PrecisionConfig::default(), Some(precision))?;
            let route = match route {
                DemoRouteArg::Kmatrix => DemoRoute::KMatrix,
                DemoRouteArg::Gram => DemoRoute::Gram,
            };
            let report = commands::bump_demo(radius, kmax, nmax, route, &cfg).map_err(Failure::from_core)?;
            let text = match format {
                Format::Json => commands::bump_json(&report, route, &cfg),
                Format::Csv => commands::bump_csv(&report, route, &cfg).map_err(|e| Failure::Io(e.to_string()))?,
            };
            emit(&text, out.as_deref())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Spec(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_SPEC)
        }
        Err(Failure::Numeric(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_NUMERIC)
        }
        Err(Failure::Io(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::FAILURE
        }
    }
}
