//! Command-line harness around the bdpg solver: error tables, convergence
//! rates, stability histories, exact matrix dumps and sparsity reports,
//! all as CSV on stdout or to a file.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use bdpg::experiments::{self, ExperimentSpec};
use bdpg::operators;
use bdpg::{dual, Error};

#[derive(Parser)]
#[command(
    name = "bdpg",
    version,
    about = "Bernstein dual-Petrov-Galerkin solver for 2D time-fractional subdiffusion"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a benchmark problem and report error norms at chosen times.
    Solve(SolveArgs),
    /// Spatial convergence study over a list of degrees.
    SpaceConv(SpaceConvArgs),
    /// Temporal convergence study over a list of step counts.
    TimeConv(TimeConvArgs),
    /// Source-free stability history with the energy-norm bound check.
    Stability(StabilityArgs),
    /// Dump the exact matrices C, G, P, Q, B, A for one degree.
    Matrices(MatricesArgs),
    /// Size, bandwidth and density of the assembled operator.
    Sparsity(SparsityArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// Fractional order (repeatable).
    #[arg(long = "alpha")]
    alphas: Vec<f64>,
    /// Diffusion coefficient.
    #[arg(long, default_value_t = 1.0)]
    kappa: f64,
    /// Spatial degree N (repeatable).
    #[arg(long = "n")]
    degrees: Vec<usize>,
    /// Time step (repeatable; mutually exclusive with --steps).
    #[arg(long = "tau", conflicts_with = "steps")]
    taus: Vec<f64>,
    /// Step count M = T/tau (repeatable; mutually exclusive with --tau).
    #[arg(long = "steps")]
    steps: Vec<usize>,
    /// Final time T.
    #[arg(long = "t-final", default_value_t = 1.0)]
    t_final: f64,
    /// Quadrature point count for right-hand sides.
    #[arg(long = "quad", default_value_t = 8)]
    quad: usize,
    /// Grid size for the discrete L2/Linf norms.
    #[arg(long = "grid", default_value_t = 100)]
    grid: usize,
    /// Report times, comma separated.
    #[arg(long = "times", value_delimiter = ',')]
    times: Vec<f64>,
    /// Output path; stdout when omitted.
    #[arg(long = "out")]
    out: Option<PathBuf>,
}

impl CommonArgs {
    fn spec(&self, example: u8, defaults: SpecDefaults) -> Result<ExperimentSpec, Error> {
        let alphas = if self.alphas.is_empty() {
            defaults.alphas.to_vec()
        } else {
            self.alphas.clone()
        };
        let degrees = if self.degrees.is_empty() {
            defaults.degrees.to_vec()
        } else {
            self.degrees.clone()
        };
        let taus = if !self.taus.is_empty() {
            self.taus.clone()
        } else if !self.steps.is_empty() {
            self.steps
                .iter()
                .map(|&m| {
                    if m == 0 {
                        Err(Error::Usage("--steps must be positive".into()))
                    } else {
                        Ok(self.t_final / m as f64)
                    }
                })
                .collect::<Result<Vec<f64>, Error>>()?
        } else {
            defaults.taus.to_vec()
        };
        let times = if self.times.is_empty() {
            defaults.times.to_vec()
        } else {
            self.times.clone()
        };
        Ok(ExperimentSpec {
            example,
            alphas,
            kappa: self.kappa,
            degrees,
            taus,
            t_final: self.t_final,
            quad_points: self.quad,
            grid: self.grid,
            times,
        })
    }
}

struct SpecDefaults {
    alphas: &'static [f64],
    degrees: &'static [usize],
    taus: &'static [f64],
    times: &'static [f64],
}

#[derive(Args)]
struct SolveArgs {
    /// Benchmark problem: 1 (manufactured) or 2 (source-free).
    #[arg(long, default_value_t = 1)]
    example: u8,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct SpaceConvArgs {
    #[arg(long, default_value_t = 1)]
    example: u8,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct TimeConvArgs {
    #[arg(long, default_value_t = 1)]
    example: u8,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct StabilityArgs {
    /// Benchmark problem; only the source-free problem 2 is valid.
    #[arg(long, default_value_t = 2)]
    example: u8,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct MatricesArgs {
    /// Spatial degree N.
    #[arg(long = "n", default_value_t = 6)]
    degree: usize,
    /// Output directory (one CSV per matrix); stdout blocks when omitted.
    #[arg(long = "out")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SparsityArgs {
    /// Spatial degree N (repeatable).
    #[arg(long = "n")]
    degrees: Vec<usize>,
    /// Also dump the nonzero pattern as `row,col` lines (single N only).
    #[arg(long = "pattern")]
    pattern: Option<PathBuf>,
    /// Output path; stdout when omitted.
    #[arg(long = "out")]
    out: Option<PathBuf>,
}

fn emit(out: &Option<PathBuf>, content: &str) -> Result<(), Error> {
    match out {
        Some(path) => fs::write(path, content)?,
        None => {
            std::io::stdout().write_all(content.as_bytes())?;
        }
    }
    Ok(())
}

fn run_solve(args: &SolveArgs) -> Result<(), Error> {
    let spec = args.common.spec(
        args.example,
        SpecDefaults {
            alphas: &[0.5],
            degrees: &[8],
            taus: &[0.01],
            times: &[0.5, 1.0],
        },
    )?;
    let rows = experiments::run_example(&spec)?;
    emit(&args.common.out, &experiments::errors_csv(&rows))
}

fn run_space_conv(args: &SpaceConvArgs) -> Result<(), Error> {
    let spec = args.common.spec(
        args.example,
        SpecDefaults {
            alphas: &[0.25, 0.5, 0.75],
            degrees: &[2, 4, 6, 8],
            taus: &[0.01],
            times: &[1.0],
        },
    )?;
    let rows = experiments::convergence_in_space(&spec)?;
    emit(&args.common.out, &experiments::rates_csv(&rows))
}

fn run_time_conv(args: &TimeConvArgs) -> Result<(), Error> {
    let spec = args.common.spec(
        args.example,
        SpecDefaults {
            alphas: &[0.25, 0.5, 0.75],
            degrees: &[8],
            taus: &[0.1, 0.05, 0.025, 0.0125, 0.00625],
            times: &[0.1, 1.0],
        },
    )?;
    let rows = experiments::convergence_in_time(&spec)?;
    emit(&args.common.out, &experiments::rates_csv(&rows))
}

fn run_stability(args: &StabilityArgs) -> Result<(), Error> {
    let spec = args.common.spec(
        args.example,
        SpecDefaults {
            alphas: &[0.5],
            degrees: &[8],
            taus: &[0.01],
            times: &[1.0],
        },
    )?;
    let blocks = experiments::stability_run(&spec)?;
    let total: usize = blocks.iter().map(|b| b.violations).sum();
    emit(&args.common.out, &experiments::stability_csv(&blocks))?;
    if total > 0 {
        eprintln!("warning: {total} energy-bound violations detected");
    }
    Ok(())
}

fn run_matrices(args: &MatricesArgs) -> Result<(), Error> {
    let n = args.degree;
    let basis = dual::DualBasis::new(n);
    let named: Vec<(&str, String)> = vec![
        ("C", basis.coefficient_matrix().to_csv()),
        ("G", operators::transform_g(n)?.to_csv()),
        ("P", operators::dual_derivative_p(n)?.to_csv()),
        ("Q", operators::modal_derivative_q(n)?.to_csv()),
        ("B", operators::mass_matrix(n)?.to_csv()),
        ("A", operators::stiffness_matrix(n)?.to_csv()),
    ];
    match &args.out {
        Some(dir) => {
            fs::create_dir_all(dir)?;
            for (name, csv) in &named {
                fs::write(Path::new(dir).join(format!("{name}.csv")), csv)?;
            }
        }
        None => {
            let mut block = String::new();
            for (name, csv) in &named {
                let rows = csv.lines().count();
                let cols = csv.lines().next().map_or(0, |l| l.split(',').count());
                block.push_str(&format!("# {name} {rows}x{cols}\n"));
                block.push_str(csv);
            }
            emit(&None, &block)?;
        }
    }
    Ok(())
}

fn run_sparsity(args: &SparsityArgs) -> Result<(), Error> {
    let degrees = if args.degrees.is_empty() {
        vec![8, 10, 12, 14]
    } else {
        args.degrees.clone()
    };
    let rows = experiments::sparsity_report(&degrees)?;
    emit(&args.out, &experiments::sparsity_csv(&rows))?;
    if let Some(path) = &args.pattern {
        if degrees.len() != 1 {
            return Err(Error::Usage(
                "--pattern requires exactly one --n value".into(),
            ));
        }
        let mut out = String::from("row,col\n");
        for (r, c) in experiments::sparsity_pattern(degrees[0])? {
            out.push_str(&format!("{r},{c}\n"));
        }
        fs::write(path, out)?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Solve(args) => run_solve(args),
        Command::SpaceConv(args) => run_space_conv(args),
        Command::TimeConv(args) => run_time_conv(args),
        Command::Stability(args) => run_stability(args),
        Command::Matrices(args) => run_matrices(args),
        Command::Sparsity(args) => run_sparsity(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Error::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::FAILURE
        }
    }
}
