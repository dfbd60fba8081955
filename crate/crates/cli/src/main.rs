//! Command-line front end for the workbench: norms, kernels, operator
//! application, essential-norm reports, admissibility checks and
//! reproduction presets, emitted as JSON or CSV.

mod config;
mod runs;

use clap::{Parser, Subcommand, ValueEnum};
use config::{OutputFormat, RunConfig};
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "opmean",
    version,
    about = "Weighted Bergman space workbench: norms, composition operator families and their essential-norm identities"
)]
struct Cli {
    /// JSON config file mirroring the flags; flags override the file.
    #[arg(long, global = true)]
    config: Option<std::path::PathBuf>,
    /// Integrability exponent p > 1 of the space.
    #[arg(long, global = true)]
    p: Option<f64>,
    /// Weight exponent α ≥ 0 of the space.
    #[arg(long, global = true)]
    alpha: Option<f64>,
    /// Built-in family: hilbert, volterra, square, cubic, evaluation,
    /// expression.
    #[arg(long, global = true)]
    family: Option<String>,
    /// Hilbert family order λ > 0.
    #[arg(long, global = true)]
    lambda: Option<f64>,
    /// Two-point kernel mixing weight θ ∈ [0, 1].
    #[arg(long, global = true)]
    theta: Option<f64>,
    /// Weight expression over z and t for expression families.
    #[arg(long, global = true)]
    u_expr: Option<String>,
    /// Composition symbol expression over z and t for expression families.
    #[arg(long, global = true)]
    phi_expr: Option<String>,
    /// Comma-separated kernel order schedule approaching c*.
    #[arg(long, global = true)]
    c_schedule: Option<String>,
    /// Relative quadrature tolerance override.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Worker threads for cell-parallel quadrature.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[arg(long, global = true, value_enum)]
    format: Option<OutputFormat>,
    /// Output path (stdout when omitted).
    #[arg(long, global = true)]
    out: Option<std::path::PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Bergman norm of a z-expression.
    Norm {
        expr: String,
        /// Declared boundary singularity (a constant expression, e.g. "1"
        /// or "-1" or "exp(i*pi/3)").
        #[arg(long)]
        singular: Option<String>,
    },
    /// Construct a boundary test kernel and report its normalization.
    Kernel {
        #[arg(long, value_enum, default_value = "power")]
        kind: KernelKindArg,
        /// Kernel order c in (0, c*); defaults to c*/2.
        #[arg(long)]
        c: Option<f64>,
        /// Boundary-peak exponent n.
        #[arg(long, default_value_t = 8)]
        n: u32,
        /// Direction ξ as a constant expression.
        #[arg(long, default_value = "1")]
        xi: String,
    },
    /// Apply one family member (with --t) or the integrated family mean to a
    /// function at sample points.
    Apply {
        /// Member parameter; the integrated mean when omitted.
        #[arg(long)]
        t: Option<f64>,
        /// Function of z to act on.
        #[arg(long, default_value = "1")]
        f_expr: String,
        /// Semicolon-separated evaluation points (constant expressions).
        #[arg(long, default_value = "0;0.3;0.5*i")]
        points: String,
    },
    /// Interchange report for the selected family.
    Essnorm,
    /// Direction and weight-condition checks for the selected family.
    Admissible,
    /// End-to-end reproduction experiments with closed-form targets.
    Reproduce {
        #[arg(value_enum)]
        preset: Preset,
    },
    /// Tabulate a report quantity along one axis to CSV.
    Sweep {
        #[arg(long, value_enum)]
        axis: Axis,
        /// Comma-separated axis values (defaults per axis).
        #[arg(long)]
        values: Option<String>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum KernelKindArg {
    Power,
    TwoPoint,
    BoundaryPeak,
}

#[derive(Clone, Copy, ValueEnum, PartialEq, Eq)]
pub enum Preset {
    Hilbert,
    Volterra,
    Square,
    Phase,
    TwodirCollinear,
    TwodirPhase,
}

#[derive(Clone, Copy, ValueEnum, PartialEq, Eq)]
pub enum Axis {
    C,
    T,
    P,
    Alpha,
    Lambda,
    Theta,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let config = match RunConfig::assemble(
        cli.config.as_deref(),
        config::Overrides {
            p: cli.p,
            alpha: cli.alpha,
            family: cli.family.clone(),
            lambda: cli.lambda,
            theta: cli.theta,
            u_expr: cli.u_expr.clone(),
            phi_expr: cli.phi_expr.clone(),
            c_schedule: cli.c_schedule.clone(),
            tol: cli.tol,
            jobs: cli.jobs,
            format: cli.format,
            out: cli.out.clone(),
        },
    ) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("invalid configuration: {e}");
            return ExitCode::from(2);
        }
    };

    if let Some(jobs) = config.jobs {
        if rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .is_err()
        {
            eprintln!("warning: thread pool already initialized; --jobs ignored");
        }
    }

    let outcome = match &cli.command {
        Command::Norm { expr, singular } => runs::cmd_norm(&config, expr, singular.as_deref()),
        Command::Kernel { kind, c, n, xi } => runs::cmd_kernel(
            &config,
            match kind {
                KernelKindArg::Power => "power",
                KernelKindArg::TwoPoint => "two_point",
                KernelKindArg::BoundaryPeak => "boundary_peak",
            },
            *c,
            *n,
            xi,
        ),
        Command::Apply { t, f_expr, points } => runs::cmd_apply(&config, *t, f_expr, points),
        Command::Essnorm => runs::cmd_essnorm(&config),
        Command::Admissible => runs::cmd_admissible(&config),
        Command::Reproduce { preset } => runs::cmd_reproduce(&config, *preset),
        Command::Sweep { axis, values } => runs::cmd_sweep(&config, *axis, values.as_deref()),
    };

    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(runs::CliError::Config(msg)) => {
            eprintln!("invalid configuration: {msg}");
            ExitCode::from(2)
        }
        Err(runs::CliError::Quadrature(msg)) => {
            eprintln!("quadrature failure: {msg}");
            ExitCode::from(1)
        }
        Err(runs::CliError::Io(e)) => {
            eprintln!("io error: {e}");
            ExitCode::from(1)
        }
    }
}
