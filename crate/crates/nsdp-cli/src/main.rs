//! `nsdp` command line: single solves, benchmark sweeps over random
//! correlation instances, and finite-difference gradient verification.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use nalgebra::DVector;

use nsdp::problems::{load_h_csv, random_correlation_target, CorrelationProblem, NollProblem};
use nsdp::solver::{solve, LambdaStart, PenaltyInit, SolveReport, SolveStatus, SolverConfig};
use nsdp::SymMat64;

mod bench;
mod report;

#[derive(Parser)]
#[command(
    name = "nsdp",
    version,
    about = "Nonlinear SDP solver driven by an exact augmented Lagrangian"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one problem instance and write a JSON report.
    Solve(SolveArgs),
    /// Run seeded benchmark sweeps and aggregate them into a CSV table.
    Bench(bench::BenchArgs),
    /// Verify analytic merit gradients against central finite differences.
    CheckGrad(CheckGradArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum ProblemKind {
    Noll,
    Correlation,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Lambda0 {
    Estimate,
    Zero,
}

/// Solver flags shared by `solve` and `bench`.
#[derive(Args, Clone, Debug)]
struct SolverFlags {
    /// Initial penalty: "auto" or a positive number.
    #[arg(long, default_value = "auto")]
    c0: String,
    /// Stopping tolerance.
    #[arg(long, default_value_t = 1e-5)]
    tol: f64,
    /// Iteration cap.
    #[arg(long, default_value_t = 5000)]
    max_iter: usize,
    /// Jordan-operator weight in N(x).
    #[arg(long, default_value_t = 1.0)]
    zeta1: f64,
    /// Residual-identity weight in N(x).
    #[arg(long, default_value_t = 1e-4)]
    zeta2: f64,
    /// Penalty trigger threshold.
    #[arg(long, default_value_t = 0.9)]
    tau: f64,
    /// Penalty growth factor.
    #[arg(long, default_value_t = 1.1)]
    rho: f64,
    /// Initial penalty lower clamp.
    #[arg(long, default_value_t = 0.1)]
    cmin: f64,
    /// Penalty ceiling.
    #[arg(long, default_value_t = 1000.0)]
    cmax: f64,
    /// Initial multiplier rule.
    #[arg(long, value_enum, default_value_t = Lambda0::Estimate)]
    lambda0: Lambda0,
}

impl SolverFlags {
    fn to_config(&self) -> Result<SolverConfig<f64>, String> {
        let c0 = match self.c0.as_str() {
            "auto" => PenaltyInit::Auto,
            other => {
                let v: f64 = other
                    .parse()
                    .map_err(|e| format!("--c0 must be \"auto\" or a number: {e}"))?;
                PenaltyInit::Fixed(v)
            }
        };
        let config = SolverConfig {
            tau: self.tau,
            rho: self.rho,
            c_min: self.cmin,
            c_max: self.cmax,
            zeta1: self.zeta1,
            zeta2: self.zeta2,
            tol: self.tol,
            max_iter: self.max_iter,
            c0,
            ..SolverConfig::default()
        };
        config.validate().map_err(|e| e.to_string())?;
        Ok(config)
    }

    fn lambda_start(&self, m: usize) -> LambdaStart<f64> {
        match self.lambda0 {
            Lambda0::Estimate => LambdaStart::Estimate,
            Lambda0::Zero => LambdaStart::Given(SymMat64::zeros(m)),
        }
    }
}

#[derive(Args, Debug)]
struct SolveArgs {
    /// Which problem to solve.
    #[arg(long, value_enum)]
    problem: ProblemKind,
    /// Target matrix for the correlation problem, as CSV.
    #[arg(long)]
    h_file: Option<PathBuf>,
    /// Generate a random correlation target of this dimension instead of
    /// reading --h-file.
    #[arg(long)]
    m: Option<usize>,
    /// Seed for the generated target.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    solver: SolverFlags,
    /// Write the JSON report here.
    #[arg(long)]
    json: Option<PathBuf>,
    /// Include the per-iteration trace in the JSON report.
    #[arg(long, default_value_t = false)]
    trace: bool,
}

#[derive(Args, Debug)]
struct CheckGradArgs {
    /// Which problem to check.
    #[arg(long, value_enum)]
    problem: ProblemKind,
    /// Dimension of the correlation target.
    #[arg(long, default_value_t = 4)]
    m: usize,
    /// Number of random sample points.
    #[arg(long, default_value_t = 100)]
    points: usize,
    /// Finite-difference step.
    #[arg(long, default_value_t = 1e-6)]
    eps: f64,
    /// Seed for the sample stream.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn usage_error(msg: &str) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(2)
}

fn print_summary(report: &SolveReport<f64>) {
    println!(
        "status={} f={:.8} kkt={:.3e} iterations={} evaluations={} c0={:.4} c_final={:.4} time={:.3}s",
        report.status.as_str(),
        report.f_final,
        report.kkt_residual_final,
        report.iterations,
        report.evaluations,
        report.c_initial,
        report.c_final,
        report.wall_time_seconds,
    );
}

fn run_solve(args: &SolveArgs) -> ExitCode {
    let config = match args.solver.to_config() {
        Ok(c) => c,
        Err(msg) => return usage_error(&msg),
    };

    let outcome = match args.problem {
        ProblemKind::Noll => {
            let x0 = DVector::from_vec(vec![1.0, 0.0]);
            let lambda0 = args.solver.lambda_start(3);
            solve(&NollProblem, &x0, lambda0, &config)
        }
        ProblemKind::Correlation => {
            let h = if let Some(path) = &args.h_file {
                match load_h_csv::<f64>(path) {
                    Ok(h) => h,
                    Err(e) => return usage_error(&e.to_string()),
                }
            } else if let Some(m) = args.m {
                match random_correlation_target(m, args.seed) {
                    Ok(h) => h,
                    Err(e) => return usage_error(&e.to_string()),
                }
            } else {
                return usage_error(
                    "the correlation problem needs --h-file PATH or --m INT [--seed INT]",
                );
            };
            let m = h.dim();
            let problem = match CorrelationProblem::new(h) {
                Ok(p) => p,
                Err(e) => return usage_error(&e.to_string()),
            };
            let x0 = problem.all_ones_start();
            let lambda0 = args.solver.lambda_start(m);
            solve(&problem, &x0, lambda0, &config)
        }
    };

    let report = match outcome {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::FAILURE;
        }
    };

    print_summary(&report);
    if let Some(path) = &args.json {
        if let Err(e) = report::write_json(path, &report, args.trace) {
            eprintln!("error: cannot write {}: {e}", path.display());
            return ExitCode::FAILURE;
        }
    }
    match report.status {
        SolveStatus::Converged => ExitCode::SUCCESS,
        _ => ExitCode::FAILURE,
    }
}

fn run_check_grad(args: &CheckGradArgs) -> ExitCode {
    const FAIL_TOL: f64 = 1e-4;
    const WARN_TOL: f64 = 1e-5;

    let outcome = match args.problem {
        ProblemKind::Noll => nsdp::gradcheck::check_merit_gradients(
            &NollProblem,
            args.points,
            args.eps,
            args.seed,
            FAIL_TOL,
            WARN_TOL,
        ),
        ProblemKind::Correlation => {
            let h = match random_correlation_target::<f64>(args.m, args.seed) {
                Ok(h) => h,
                Err(e) => return usage_error(&e.to_string()),
            };
            let problem = match CorrelationProblem::new(h) {
                Ok(p) => p,
                Err(e) => return usage_error(&e.to_string()),
            };
            nsdp::gradcheck::check_merit_gradients(
                &problem,
                args.points,
                args.eps,
                args.seed,
                FAIL_TOL,
                WARN_TOL,
            )
        }
    };

    let report = match outcome {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::FAILURE;
        }
    };

    for entry in &report.entries {
        let verdict = if entry.failures > 0 {
            "FAIL"
        } else if entry.warnings > 0 {
            "WARN"
        } else {
            "ok"
        };
        println!(
            "{:28} max_rel_err={:.3e} failures={} warnings={} [{verdict}]",
            entry.label, entry.max_rel_err, entry.failures, entry.warnings
        );
    }
    if report.passed() {
        println!(
            "PASS: all gradients within {:.0e} over {} points",
            report.fail_tol, report.points
        );
        ExitCode::SUCCESS
    } else {
        println!(
            "FAIL: at least one gradient exceeded {:.0e}",
            report.fail_tol
        );
        ExitCode::FAILURE
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match &cli.command {
        Command::Solve(args) => run_solve(args),
        Command::Bench(args) => bench::run_bench(args),
        Command::CheckGrad(args) => run_check_grad(args),
    }
}
