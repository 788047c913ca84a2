//! Benchmark sweeps: seeded random correlation instances, solved in parallel,
//! aggregated into one CSV row per matrix dimension.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Args;
use rayon::prelude::*;

use nsdp::problems::{random_correlation_target, CorrelationProblem};
use nsdp::solver::{solve, SolveReport, SolveStatus};

use crate::{usage_error, ProblemKind, SolverFlags};

#[derive(Args, Debug)]
pub struct BenchArgs {
    /// Which problem family to benchmark (only correlation is supported).
    #[arg(long, value_enum)]
    problem: ProblemKind,
    /// Comma-separated matrix dimensions, e.g. "5,10,15,20".
    #[arg(long, value_delimiter = ',', default_value = "5,10,15,20")]
    m: Vec<usize>,
    /// Instances per dimension.
    #[arg(long, default_value_t = 50)]
    instances: usize,
    /// Base seed; instance k uses seed + k, so any instance is reproducible
    /// in isolation.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write the CSV table here.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Worker threads for the instance pool (0 = one per core).
    #[arg(long, default_value_t = 0)]
    threads: usize,
    #[command(flatten)]
    solver: SolverFlags,
}

/// Aggregated results for one matrix dimension.
pub struct BenchRow {
    pub m: usize,
    pub instances: usize,
    pub mean_iterations: f64,
    pub mean_evaluations: f64,
    pub mean_initial_c: f64,
    pub mean_final_c: f64,
    pub mean_time_s: f64,
    pub failures: usize,
}

pub const CSV_HEADER: &str =
    "m,instances,mean_iterations,mean_evaluations,mean_initial_c,mean_final_c,mean_time_s,failures";

impl BenchRow {
    pub fn to_csv_line(&self) -> String {
        format!(
            "{},{},{:.2},{:.2},{:.4},{:.4},{:.6},{}",
            self.m,
            self.instances,
            self.mean_iterations,
            self.mean_evaluations,
            self.mean_initial_c,
            self.mean_final_c,
            self.mean_time_s,
            self.failures
        )
    }
}

fn solve_instance(m: usize, seed: u64, flags: &SolverFlags) -> Result<SolveReport<f64>, String> {
    let config = flags.to_config()?;
    let h = random_correlation_target::<f64>(m, seed).map_err(|e| e.to_string())?;
    let problem = CorrelationProblem::new(h).map_err(|e| e.to_string())?;
    let x0 = problem.all_ones_start();
    solve(&problem, &x0, flags.lambda_start(m), &config).map_err(|e| e.to_string())
}

/// Runs every instance of one dimension (in parallel; aggregation order is
/// fixed by instance index) and averages the counters over all of them.
pub fn bench_dimension(
    m: usize,
    instances: usize,
    base_seed: u64,
    flags: &SolverFlags,
) -> Result<BenchRow, String> {
    let reports: Vec<Result<SolveReport<f64>, String>> = (0..instances)
        .into_par_iter()
        .map(|k| solve_instance(m, base_seed + k as u64, flags))
        .collect();

    let mut row = BenchRow {
        m,
        instances,
        mean_iterations: 0.0,
        mean_evaluations: 0.0,
        mean_initial_c: 0.0,
        mean_final_c: 0.0,
        mean_time_s: 0.0,
        failures: 0,
    };
    for report in reports {
        let report = report?;
        row.mean_iterations += report.iterations as f64;
        row.mean_evaluations += report.evaluations as f64;
        row.mean_initial_c += report.c_initial;
        row.mean_final_c += report.c_final;
        row.mean_time_s += report.wall_time_seconds;
        if report.status != SolveStatus::Converged {
            row.failures += 1;
        }
    }
    let count = instances as f64;
    row.mean_iterations /= count;
    row.mean_evaluations /= count;
    row.mean_initial_c /= count;
    row.mean_final_c /= count;
    row.mean_time_s /= count;
    Ok(row)
}

pub fn run_bench(args: &BenchArgs) -> ExitCode {
    if args.problem != ProblemKind::Correlation {
        return usage_error("bench supports only --problem correlation");
    }
    if args.instances == 0 {
        return usage_error("--instances must be at least 1");
    }
    if args.m.iter().any(|&m| m < 2) {
        return usage_error("--m entries must be at least 2");
    }
    if let Err(msg) = args.solver.to_config() {
        return usage_error(&msg);
    }
    if args.threads > 0 {
        // Ignore failure: the global pool can only be set once per process.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(args.threads)
            .build_global();
    }

    let mut lines = vec![CSV_HEADER.to_string()];
    println!("{CSV_HEADER}");
    for &m in &args.m {
        match bench_dimension(m, args.instances, args.seed, &args.solver) {
            Ok(row) => {
                let line = row.to_csv_line();
                println!("{line}");
                lines.push(line);
            }
            Err(msg) => {
                eprintln!("error: {msg}");
                return ExitCode::FAILURE;
            }
        }
    }

    if let Some(path) = &args.csv {
        let content = lines.join("\n") + "\n";
        if let Err(e) = std::fs::write(path, content) {
            eprintln!("error: cannot write {}: {e}", path.display());
            return ExitCode::FAILURE;
        }
    }
    ExitCode::SUCCESS
}
