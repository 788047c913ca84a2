//! JSON report emission for `solve`.

use std::path::Path;

use serde::Serialize;

use nsdp::solver::SolveReport;
use nsdp::svec;

#[derive(Serialize)]
struct TraceRow {
    lc_value: f64,
    grad_norm: f64,
    y_norm: f64,
    c: f64,
}

#[derive(Serialize)]
struct JsonReport {
    status: &'static str,
    iterations: usize,
    evaluations: usize,
    f_final: f64,
    kkt_residual: f64,
    c_initial: f64,
    c_final: f64,
    time_s: f64,
    x_final: Vec<f64>,
    /// Final multiplier in scaled svec coordinates.
    lambda_final: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    trace: Option<Vec<TraceRow>>,
}

/// Writes the report as JSON; the trace is included only when requested.
pub fn write_json(
    path: &Path,
    report: &SolveReport<f64>,
    include_trace: bool,
) -> std::io::Result<()> {
    let json = JsonReport {
        status: report.status.as_str(),
        iterations: report.iterations,
        evaluations: report.evaluations,
        f_final: report.f_final,
        kkt_residual: report.kkt_residual_final,
        c_initial: report.c_initial,
        c_final: report.c_final,
        time_s: report.wall_time_seconds,
        x_final: report.x_final.iter().copied().collect(),
        lambda_final: svec(&report.lambda_final)
            .coords()
            .iter()
            .copied()
            .collect(),
        trace: include_trace.then(|| {
            report
                .trace
                .iter()
                .map(|t| TraceRow {
                    lc_value: t.lc_value,
                    grad_norm: t.grad_norm,
                    y_norm: t.y_norm,
                    c: t.c,
                })
                .collect()
        }),
    };
    std::fs::write(path, serde_json::to_string_pretty(&json)?)
}
