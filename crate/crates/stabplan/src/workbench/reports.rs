//! CSV emission with stable, documented headers (pinned by golden tests).

use std::path::Path;

use crate::error::Result;
use crate::linearize::IterationRow;
use crate::planning::ViolationReport;
use crate::shortcircuit::SccResult;
use crate::workbench::pipeline::CaseRow;

pub const SCC_RESULTS_HEADER: &[&str] = &["bus", "i_f_pu", "iterations", "converged"];
pub const SCC_TRACE_HEADER: &[&str] = &["bus", "iteration", "i_f_pu", "min_delta_v", "max_delta_v"];
pub const GSCR_SERIES_HEADER: &[&str] = &["node", "hour", "gscr"];
pub const SAMPLING_LOG_HEADER: &[&str] = &["m", "metric", "omega", "delta_omega", "n_mc", "objective"];
pub const VIOLATION_HOURS_HEADER: &[&str] = &[
    "node",
    "hour",
    "scc_margin",
    "scc_ok",
    "gscr_margin",
    "gscr_ok",
];
pub const VIOLATION_SUMMARY_HEADER: &[&str] = &["metric", "violation_rate_pct", "worst_margin"];
pub const COST_COMPARISON_HEADER: &[&str] = &[
    "case",
    "bess_gw",
    "bess_cost_m_per_yr",
    "sc_gw",
    "sc_cost_m_per_yr",
    "operation_k_per_h",
    "total_m_per_yr",
    "scc_violation_pct",
    "gscr_violation_pct",
];

fn writer(path: &Path) -> Result<csv::Writer<std::fs::File>> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    Ok(csv::Writer::from_path(path)?)
}

pub fn write_scc_results(path: &Path, results: &[SccResult]) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(SCC_RESULTS_HEADER)?;
    for r in results {
        w.write_record(&[
            r.fault_bus.to_string(),
            format!("{:.8}", r.magnitude),
            r.iterations.to_string(),
            r.converged.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_scc_traces(path: &Path, results: &[SccResult]) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(SCC_TRACE_HEADER)?;
    for r in results {
        for row in &r.trace {
            let (lo, hi) = row
                .voltage_drops
                .iter()
                .fold((0.0f64, -1.0f64), |(lo, hi), &v| (lo.min(v), hi.max(v)));
            let (lo, hi) = if row.voltage_drops.is_empty() {
                (0.0, 0.0)
            } else {
                (lo, hi)
            };
            w.write_record(&[
                r.fault_bus.to_string(),
                row.iteration.to_string(),
                format!("{:.8}", row.i_f),
                format!("{lo:.8}"),
                format!("{hi:.8}"),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_gscr_series(path: &Path, series: &[(usize, usize, f64)]) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(GSCR_SERIES_HEADER)?;
    for &(node, hour, value) in series {
        w.write_record(&[node.to_string(), hour.to_string(), format!("{value:.8}")])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_sampling_log(path: &Path, log: &[IterationRow]) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(SAMPLING_LOG_HEADER)?;
    for row in log {
        w.write_record(&[
            row.iteration.to_string(),
            row.tag.to_string(),
            row.omega_size.to_string(),
            row.delta_size.to_string(),
            row.misclassified.to_string(),
            format!("{:.8}", row.objective),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_violation_report(hours_path: &Path, summary_path: &Path, report: &ViolationReport) -> Result<()> {
    let mut w = writer(hours_path)?;
    w.write_record(VIOLATION_HOURS_HEADER)?;
    for h in &report.hours {
        w.write_record(&[
            h.node.to_string(),
            h.step.to_string(),
            format!("{:.8}", h.scc_margin),
            h.scc_ok.to_string(),
            h.gscr_margin.map_or("".to_string(), |m| format!("{m:.8}")),
            h.gscr_ok.to_string(),
        ])?;
    }
    w.flush()?;

    let mut w = writer(summary_path)?;
    w.write_record(VIOLATION_SUMMARY_HEADER)?;
    w.write_record(&[
        "scc".to_string(),
        format!("{:.4}", report.scc_violation_rate * 100.0),
        format!("{:.8}", report.worst_scc_margin),
    ])?;
    w.write_record(&[
        "gscr".to_string(),
        format!("{:.4}", report.gscr_violation_rate * 100.0),
        format!("{:.8}", report.worst_gscr_margin),
    ])?;
    w.flush()?;
    Ok(())
}

pub fn write_cost_comparison(path: &Path, rows: &[CaseRow]) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(COST_COMPARISON_HEADER)?;
    for r in rows {
        w.write_record(&[
            r.label.clone(),
            format!("{:.4}", r.bess_gw),
            format!("{:.4}", r.bess_cost_m_per_yr),
            format!("{:.4}", r.sc_gw),
            format!("{:.4}", r.sc_cost_m_per_yr),
            format!("{:.4}", r.operation_k_per_h),
            format!("{:.4}", r.total_m_per_yr),
            format!("{:.4}", r.scc_violation_pct),
            format!("{:.4}", r.gscr_violation_pct),
        ])?;
    }
    w.flush()?;
    Ok(())
}
