//! Artifact writers. All outputs are plain text: comma-separated values
//! with '.' decimals, UTF-8, LF line endings — ready for any plotting tool.
//! Numbers print in shortest round-trip form, so identical runs produce
//! byte-identical files.

use std::fmt::Write as _;
use std::path::Path;

use stoptime_core::bootstrap::StoppingTimeDistribution;
use stoptime_core::simulate::McSummary;

use crate::error::CliResult;
use crate::report::{IsfeColumns, SsrColumns};

pub fn write_file(dir: &Path, name: &str, content: &str) -> CliResult<()> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join(name), content)?;
    Ok(())
}

pub fn isfe_csv(cols: &IsfeColumns) -> String {
    let mut s = String::from("holdout_index,isfe\n");
    for (i, e) in cols.holdout_index.iter().zip(&cols.error) {
        let _ = writeln!(s, "{i},{e}");
    }
    s
}

pub fn ssr_csv(cols: &SsrColumns) -> String {
    let mut s = String::from("break_index,ssr\n");
    for (i, v) in cols.break_index.iter().zip(&cols.ssr) {
        let _ = writeln!(s, "{i},{v}");
    }
    s
}

pub fn frequency_csv(dist: &StoppingTimeDistribution) -> String {
    let mut s = String::from("stopping_time,count\n");
    for (t, c) in &dist.frequency_table {
        let _ = writeln!(s, "{t},{c}");
    }
    s
}

pub fn forecast_csv(points: &[f64], horizons: &[Vec<f64>]) -> String {
    let mut s = String::from("grid");
    for h in 1..=horizons.len() {
        let _ = write!(s, ",h{h}");
    }
    s.push('\n');
    for (j, x) in points.iter().enumerate() {
        let _ = write!(s, "{x}");
        for curve in horizons {
            let _ = write!(s, ",{}", curve[j]);
        }
        s.push('\n');
    }
    s
}

pub struct CaseRow {
    pub label: String,
    pub summary: McSummary,
}

pub fn results_csv(rows: &[CaseRow]) -> String {
    let mut s = String::from(
        "case,replications,completed,failures,mean_tau_hat,median_tau_hat,\
         mean_true_tau,median_true_tau,rate_at_or_after,total_redraws\n",
    );
    for r in rows {
        let m = &r.summary;
        let rate = m.count_at_or_after as f64 / m.completed.max(1) as f64;
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{},{}",
            r.label,
            m.replications,
            m.completed,
            m.failures,
            m.mean_tau_hat,
            m.median_tau_hat,
            m.mean_true_tau,
            m.median_true_tau,
            rate,
            m.total_redraws
        );
    }
    s
}

/// Fixed-width companion table for terminal reading.
pub fn results_txt(rows: &[CaseRow]) -> String {
    let label_w = rows
        .iter()
        .map(|r| r.label.len())
        .max()
        .unwrap_or(4)
        .max(4);
    let mut s = format!(
        "{:<label_w$}  {:>5}  {:>5}  {:>5}  {:>9}  {:>9}  {:>9}  {:>9}  {:>9}  {:>8}\n",
        "case",
        "reps",
        "done",
        "fail",
        "mean_hat",
        "med_hat",
        "mean_tau",
        "med_tau",
        "rate>=",
        "redraws"
    );
    for r in rows {
        let m = &r.summary;
        let rate = m.count_at_or_after as f64 / m.completed.max(1) as f64;
        let _ = writeln!(
            s,
            "{:<label_w$}  {:>5}  {:>5}  {:>5}  {:>9.3}  {:>9.1}  {:>9.3}  {:>9.1}  {:>9.3}  {:>8}",
            r.label,
            m.replications,
            m.completed,
            m.failures,
            m.mean_tau_hat,
            m.median_tau_hat,
            m.mean_true_tau,
            m.median_true_tau,
            rate,
            m.total_redraws
        );
    }
    s
}
