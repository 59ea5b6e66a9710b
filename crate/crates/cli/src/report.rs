//! Serializable run reports. The JSON schema is versioned through the
//! `schema` field, and every report deserializes back to an equal value.

use serde::{Deserialize, Serialize};
use stoptime_core::bootstrap::StoppingTimeDistribution;
use stoptime_core::detector::DetectionResult;

pub const SCHEMA: &str = "stoptime-report/1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionReport {
    pub schema: String,
    pub command: String,
    pub input: InputEcho,
    pub config: ConfigEcho,
    pub stopping_time: usize,
    pub break_index: usize,
    pub regime_means: (f64, f64),
    pub isfe: IsfeColumns,
    pub ssr: SsrColumns,
    /// Retained component count per training window (verbose runs only).
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub components_per_window: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub bootstrap: Option<BootstrapReport>,
    pub runtime: RuntimeStats,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputEcho {
    pub path: String,
    pub layout: String,
    pub curves: usize,
    pub grid_points: usize,
    /// An acquisition-time column was present in the file and ignored.
    pub timestamp_column_ignored: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub window: String,
    pub kernel: String,
    /// Fixed bandwidth, or None for the plug-in rule.
    pub bandwidth: Option<f64>,
    pub min_segment: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IsfeColumns {
    pub holdout_index: Vec<usize>,
    pub error: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SsrColumns {
    pub break_index: Vec<usize>,
    pub ssr: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapReport {
    pub replications: usize,
    pub seed: u64,
    pub deep: bool,
    pub failures: usize,
    pub mode: usize,
    pub quantiles: Quantiles,
}

/// Nearest-rank quantiles of the bootstrap stopping times.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Quantiles {
    pub q05: usize,
    pub q25: usize,
    pub median: usize,
    pub q75: usize,
    pub q95: usize,
}

/// Deterministic run counters (no wall-clock times, so that identical
/// inputs give byte-identical reports).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuntimeStats {
    pub windows_evaluated: usize,
    pub candidate_splits: usize,
}

pub fn isfe_columns(det: &DetectionResult) -> IsfeColumns {
    IsfeColumns {
        holdout_index: det.isfe.holdout_index.clone(),
        error: det.isfe.errors.clone(),
    }
}

pub fn ssr_columns(det: &DetectionResult) -> SsrColumns {
    SsrColumns {
        break_index: det.breakpoint.candidates.clone(),
        ssr: det.breakpoint.ssr_profile.clone(),
    }
}

/// Nearest-rank quantile: the smallest sample with at least a fraction `p`
/// of the distribution at or below it.
fn nearest_rank(sorted: &[usize], p: f64) -> usize {
    let m = sorted.len();
    let rank = (p * m as f64).ceil() as usize;
    sorted[rank.clamp(1, m) - 1]
}

pub fn bootstrap_report(
    dist: &StoppingTimeDistribution,
    replications: usize,
    seed: u64,
    deep: bool,
) -> BootstrapReport {
    let mut sorted = dist.samples.clone();
    sorted.sort_unstable();
    BootstrapReport {
        replications,
        seed,
        deep,
        failures: dist.failures,
        mode: dist.mode,
        quantiles: Quantiles {
            q05: nearest_rank(&sorted, 0.05),
            q25: nearest_rank(&sorted, 0.25),
            median: nearest_rank(&sorted, 0.50),
            q75: nearest_rank(&sorted, 0.75),
            q95: nearest_rank(&sorted, 0.95),
        },
    }
}
