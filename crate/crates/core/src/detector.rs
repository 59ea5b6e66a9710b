//! Rolling one-step-ahead integrated squared forecast errors and
//! single-break detection by SSR minimization on the differenced error
//! sequence.

use rayon::prelude::*;

use crate::fda::{inner_product, FunctionalTimeSeries};
use crate::forecast::{fit_fts, KernelChoice};
use crate::{Error, Result};

/// One-step-ahead integrated squared forecast errors from successively
/// refit models.
#[derive(Debug, Clone, PartialEq)]
pub struct IsfeSeries {
    /// Time index (1-based) of each held-out curve: 4..=n.
    pub holdout_index: Vec<usize>,
    /// Quadrature of the squared forecast error for that curve; all
    /// entries are finite and nonnegative.
    pub errors: Vec<f64>,
}

impl IsfeSeries {
    pub fn len(&self) -> usize {
        self.errors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.errors.is_empty()
    }
}

/// Training window used for each refit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WindowScheme {
    /// All curves up to the forecast origin (grows by one each step).
    Expanding,
    /// Only the most recent `w` curves (all of them while fewer than `w`
    /// are available).
    Fixed(usize),
}

impl Default for WindowScheme {
    /// Width-3 rolling window: every refit sees the same amount of data,
    /// so the error sequence is homogeneous across the sample and a level
    /// shift in the process shows up as an isolated error spike rather
    /// than a slow drift. Pass `Expanding` explicitly for growing
    /// training windows.
    fn default() -> Self {
        Self::Fixed(3)
    }
}

/// Detected break in the differenced error sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct BreakpointResult {
    /// Time-scale index of the break: the last holdout time whose
    /// differenced error belongs to the first regime.
    pub break_index: usize,
    /// Admissible break candidates on the same time scale, aligned with
    /// `ssr_profile`.
    pub candidates: Vec<usize>,
    /// Sum of squared residuals of the two-mean fit at each candidate.
    pub ssr_profile: Vec<f64>,
    /// Segment means of the differenced errors before and after the break.
    pub regime_means: (f64, f64),
    /// Reported optimal stopping time: the 1-based position, within the
    /// sequence of evaluated forecasts, of the first post-regime error
    /// (`break_index - 2` on the curve-time scale).
    pub stopping_time: usize,
}

/// Full detection output: the error series plus the break found in it.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectionResult {
    pub isfe: IsfeSeries,
    pub breakpoint: BreakpointResult,
}

/// Training curves available at forecast origin `gamma` under the given
/// scheme: the full prefix of the first `gamma` curves, or its tail of the
/// fixed length (never fewer than three curves, never more than exist).
pub fn training_window(
    fts: &FunctionalTimeSeries,
    gamma: usize,
    scheme: WindowScheme,
) -> Result<FunctionalTimeSeries> {
    match scheme {
        WindowScheme::Expanding => fts.prefix(gamma),
        WindowScheme::Fixed(w) => {
            let len = w.max(3).min(gamma);
            fts.window(gamma - len, len)
        }
    }
}

/// Computes one-step-ahead integrated squared forecast errors: for each
/// origin γ = 3..n−1 fit on the training window ending at γ, forecast one
/// step, and integrate the squared deviation from the realized curve.
/// Returns n−3 errors for holdout times 4..=n.
///
/// Windows are evaluated in parallel; output order is deterministic.
pub fn rolling_isfe(
    fts: &FunctionalTimeSeries,
    kernel: KernelChoice,
    window: WindowScheme,
) -> Result<IsfeSeries> {
    let n = fts.n();
    if n < 5 {
        return Err(Error::SeriesTooShort { len: n, min: 5 });
    }
    let grid = fts.grid();
    let results: Vec<Result<f64>> = (3..n)
        .into_par_iter()
        .map(|gamma| {
            let train = training_window(fts, gamma, window)?;
            let model = fit_fts(&train, kernel).map_err(|e| Error::WindowFit {
                gamma,
                source: Box::new(e),
            })?;
            let forecast = model.forecast_curve(1);
            let actual = fts.curve(gamma);
            let diff: Vec<f64> = forecast
                .iter()
                .zip(actual.iter())
                .map(|(f, a)| f - a)
                .collect();
            let err = inner_product(&diff, &diff, grid)?;
            if !err.is_finite() {
                return Err(Error::WindowFit {
                    gamma,
                    source: Box::new(Error::EstimationFailed(
                        "non-finite forecast error".into(),
                    )),
                });
            }
            Ok(err)
        })
        .collect();

    let mut errors = Vec::with_capacity(n - 3);
    for r in results {
        errors.push(r?);
    }
    Ok(IsfeSeries {
        holdout_index: (4..=n).collect(),
        errors,
    })
}

/// Finds the single break that minimizes the sum of squared residuals of a
/// two-mean fit to the differenced error sequence. The first (boundary)
/// difference is never formed: differences start at holdout time 5. Ties
/// go to the smallest index.
pub fn detect_breakpoint(isfe: &IsfeSeries, min_segment: usize) -> Result<BreakpointResult> {
    if min_segment < 1 {
        return Err(Error::InvalidConfig("min_segment must be at least 1".into()));
    }
    let m = isfe.errors.len();
    let need = 2 * min_segment + 1;
    if m < need {
        return Err(Error::InsufficientErrors { len: m, min: need });
    }
    let diffs: Vec<f64> = isfe
        .errors
        .windows(2)
        .map(|pair| pair[1] - pair[0])
        .collect();
    let l = diffs.len();

    let mut candidates = Vec::with_capacity(l - 2 * min_segment + 1);
    let mut ssr_profile = Vec::with_capacity(l - 2 * min_segment + 1);
    let mut best: Option<(usize, f64, (f64, f64))> = None;
    for s in min_segment..=(l - min_segment) {
        let (pre, post) = diffs.split_at(s);
        let ssr = segment_ssr(pre) + segment_ssr(post);
        // Differences start at holdout time 5, so the last pre-regime
        // difference sits at time s + 4.
        let candidate_time = isfe.holdout_index[0] + s;
        candidates.push(candidate_time);
        ssr_profile.push(ssr);
        if best.as_ref().map_or(true, |&(_, b, _)| ssr < b) {
            best = Some((s, ssr, (mean(pre), mean(post))));
        }
    }
    let (s, _, regime_means) = best.expect("at least one admissible split");
    let break_index = isfe.holdout_index[0] + s;
    Ok(BreakpointResult {
        break_index,
        candidates,
        ssr_profile,
        regime_means,
        stopping_time: break_index.saturating_sub(2),
    })
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn segment_ssr(xs: &[f64]) -> f64 {
    let m = mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).sum()
}

/// Full pipeline on a functional time series: one-step-ahead errors under the
/// default window scheme, then break detection with the default minimum
/// segment of 2.
pub fn stopping_time(fts: &FunctionalTimeSeries, kernel: KernelChoice) -> Result<DetectionResult> {
    stopping_time_with(fts, kernel, WindowScheme::default(), 2)
}

/// [`stopping_time`] with an explicit window scheme and minimum segment.
pub fn stopping_time_with(
    fts: &FunctionalTimeSeries,
    kernel: KernelChoice,
    window: WindowScheme,
    min_segment: usize,
) -> Result<DetectionResult> {
    let isfe = rolling_isfe(fts, kernel, window)?;
    let breakpoint = detect_breakpoint(&isfe, min_segment)?;
    Ok(DetectionResult { isfe, breakpoint })
}
