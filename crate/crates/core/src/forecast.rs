//! Curve forecasting: dynamic functional principal components from the
//! long-run covariance, one ARIMA model per score series, and h-step-ahead
//! curve reconstruction.

use crate::arima::{auto_arima, fit_arima, ArimaModel};
use crate::fda::{
    fpca_from_eigen, long_run_covariance, plugin_bandwidth, select_k, weighted_eigen, FpcaModel,
    FunctionalTimeSeries, KernelKind, KernelSpec, SurfaceKind,
};
use crate::{Error, Result};

/// How the long-run covariance kernel is chosen at fit time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KernelChoice {
    /// Named kernel with a plug-in bandwidth recomputed from the data at
    /// every refit (falls back to bandwidth 1 when fewer than 4 curves).
    Auto { kind: KernelKind },
    /// Fully specified kernel and bandwidth.
    Fixed(KernelSpec),
}

impl Default for KernelChoice {
    fn default() -> Self {
        Self::Auto {
            kind: KernelKind::Bartlett,
        }
    }
}

/// Fitted functional time series model: principal components of the
/// long-run covariance plus one score model per retained component.
///
/// The fitted object is immutable; forecasting takes `&self` and is safe to
/// call concurrently.
#[derive(Debug, Clone)]
pub struct FtsModel {
    pub fpca: FpcaModel,
    /// One model per retained component (same order as the eigenfunctions).
    pub score_models: Vec<ArimaModel>,
    /// Kernel actually used, with the resolved bandwidth.
    pub kernel: KernelSpec,
    pub training_length: usize,
}

impl FtsModel {
    /// Number of retained components.
    pub fn k(&self) -> usize {
        self.fpca.k()
    }

    /// h-step-ahead forecast of each score series (length K).
    pub fn score_forecasts(&self, h: usize) -> Vec<f64> {
        assert!(h >= 1, "forecast horizon must be at least 1");
        self.score_models
            .iter()
            .map(|m| m.forecast(h)[h - 1])
            .collect()
    }

    /// h-step-ahead curve forecast: mean curve plus forecast-score-weighted
    /// eigenfunctions.
    pub fn forecast_curve(&self, h: usize) -> Vec<f64> {
        curve_from_scores(&self.fpca, &self.score_forecasts(h))
    }
}

/// Reconstructs a curve from component scores: mean + sum of
/// score-weighted eigenfunctions. Linear in `scores`.
pub fn curve_from_scores(fpca: &FpcaModel, scores: &[f64]) -> Vec<f64> {
    let mut curve = fpca.mean.clone();
    for (k, &s) in scores.iter().enumerate().take(fpca.k()) {
        let func = fpca.eigenfunctions.column(k);
        for (c, &f) in curve.iter_mut().zip(func.iter()) {
            *c += s * f;
        }
    }
    curve
}

/// Fits the functional model: long-run covariance (plug-in bandwidth
/// unless overridden), eigendecomposition, component count from the
/// eigenvalue-ratio rule, then one score model per component.
///
/// Score models degrade with the training length so that very short
/// expanding windows still produce forecasts: automatic order selection
/// from 10 curves, a pure unit-root model below that (whose forecast is
/// the last observed score, i.e. the naive continuation).
pub fn fit_fts(fts: &FunctionalTimeSeries, kernel: KernelChoice) -> Result<FtsModel> {
    let n = fts.n();
    if n < 3 {
        return Err(Error::InsufficientTraining { n, min: 3 });
    }
    let spec = match kernel {
        KernelChoice::Fixed(spec) => spec,
        KernelChoice::Auto { kind } => {
            let bandwidth = if n >= 4 {
                plugin_bandwidth(fts, kind)?
            } else {
                1.0
            };
            KernelSpec::new(kind, bandwidth)?
        }
    };
    let lrc = long_run_covariance(fts, &spec)?;
    let pairs = weighted_eigen(&lrc)?;
    let k = select_k(&pairs.eigenvalues, n)?;
    let fpca = fpca_from_eigen(fts, SurfaceKind::LongRun, pairs, k)?;

    let mut score_models = Vec::with_capacity(k);
    for j in 0..k {
        let scores = fpca.score_series(j);
        score_models.push(fit_score_model(&scores)?);
    }
    Ok(FtsModel {
        fpca,
        score_models,
        kernel: spec,
        training_length: n,
    })
}

fn fit_score_model(scores: &[f64]) -> Result<ArimaModel> {
    if scores.len() >= 10 {
        auto_arima(scores).or_else(|_| fit_arima(scores, 0, 1, 0, false))
    } else {
        fit_arima(scores, 0, 1, 0, false)
    }
}
