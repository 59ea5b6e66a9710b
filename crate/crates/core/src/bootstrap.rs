//! Stopping-time uncertainty by nonparametric bootstrap: one-step score
//! forecast errors and model residual curves are resampled with replacement
//! to produce variant forecasts at every window, giving a full error
//! sequence, a detected break, and a stopping time per replication.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::arima::fit_arima;
use crate::detector::{detect_breakpoint, rolling_isfe, training_window, IsfeSeries, WindowScheme};
use crate::fda::{inner_product, FunctionalTimeSeries, Grid};
use crate::forecast::{curve_from_scores, fit_fts, FtsModel, KernelChoice};
use crate::{Error, Result};

/// Controls for [`bootstrap_stopping_distribution`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BootstrapConfig {
    /// Number of bootstrap replications (B).
    pub replications: usize,
    /// Master seed; replication b draws from an independent substream, so
    /// results do not depend on scheduling.
    pub seed: u64,
    /// Optional worker-thread cap for this call (None uses the global pool).
    pub threads: Option<usize>,
    /// Refit the curve model on a resampled training window inside every
    /// replication (re-selecting the component count) instead of sharing
    /// the original per-window fits. Slower; kept for fidelity studies.
    pub deep: bool,
    /// Covariance kernel choice, mirroring the point pipeline.
    pub kernel: KernelChoice,
    /// Training-window scheme, mirroring the point pipeline.
    pub window: WindowScheme,
    /// Minimum points per regime in the break search.
    pub min_segment: usize,
}

impl Default for BootstrapConfig {
    fn default() -> Self {
        Self {
            replications: 1000,
            seed: 0,
            threads: None,
            deep: false,
            kernel: KernelChoice::default(),
            window: WindowScheme::default(),
            min_segment: 2,
        }
    }
}

/// Bootstrap distribution of the stopping time.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StoppingTimeDistribution {
    /// Stopping time of each successful replication, in replication order.
    pub samples: Vec<usize>,
    /// Most frequent stopping time; ties resolve to the smallest value.
    pub mode: usize,
    /// Stopping time → occurrence count; counts sum to the number of
    /// successful replications.
    pub frequency_table: BTreeMap<usize, usize>,
    /// Replications dropped because a forecast or detection failed.
    pub failures: usize,
}

/// One-step score-forecast error pools, one per retained component: the
/// errors β_t − β̂_{t|t−1} for t = 2..len, where β̂_{t|t−1} comes from the
/// component's selected model orders refit on the prefix β_1..β_{t−1}.
/// Prefixes shorter than three observations (and refits that fail) fall
/// back to the naive last-value forecast.
pub fn bootstrap_forecast_errors(model: &FtsModel) -> Vec<Vec<f64>> {
    (0..model.k())
        .map(|k| one_step_score_pool(&model.fpca.score_series(k), k, model))
        .collect()
}

fn one_step_score_pool(scores: &[f64], k: usize, model: &FtsModel) -> Vec<f64> {
    let template = &model.score_models[k];
    let (p, d, q) = template.order();
    let mut pool = Vec::with_capacity(scores.len().saturating_sub(1));
    for t in 1..scores.len() {
        let prefix = &scores[..t];
        let naive = *prefix.last().expect("non-empty prefix");
        let forecast = if prefix.len() < 3 {
            naive
        } else {
            fit_arima(prefix, p, d, q, template.drift)
                .map(|m| m.forecast(1)[0])
                .unwrap_or(naive)
        };
        pool.push(scores[t] - forecast);
    }
    pool
}

/// Residual-curve pool for a fitted model: the first `n − 1` rows of the
/// model's residual matrix (what remains of each training curve after the
/// mean and the retained components are removed).
fn residual_pool(model: &FtsModel) -> Vec<Vec<f64>> {
    let n = model.fpca.residuals.nrows();
    let take = n.saturating_sub(1).max(1);
    (0..take)
        .map(|i| model.fpca.residuals.row(i).iter().copied().collect())
        .collect()
}

/// One bootstrap variant of the one-step-ahead curve forecast: the point
/// score forecasts are perturbed by a draw from each component's error
/// pool, the curve is rebuilt from the perturbed scores, and a resampled
/// residual curve is added.
///
/// Draw order is frozen: one pool draw per component in component order,
/// then the residual draw.
pub fn bootstrap_curve(
    model: &FtsModel,
    pools: &[Vec<f64>],
    residual_curves: &[Vec<f64>],
    rng: &mut impl Rng,
) -> Result<Vec<f64>> {
    if pools.len() != model.k() {
        return Err(Error::DimensionMismatch(format!(
            "{} error pools for {} components",
            pools.len(),
            model.k()
        )));
    }
    if pools.iter().any(Vec::is_empty) || residual_curves.is_empty() {
        return Err(Error::InvalidConfig(
            "resampling pools must be non-empty".into(),
        ));
    }
    let mut scores = model.score_forecasts(1);
    for (s, pool) in scores.iter_mut().zip(pools) {
        *s += pool[rng.gen_range(0..pool.len())];
    }
    let mut curve = curve_from_scores(&model.fpca, &scores);
    let zeta = &residual_curves[rng.gen_range(0..residual_curves.len())];
    if zeta.len() != curve.len() {
        return Err(Error::DimensionMismatch(format!(
            "residual curve has {} points, curve has {}",
            zeta.len(),
            curve.len()
        )));
    }
    for (c, &z) in curve.iter_mut().zip(zeta) {
        *c += z;
    }
    Ok(curve)
}

/// Everything one forecast origin contributes to a replication.
struct WindowPrep {
    /// 1-based time index of the held-out curve.
    holdout: usize,
    model: FtsModel,
    pools: Vec<Vec<f64>>,
    residuals: Vec<Vec<f64>>,
    actual: Vec<f64>,
}

fn prepare_windows(
    fts: &FunctionalTimeSeries,
    kernel: KernelChoice,
    window: WindowScheme,
) -> Result<Vec<WindowPrep>> {
    let n = fts.n();
    if n < 5 {
        return Err(Error::SeriesTooShort { len: n, min: 5 });
    }
    let preps: Vec<Result<WindowPrep>> = (3..n)
        .into_par_iter()
        .map(|gamma| {
            let train = training_window(fts, gamma, window)?;
            let model = fit_fts(&train, kernel).map_err(|e| Error::WindowFit {
                gamma,
                source: Box::new(e),
            })?;
            let pools = bootstrap_forecast_errors(&model);
            let residuals = residual_pool(&model);
            Ok(WindowPrep {
                holdout: gamma + 1,
                pools,
                residuals,
                actual: fts.curve(gamma),
                model,
            })
        })
        .collect();
    preps.into_iter().collect()
}

/// One replication under shared fits: perturb each window's point forecast
/// by pool and residual draws, and return the error sequence.
fn replicate_errors(preps: &[WindowPrep], grid: &Grid, rng: &mut impl Rng) -> Result<Vec<f64>> {
    let mut errors = Vec::with_capacity(preps.len());
    for prep in preps {
        let curve = bootstrap_curve(&prep.model, &prep.pools, &prep.residuals, rng)?;
        errors.push(holdout_error(&curve, &prep.actual, grid)?);
    }
    Ok(errors)
}

/// One replication under deep refits: rebuild every training curve from
/// perturbed scores plus a resampled residual, refit the curve model on the
/// rebuilt window (re-selecting the component count), then forecast and add
/// a final residual draw.
fn deep_replicate_errors(
    preps: &[WindowPrep],
    grid: &Grid,
    kernel: KernelChoice,
    rng: &mut impl Rng,
) -> Result<Vec<f64>> {
    let mut errors = Vec::with_capacity(preps.len());
    for prep in preps {
        let len = prep.model.training_length;
        let mut rows = Vec::with_capacity(len);
        for t in 0..len {
            let mut scores: Vec<f64> = (0..prep.model.k())
                .map(|k| prep.model.fpca.scores[(t, k)])
                .collect();
            for (s, pool) in scores.iter_mut().zip(&prep.pools) {
                *s += pool[rng.gen_range(0..pool.len())];
            }
            let mut row = curve_from_scores(&prep.model.fpca, &scores);
            let zeta = &prep.residuals[rng.gen_range(0..prep.residuals.len())];
            for (c, &z) in row.iter_mut().zip(zeta) {
                *c += z;
            }
            rows.push(row);
        }
        let rebuilt = FunctionalTimeSeries::from_rows(grid.clone(), &rows)?;
        let refit = fit_fts(&rebuilt, kernel)?;
        let mut curve = refit.forecast_curve(1);
        let zeta = &prep.residuals[rng.gen_range(0..prep.residuals.len())];
        for (c, &z) in curve.iter_mut().zip(zeta) {
            *c += z;
        }
        errors.push(holdout_error(&curve, &prep.actual, grid)?);
    }
    Ok(errors)
}

fn holdout_error(forecast: &[f64], actual: &[f64], grid: &Grid) -> Result<f64> {
    let diff: Vec<f64> = forecast.iter().zip(actual).map(|(f, a)| f - a).collect();
    let err = inner_product(&diff, &diff, grid)?;
    if !err.is_finite() {
        return Err(Error::EstimationFailed("non-finite forecast error".into()));
    }
    Ok(err)
}

/// Bootstrap distribution of the stopping time. Per replication: draw a
/// variant one-step forecast for every window, form the error sequence on
/// the same holdout times as the point pipeline, and run the break search.
///
/// Failed replications are recorded and excluded; more than 10% failures
/// aborts with [`Error::BootstrapFailures`]. Identical inputs give a
/// bit-identical distribution regardless of thread count.
pub fn bootstrap_stopping_distribution(
    fts: &FunctionalTimeSeries,
    cfg: &BootstrapConfig,
) -> Result<StoppingTimeDistribution> {
    if cfg.replications == 0 {
        return Err(Error::InvalidConfig(
            "bootstrap needs at least one replication".into(),
        ));
    }
    if cfg.min_segment == 0 {
        return Err(Error::InvalidConfig(
            "minimum segment must be at least 1".into(),
        ));
    }
    let preps = prepare_windows(fts, cfg.kernel, cfg.window)?;
    let run = || run_replications(fts, cfg, &preps);
    let results = match cfg.threads {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| Error::EstimationFailed(format!("thread pool: {e}")))?
            .install(run),
        None => run(),
    };
    summarize(results, cfg.replications)
}

fn run_replications(
    fts: &FunctionalTimeSeries,
    cfg: &BootstrapConfig,
    preps: &[WindowPrep],
) -> Vec<Result<usize>> {
    let grid = fts.grid();
    let holdout_index: Vec<usize> = preps.iter().map(|p| p.holdout).collect();
    (0..cfg.replications as u64)
        .into_par_iter()
        .map(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(b + 1);
            let errors = if cfg.deep {
                deep_replicate_errors(preps, grid, cfg.kernel, &mut rng)?
            } else {
                replicate_errors(preps, grid, &mut rng)?
            };
            let isfe = IsfeSeries {
                holdout_index: holdout_index.clone(),
                errors,
            };
            Ok(detect_breakpoint(&isfe, cfg.min_segment)?.stopping_time)
        })
        .collect()
}

fn summarize(results: Vec<Result<usize>>, total: usize) -> Result<StoppingTimeDistribution> {
    let mut samples = Vec::with_capacity(results.len());
    let mut failures = 0usize;
    for r in results {
        match r {
            Ok(t) => samples.push(t),
            Err(_) => failures += 1,
        }
    }
    if failures * 10 > total {
        return Err(Error::BootstrapFailures { failures, total });
    }
    let mut frequency_table: BTreeMap<usize, usize> = BTreeMap::new();
    for &s in &samples {
        *frequency_table.entry(s).or_insert(0) += 1;
    }
    let mode = frequency_table
        .iter()
        .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(a.0)))
        .map(|(&v, _)| v)
        .ok_or(Error::BootstrapFailures { failures, total })?;
    Ok(StoppingTimeDistribution {
        samples,
        mode,
        frequency_table,
        failures,
    })
}

/// Point detection plus its bootstrap distribution, sharing the pipeline
/// settings carried by the config.
pub fn detect_with_bootstrap(
    fts: &FunctionalTimeSeries,
    cfg: &BootstrapConfig,
) -> Result<(crate::detector::DetectionResult, StoppingTimeDistribution)> {
    let isfe = rolling_isfe(fts, cfg.kernel, cfg.window)?;
    let breakpoint = detect_breakpoint(&isfe, cfg.min_segment)?;
    let dist = bootstrap_stopping_distribution(fts, cfg)?;
    Ok((
        crate::detector::DetectionResult { isfe, breakpoint },
        dist,
    ))
}
