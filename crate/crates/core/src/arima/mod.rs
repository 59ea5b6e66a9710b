//! Univariate ARIMA modeling: KPSS-based differencing, conditional
//! sum-of-squares initialization refined by exact Gaussian likelihood, and
//! stepwise AICc order search.

mod kalman;
mod kpss;
mod optim;

pub use kalman::SIGMA2_FLOOR;
pub use kpss::{difference, kpss, select_d, KpssOutcome, KpssVariant};

use kalman::ArmaFilter;
use optim::{expand_pacf, nelder_mead};

use crate::{Error, Result};

/// Hard cap on AR and MA orders.
pub const MAX_ORDER: usize = 5;

/// Fitted ARIMA(p,d,q) model, optionally with a mean ("drift") term on the
/// differenced scale.
#[derive(Debug, Clone)]
pub struct ArimaModel {
    pub p: usize,
    pub d: usize,
    pub q: usize,
    pub drift: bool,
    /// AR coefficients (causal).
    pub ar: Vec<f64>,
    /// MA coefficients (invertible).
    pub ma: Vec<f64>,
    /// Mean of the differenced series implied by the drift term (0 without
    /// drift).
    pub mean: f64,
    /// Intercept form of the drift: `c = mean * (1 - sum(ar))`.
    pub c: f64,
    /// Innovation variance, floored at [`SIGMA2_FLOOR`].
    pub sigma2: f64,
    /// In-sample one-step prediction errors on the differenced scale
    /// (length = series length - d).
    pub residuals: Vec<f64>,
    pub loglik: f64,
    pub aicc: f64,
    /// Differenced training series, kept for forecasting.
    diffed: Vec<f64>,
    /// Last value of each difference level `0..d` of the training series,
    /// kept to integrate forecasts back to the original scale.
    heads: Vec<f64>,
}

impl ArimaModel {
    pub fn order(&self) -> (usize, usize, usize) {
        (self.p, self.d, self.q)
    }

    /// Number of estimated parameters counted by AICc
    /// (AR + MA + drift + innovation variance).
    pub fn n_params(&self) -> usize {
        self.p + self.q + usize::from(self.drift) + 1
    }

    /// Mean forecasts `h` steps ahead on the original scale: the ARMA
    /// recursion extends the differenced series, then forecasts are
    /// integrated `d` times from the last observed values. Horizon `j` of
    /// a longer forecast equals the j-step forecast exactly.
    pub fn forecast(&self, h: usize) -> Vec<f64> {
        let np = self.diffed.len();
        let mut ext = self.diffed.clone();
        ext.reserve(h);
        for j in 0..h {
            let t0 = np + j;
            let mut acc = self.mean;
            for (i, &phi) in self.ar.iter().enumerate() {
                acc += phi * (ext[t0 - 1 - i] - self.mean);
            }
            for (v, &theta) in self.ma.iter().enumerate() {
                // Future innovations are zero; in-sample ones contribute.
                if t0 > v && t0 - 1 - v < np {
                    acc += theta * self.residuals[t0 - 1 - v];
                }
            }
            ext.push(acc);
        }
        let mut out: Vec<f64> = ext[np..].to_vec();
        for level in (0..self.d).rev() {
            let mut prev = self.heads[level];
            for v in &mut out {
                prev += *v;
                *v = prev;
            }
        }
        out
    }
}

/// Fits ARIMA(p,d,q) by conditional sum of squares refined with the exact
/// Gaussian likelihood. A requested drift adds a mean on the differenced
/// scale (honored at any `d` when explicitly asked for; the automatic
/// search only requests it for `d < 2`).
pub fn fit_arima(series: &[f64], p: usize, d: usize, q: usize, drift: bool) -> Result<ArimaModel> {
    if p > MAX_ORDER || q > MAX_ORDER {
        return Err(Error::InvalidConfig(format!(
            "orders p={p}, q={q} exceed the cap of {MAX_ORDER}"
        )));
    }
    if d > 2 {
        return Err(Error::InvalidConfig(format!("d={d} exceeds 2")));
    }
    if series.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidConfig("series must be finite".into()));
    }
    let min_len = d + p + q + 2;
    if series.len() < min_len {
        return Err(Error::SeriesTooShort {
            len: series.len(),
            min: min_len,
        });
    }

    let z = difference(series, d)?;
    let mut heads = Vec::with_capacity(d);
    let mut level = series.to_vec();
    for _ in 0..d {
        heads.push(*level.last().expect("nonempty by length check"));
        level = difference(&level, 1)?;
    }
    debug_assert_eq!(level, z);

    let np = z.len();
    let dim = p + q + usize::from(drift);
    let z_mean = z.iter().sum::<f64>() / np as f64;

    if p + q == 0 {
        let mean = if drift { z_mean } else { 0.0 };
        let residuals: Vec<f64> = z.iter().map(|v| v - mean).collect();
        let sigma2 = (residuals.iter().map(|e| e * e).sum::<f64>() / np as f64).max(SIGMA2_FLOOR);
        let loglik = -0.5 * np as f64 * ((2.0 * std::f64::consts::PI).ln() + 1.0 + sigma2.ln());
        return finish_model(
            p, d, q, drift, Vec::new(), Vec::new(), mean, sigma2, residuals, loglik, z, heads, np,
        );
    }

    let mut filter = ArmaFilter::new(p, q);
    let unpack = |x: &[f64]| -> (Vec<f64>, Vec<f64>, f64) {
        let ar = expand_pacf(&x[..p]);
        let ma = expand_pacf(&x[p..p + q]);
        let mean = if drift { x[p + q] } else { 0.0 };
        (ar, ma, mean)
    };

    // Stage 1: conditional sum of squares with zero presample values.
    let css = |x: &[f64]| -> f64 {
        let (ar, ma, mean) = unpack(x);
        let mut err = vec![0.0f64; np];
        let mut ssq = 0.0;
        for t in 0..np {
            let mut e = z[t] - mean;
            for (i, &phi) in ar.iter().enumerate() {
                if t > i {
                    e -= phi * (z[t - 1 - i] - mean);
                }
            }
            for (v, &theta) in ma.iter().enumerate() {
                if t > v {
                    e -= theta * err[t - 1 - v];
                }
            }
            err[t] = e;
            ssq += e * e;
        }
        if ssq.is_finite() {
            ssq
        } else {
            f64::INFINITY
        }
    };

    let mut starts: Vec<Vec<f64>> = Vec::new();
    let mut zero = vec![0.0; dim];
    if drift {
        zero[p + q] = z_mean;
    }
    starts.push(zero.clone());
    let mut nudged = zero;
    for v in nudged.iter_mut().take(p + q) {
        *v = 0.2;
    }
    starts.push(nudged);

    let mut best_css: Option<(Vec<f64>, f64)> = None;
    for start in &starts {
        let (x, v) = nelder_mead(css, start, 0.4, 200 * dim.max(1), 1e-10);
        if v.is_finite() && best_css.as_ref().map_or(true, |(_, bv)| v < *bv) {
            best_css = Some((x, v));
        }
    }
    let css_opt = best_css
        .ok_or_else(|| Error::EstimationFailed("conditional sum of squares diverged".into()))?
        .0;

    // Stage 2: exact likelihood from the CSS optimum.
    let negll = |x: &[f64], filt: &mut ArmaFilter| -> f64 {
        let (ar, ma, mean) = unpack(x);
        match filt.loglik(&ar, &ma, &z, mean) {
            Some(ll) => -ll,
            None => f64::INFINITY,
        }
    };
    let mut ml_best: Option<(Vec<f64>, f64)> = None;
    for start in [css_opt, vec![0.0; dim]] {
        let (x, v) = nelder_mead(
            |x| negll(x, &mut filter),
            &start,
            0.25,
            250 * dim.max(1),
            1e-10,
        );
        if v.is_finite() && ml_best.as_ref().map_or(true, |(_, bv)| v < *bv) {
            ml_best = Some((x, v));
        }
    }
    let (x_opt, neg_ll) =
        ml_best.ok_or_else(|| Error::EstimationFailed("likelihood not finite at any start".into()))?;
    if !neg_ll.is_finite() {
        return Err(Error::EstimationFailed(
            "likelihood not finite at optimum".into(),
        ));
    }

    let (ar, ma, mean) = unpack(&x_opt);
    let fit = filter
        .filter(&ar, &ma, &z, mean)
        .ok_or_else(|| Error::EstimationFailed("filter failed at optimum".into()))?;
    finish_model(
        p,
        d,
        q,
        drift,
        ar,
        ma,
        mean,
        fit.sigma2,
        fit.innovations,
        fit.loglik,
        z,
        heads,
        np,
    )
}

#[allow(clippy::too_many_arguments)]
fn finish_model(
    p: usize,
    d: usize,
    q: usize,
    drift: bool,
    ar: Vec<f64>,
    ma: Vec<f64>,
    mean: f64,
    sigma2: f64,
    residuals: Vec<f64>,
    loglik: f64,
    diffed: Vec<f64>,
    heads: Vec<f64>,
    np: usize,
) -> Result<ArimaModel> {
    let k = (p + q + usize::from(drift) + 1) as f64;
    let denom = np as f64 - k - 1.0;
    let aicc = if denom > 0.0 {
        -2.0 * loglik + 2.0 * k * np as f64 / denom
    } else {
        f64::INFINITY
    };
    let c = mean * (1.0 - ar.iter().sum::<f64>());
    Ok(ArimaModel {
        p,
        d,
        q,
        drift,
        ar,
        ma,
        mean,
        c,
        sigma2,
        residuals,
        loglik,
        aicc,
        diffed,
        heads,
    })
}

/// Options for the automatic order search.
#[derive(Debug, Clone)]
pub struct AutoOptions {
    pub max_p: usize,
    pub max_q: usize,
    pub max_d: usize,
    pub kpss: KpssVariant,
}

impl Default for AutoOptions {
    fn default() -> Self {
        Self {
            max_p: MAX_ORDER,
            max_q: MAX_ORDER,
            max_d: 2,
            kpss: KpssVariant::Level,
        }
    }
}

/// Automatic ARIMA selection: `d` from the KPSS ladder, then a stepwise
/// AICc search from starts (2,2), (0,0), (1,0), (0,1) moving to +-1
/// neighbors and toggling drift (drift is only searched for `d < 2`). The
/// returned model has AICc no larger than any evaluated candidate; if every
/// candidate fails, falls back to ARIMA(0,d,0).
pub fn auto_arima(series: &[f64]) -> Result<ArimaModel> {
    auto_arima_with(series, &AutoOptions::default())
}

/// [`auto_arima`] with explicit limits and KPSS variant.
pub fn auto_arima_with(series: &[f64], opts: &AutoOptions) -> Result<ArimaModel> {
    if series.len() < 10 {
        return Err(Error::SeriesTooShort {
            len: series.len(),
            min: 10,
        });
    }
    let max_p = opts.max_p.min(MAX_ORDER);
    let max_q = opts.max_q.min(MAX_ORDER);
    let d = select_d(series, opts.max_d.min(2), opts.kpss)?;
    let allow_drift = d < 2;

    let feasible = |p: usize, q: usize| -> bool {
        p <= max_p && q <= max_q && series.len() >= d + p + q + 2
    };

    let mut tried: std::collections::HashMap<(usize, usize, bool), f64> =
        std::collections::HashMap::new();
    let mut best: Option<ArimaModel> = None;

    let evaluate = |p: usize,
                        q: usize,
                        drift: bool,
                        tried: &mut std::collections::HashMap<(usize, usize, bool), f64>,
                        best: &mut Option<ArimaModel>| {
        if !feasible(p, q) || tried.contains_key(&(p, q, drift)) {
            return;
        }
        let aicc = match fit_arima(series, p, d, q, drift) {
            Ok(model) => {
                let a = model.aicc;
                let better = best
                    .as_ref()
                    .map_or(true, |b| a < b.aicc || (a == b.aicc && model.n_params() < b.n_params()));
                if better {
                    *best = Some(model);
                }
                a
            }
            Err(_) => f64::INFINITY,
        };
        tried.insert((p, q, drift), aicc);
    };

    for (p, q) in [(2, 2), (0, 0), (1, 0), (0, 1)] {
        evaluate(p, q, allow_drift, &mut tried, &mut best);
    }

    while let Some((p, q, drift, before)) = best.as_ref().map(|c| (c.p, c.q, c.drift, c.aicc)) {
        let mut moves: Vec<(usize, usize, bool)> = Vec::with_capacity(5);
        if p > 0 {
            moves.push((p - 1, q, drift));
        }
        moves.push((p + 1, q, drift));
        if q > 0 {
            moves.push((p, q - 1, drift));
        }
        moves.push((p, q + 1, drift));
        if allow_drift {
            moves.push((p, q, !drift));
        }
        for (mp, mq, mdrift) in moves {
            evaluate(mp, mq, mdrift, &mut tried, &mut best);
        }
        if best.as_ref().map(|b| b.aicc) >= Some(before) {
            break;
        }
    }

    match best {
        Some(model) => Ok(model),
        None => fit_arima(series, 0, d, 0, false),
    }
}
