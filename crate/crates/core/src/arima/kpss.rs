//! KPSS stationarity test and the differencing-order ladder built on it.

use crate::{Error, Result};

/// Which deterministic component the test removes before forming
/// partial sums.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KpssVariant {
    /// Stationary around a constant level. The default.
    #[default]
    Level,
    /// Stationary around a linear trend.
    Trend,
}

impl KpssVariant {
    /// 5% critical value.
    pub fn critical_value(self) -> f64 {
        match self {
            KpssVariant::Level => 0.463,
            KpssVariant::Trend => 0.146,
        }
    }
}

/// Outcome of one KPSS test at the 5% level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KpssOutcome {
    pub statistic: f64,
    pub critical_value: f64,
    pub reject: bool,
    /// Bartlett truncation lag used for the long-run variance.
    pub lag: usize,
}

/// KPSS statistic: `n^{-2} sum_t S_t^2 / s^2(l)` with Bartlett-weighted
/// long-run variance and truncation `l = floor(4 (n/100)^{1/4})`. A
/// degenerate (constant) series scores 0 and is never rejected.
pub fn kpss(series: &[f64], variant: KpssVariant) -> Result<KpssOutcome> {
    let n = series.len();
    if n < 8 {
        return Err(Error::SeriesTooShort { len: n, min: 8 });
    }
    if series.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidConfig("series must be finite".into()));
    }
    let e = match variant {
        KpssVariant::Level => {
            let mean = series.iter().sum::<f64>() / n as f64;
            series.iter().map(|v| v - mean).collect::<Vec<f64>>()
        }
        KpssVariant::Trend => detrend(series),
    };

    let mut eta = 0.0;
    let mut s = 0.0;
    for v in &e {
        s += v;
        eta += s * s;
    }
    eta /= (n * n) as f64;

    let lag = (4.0 * (n as f64 / 100.0).powf(0.25)).floor() as usize;
    let lag = lag.min(n - 1);
    let gamma = |j: usize| -> f64 {
        let mut acc = 0.0;
        for t in j..n {
            acc += e[t] * e[t - j];
        }
        acc / n as f64
    };
    let mut s2 = gamma(0);
    for j in 1..=lag {
        s2 += 2.0 * (1.0 - j as f64 / (lag as f64 + 1.0)) * gamma(j);
    }

    let statistic = if s2 > 1e-300 { eta / s2 } else { 0.0 };
    let critical_value = variant.critical_value();
    Ok(KpssOutcome {
        statistic,
        critical_value,
        reject: statistic > critical_value,
        lag,
    })
}

/// Residuals from least-squares regression on an intercept and linear time.
fn detrend(series: &[f64]) -> Vec<f64> {
    let n = series.len() as f64;
    let t_mean = (n + 1.0) / 2.0;
    let y_mean = series.iter().sum::<f64>() / n;
    let mut num = 0.0;
    let mut den = 0.0;
    for (i, y) in series.iter().enumerate() {
        let td = (i + 1) as f64 - t_mean;
        num += td * (y - y_mean);
        den += td * td;
    }
    let slope = if den > 0.0 { num / den } else { 0.0 };
    let intercept = y_mean - slope * t_mean;
    series
        .iter()
        .enumerate()
        .map(|(i, y)| y - intercept - slope * (i + 1) as f64)
        .collect()
}

/// First differences applied `d` times.
pub fn difference(series: &[f64], d: usize) -> Result<Vec<f64>> {
    if series.len() <= d {
        return Err(Error::SeriesTooShort {
            len: series.len(),
            min: d + 1,
        });
    }
    let mut z = series.to_vec();
    for _ in 0..d {
        z = z.windows(2).map(|w| w[1] - w[0]).collect();
    }
    Ok(z)
}

/// Smallest `d` in `0..=max_d` whose d-th difference the KPSS test does not
/// reject; returns `max_d` when every level rejects.
pub fn select_d(series: &[f64], max_d: usize, variant: KpssVariant) -> Result<usize> {
    if series.len() < max_d + 8 {
        return Err(Error::SeriesTooShort {
            len: series.len(),
            min: max_d + 8,
        });
    }
    for d in 0..=max_d {
        let z = difference(series, d)?;
        if !kpss(&z, variant)?.reject {
            return Ok(d);
        }
    }
    Ok(max_d)
}
