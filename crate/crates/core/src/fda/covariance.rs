//! Autocovariance surfaces, kernel-weighted long-run covariance, and the
//! two-stage plug-in bandwidth.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::{FunctionalTimeSeries, Grid};
use crate::{Error, Result};

/// Which estimator produced a covariance surface.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SurfaceKind {
    /// Empirical autocovariance at a single lag.
    Autocovariance { lag: i64 },
    /// Kernel-weighted sum of autocovariances over lags.
    LongRun,
}

/// Discretized covariance surface on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceSurface {
    pub grid: Grid,
    pub matrix: DMatrix<f64>,
    pub kind: SurfaceKind,
}

impl CovarianceSurface {
    /// Quadrature trace `∫ C(u,u) du`.
    pub fn trace(&self) -> f64 {
        let w = self.grid.weights();
        (0..self.grid.len()).map(|i| w[i] * self.matrix[(i, i)]).sum()
    }

    /// Squared Hilbert-Schmidt norm `∫∫ C(u,v)^2 du dv` under quadrature.
    pub fn hs_norm_sq(&self) -> f64 {
        let w = self.grid.weights();
        let p = self.grid.len();
        let mut acc = 0.0;
        for j in 0..p {
            for i in 0..p {
                let c = self.matrix[(i, j)];
                acc += w[i] * w[j] * c * c;
            }
        }
        acc
    }

    /// Largest absolute deviation from symmetry, relative to the largest
    /// absolute entry (0 for an all-zero matrix).
    pub fn max_asymmetry(&self) -> f64 {
        let m = &self.matrix;
        let scale = m.iter().fold(0.0f64, |a, &v| a.max(v.abs()));
        if scale == 0.0 {
            return 0.0;
        }
        let p = m.nrows();
        let mut worst = 0.0f64;
        for j in 0..p {
            for i in (j + 1)..p {
                worst = worst.max((m[(i, j)] - m[(j, i)]).abs());
            }
        }
        worst / scale
    }
}

/// Pointwise mean curve.
pub fn mean_function(fts: &FunctionalTimeSeries) -> Vec<f64> {
    let x = fts.values();
    let n = x.nrows() as f64;
    (0..x.ncols()).map(|j| x.column(j).sum() / n).collect()
}

fn centered(fts: &FunctionalTimeSeries) -> DMatrix<f64> {
    let mean = mean_function(fts);
    let mut xc = fts.values().clone();
    for j in 0..xc.ncols() {
        let mj = mean[j];
        for i in 0..xc.nrows() {
            xc[(i, j)] -= mj;
        }
    }
    xc
}

/// Empirical lag-`lag` autocovariance surface with 1/n normalization:
/// positive lags pair each curve with one `lag` steps later, and
/// `C_{-l}(u,v) = C_l(v,u)`.
pub fn autocovariance_surface(fts: &FunctionalTimeSeries, lag: i64) -> Result<CovarianceSurface> {
    let xc = centered(fts);
    let m = lag_surface(&xc, lag, fts.n())?;
    Ok(CovarianceSurface {
        grid: fts.grid().clone(),
        matrix: m,
        kind: SurfaceKind::Autocovariance { lag },
    })
}

/// Lag surface on an already-centered matrix.
fn lag_surface(xc: &DMatrix<f64>, lag: i64, n: usize) -> Result<DMatrix<f64>> {
    let l = lag.unsigned_abs() as usize;
    if l >= n {
        return Err(Error::LagExceedsSample { lag, n });
    }
    let rows = n - l;
    // lag >= 0: (1/n) sum_t Xc_t(u) Xc_{t+l}(v); negative lags transpose.
    let head = xc.rows(0, rows);
    let tail = xc.rows(l, rows);
    let mut m = if lag >= 0 {
        head.tr_mul(&tail)
    } else {
        tail.tr_mul(&head)
    };
    m /= n as f64;
    Ok(m)
}

/// Kernel families for long-run covariance weighting.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelKind {
    /// `1 - |x|` on `[-1, 1]`; order 1. The default.
    #[default]
    Bartlett,
    /// 1 on `[-1/2, 1/2]`, linear taper to 0 at `|x| = 1`; treated as order 2.
    FlatTop,
}

impl KernelKind {
    /// Kernel weight at `x = lag / bandwidth`.
    pub fn weight(self, x: f64) -> f64 {
        let a = x.abs();
        if a > 1.0 {
            return 0.0;
        }
        match self {
            KernelKind::Bartlett => 1.0 - a,
            KernelKind::FlatTop => {
                if a <= 0.5 {
                    1.0
                } else {
                    2.0 * (1.0 - a)
                }
            }
        }
    }

    /// Characteristic order kappa used by the plug-in bandwidth rate.
    pub fn order(self) -> u32 {
        match self {
            KernelKind::Bartlett => 1,
            KernelKind::FlatTop => 2,
        }
    }

    /// `∫ W(x)^2 dx` over `[-1, 1]`.
    fn l2_norm_sq(self) -> f64 {
        match self {
            KernelKind::Bartlett => 2.0 / 3.0,
            KernelKind::FlatTop => 4.0 / 3.0,
        }
    }

    /// Kernel constant `lim (1 - W(x)) / |x|^kappa`; the flat-top taper is
    /// exactly 1 near zero, so a unit stand-in keeps the rate usable.
    fn order_constant(self) -> f64 {
        1.0
    }
}

/// Kernel plus bandwidth for long-run covariance estimation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec {
    pub kind: KernelKind,
    pub bandwidth: f64,
}

impl KernelSpec {
    pub fn new(kind: KernelKind, bandwidth: f64) -> Result<Self> {
        if !bandwidth.is_finite() || bandwidth <= 0.0 {
            return Err(Error::InvalidConfig(format!(
                "bandwidth must be positive and finite, got {bandwidth}"
            )));
        }
        Ok(Self { kind, bandwidth })
    }

    pub fn bartlett(bandwidth: f64) -> Result<Self> {
        Self::new(KernelKind::Bartlett, bandwidth)
    }
}

/// Kernel-weighted long-run covariance surface
/// `sum_l W(l / bandwidth) C_l(u,v)`, symmetrized.
pub fn long_run_covariance(
    fts: &FunctionalTimeSeries,
    kernel: &KernelSpec,
) -> Result<CovarianceSurface> {
    let n = fts.n();
    if n < 2 {
        return Err(Error::SeriesTooShort { len: n, min: 2 });
    }
    let xc = centered(fts);
    let max_lag = kernel.bandwidth.floor().min((n - 1) as f64) as usize;

    let mut acc = lag_surface(&xc, 0, n)? * kernel.kind.weight(0.0);
    for l in 1..=max_lag {
        let w = kernel.kind.weight(l as f64 / kernel.bandwidth);
        if w == 0.0 {
            continue;
        }
        let gl = lag_surface(&xc, l as i64, n)?;
        // C_l + C_{-l} = C_l + C_l^T
        acc += (&gl + gl.transpose()) * w;
    }
    let sym = (&acc + acc.transpose()) * 0.5;
    Ok(CovarianceSurface {
        grid: fts.grid().clone(),
        matrix: sym,
        kind: SurfaceKind::LongRun,
    })
}

/// Two-stage plug-in bandwidth: truncated pilot sums at `ceil(n^{1/5})`
/// lags estimate the long-run surface and its order-kappa weighted lag sum,
/// and the returned bandwidth is the rate-optimal `c * n^{1/(2 kappa + 1)}`,
/// floored at 1.
pub fn plugin_bandwidth(fts: &FunctionalTimeSeries, kind: KernelKind) -> Result<f64> {
    let n = fts.n();
    if n < 4 {
        return Err(Error::SeriesTooShort { len: n, min: 4 });
    }
    let xc = centered(fts);
    let kappa = kind.order();
    let pilot = (n as f64).powf(0.2).ceil() as usize;
    let pilot = pilot.min(n - 1).max(1);

    let mut c0 = lag_surface(&xc, 0, n)?;
    let p = c0.ncols();
    let mut ck = DMatrix::<f64>::zeros(p, p);
    for l in 1..=pilot {
        let gl = lag_surface(&xc, l as i64, n)?;
        let sym = &gl + gl.transpose();
        c0 += &sym;
        ck += sym * (l as f64).powi(kappa as i32);
    }

    let grid = fts.grid().clone();
    let base = CovarianceSurface {
        grid: grid.clone(),
        matrix: c0,
        kind: SurfaceKind::LongRun,
    };
    let weighted = CovarianceSurface {
        grid,
        matrix: ck,
        kind: SurfaceKind::LongRun,
    };

    let tr = base.trace();
    let denom = kind.l2_norm_sq() * (base.hs_norm_sq() + tr * tr);
    let ckon = kind.order_constant();
    let num = 2.0 * kappa as f64 * ckon * ckon * weighted.hs_norm_sq();
    if !denom.is_finite() || !num.is_finite() || denom <= 1e-300 || num <= 0.0 {
        return Ok(1.0);
    }
    let expo = 1.0 / (2.0 * kappa as f64 + 1.0);
    let h = (num / denom * n as f64).powf(expo);
    Ok(h.max(1.0))
}
