//! Synthetic functional time series with planted breaks, and a Monte Carlo
//! harness that summarizes detection accuracy over replications.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::detector::stopping_time;
use crate::fda::{long_run_covariance, plugin_bandwidth, FunctionalTimeSeries, Grid, KernelSpec};
use crate::forecast::KernelChoice;
use crate::{Error, Result};

/// Pointwise functional AR(1) whose autoregressive coefficient jumps from
/// `rho` to `rho + c_post` halfway through; the observed curves are the
/// normalized absolute one-step changes of the latent paths.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Far1Config {
    pub n: usize,
    pub omega: f64,
    pub rho: f64,
    pub c_post: f64,
    pub grid_points: usize,
    pub seed: u64,
}

impl Far1Config {
    /// Standard configuration: coefficient 0.2 jumping by 0.7, curves on
    /// 101 equispaced points.
    pub fn new(n: usize, omega: f64, seed: u64) -> Self {
        Self {
            n,
            omega,
            rho: 0.2,
            c_post: 0.7,
            grid_points: 101,
            seed,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.rho.abs() >= 1.0 || (self.rho + self.c_post).abs() >= 1.0 {
            return Err(Error::InvalidConfig(
                "autoregressive coefficient must stay below 1 in both regimes".into(),
            ));
        }
        if !self.omega.is_finite() || self.omega < 0.0 {
            return Err(Error::InvalidConfig("omega must be nonnegative".into()));
        }
        if self.n < 5 {
            return Err(Error::InvalidConfig("need at least 5 curves".into()));
        }
        if self.grid_points < 2 {
            return Err(Error::InvalidConfig("need at least 2 grid points".into()));
        }
        Ok(())
    }
}

/// Dependence structure of the score vector autoregression.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AStructure {
    /// Diagonal coefficients U(-0.5, 0.5); innovations correlated across
    /// components with correlation 0.5^|i-j|.
    Diag,
    /// Band of width 3 with entries U(-0.3, 0.3); independent innovations.
    Band,
}

/// Basis-expansion series with a mean break of controlled signal-to-noise
/// ratio injected at a random interior time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VarScoreConfig {
    pub n: usize,
    pub a_structure: AStructure,
    pub snr: f64,
    /// Number of leading basis directions the break loads on.
    pub break_k: usize,
    pub k_basis: usize,
    /// Innovation correlation parameter for the diagonal structure.
    pub rho_corr: f64,
    /// Standard deviation of the white-noise term added per grid point.
    pub zeta_sd: f64,
    /// Gradual-change exponent; `None` gives the abrupt break.
    pub alpha: Option<f64>,
    pub grid_points: usize,
    pub seed: u64,
}

impl VarScoreConfig {
    pub fn new(n: usize, a_structure: AStructure, snr: f64, seed: u64) -> Self {
        Self {
            n,
            a_structure,
            snr,
            break_k: 1,
            k_basis: 21,
            rho_corr: 0.5,
            zeta_sd: 0.1,
            alpha: None,
            grid_points: 101,
            seed,
        }
    }

    pub fn gradual(mut self, alpha: f64) -> Self {
        self.alpha = Some(alpha);
        self
    }

    fn validate(&self) -> Result<()> {
        if !self.snr.is_finite() || self.snr < 0.0 {
            return Err(Error::InvalidConfig("snr must be nonnegative".into()));
        }
        if self.break_k == 0 || self.break_k > self.k_basis {
            return Err(Error::InvalidConfig(format!(
                "break_k must be in 1..={}",
                self.k_basis
            )));
        }
        if self.n < 8 {
            return Err(Error::InvalidConfig("need at least 8 curves".into()));
        }
        if let Some(alpha) = self.alpha {
            if !(0.0..0.5).contains(&alpha) || alpha == 0.0 {
                return Err(Error::InvalidConfig(
                    "gradual exponent must lie strictly between 0 and 1/2".into(),
                ));
            }
        }
        if !self.zeta_sd.is_finite() || self.zeta_sd < 0.0 {
            return Err(Error::InvalidConfig("zeta_sd must be nonnegative".into()));
        }
        Ok(())
    }
}

/// A generated series together with the planted truth.
#[derive(Debug, Clone)]
pub struct SimulatedSeries {
    pub fts: FunctionalTimeSeries,
    /// Time index of the last pre-break curve.
    pub true_tau: usize,
    /// Squared norm of the injected break function (0 when none).
    pub c_magnitude: f64,
    /// Injected break function on the grid, when one exists.
    pub break_curve: Option<Vec<f64>>,
    /// Multiplier of the break function per curve (0 before the break).
    pub injection_scale: Vec<f64>,
    /// Coefficient-matrix draws discarded for instability.
    pub redraws: usize,
}

fn brownian_path(rng: &mut ChaCha8Rng, p: usize, span: f64) -> Vec<f64> {
    let sd = (span / (p - 1) as f64).sqrt();
    let mut b = Vec::with_capacity(p);
    let mut acc = 0.0;
    b.push(0.0);
    for _ in 1..p {
        acc += sd * rng.sample::<f64, _>(StandardNormal);
        b.push(acc);
    }
    b
}

/// Latent pointwise AR(1) paths: n+1 curves (one presample), plus the
/// break time on the observed scale.
pub fn far1_latent_paths(cfg: &Far1Config) -> Result<(FunctionalTimeSeries, usize)> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    far1_latent_with(cfg, &mut rng)
}

fn far1_latent_with(
    cfg: &Far1Config,
    rng: &mut ChaCha8Rng,
) -> Result<(FunctionalTimeSeries, usize)> {
    cfg.validate()?;
    let p = cfg.grid_points;
    let grid = Grid::unit(p)?;
    let tau = cfg.n.div_ceil(2);
    // The autoregression acts on deviations from the baseline curve
    // 10u(1-u); the baseline itself persists as the process mean, keeping
    // the normalizing denominators of the observed ratios away from zero.
    let baseline: Vec<f64> = grid
        .points()
        .iter()
        .map(|&u| 10.0 * u * (1.0 - u))
        .collect();
    let mut paths = Vec::with_capacity(cfg.n + 1);
    let mut dev: Vec<f64> = brownian_path(rng, p, 1.0)
        .iter()
        .map(|&bu| cfg.omega * bu)
        .collect();
    paths.push(baseline.iter().zip(&dev).map(|(&m, &d)| m + d).collect());
    for t in 1..=cfg.n {
        let coef = if t <= tau {
            cfg.rho
        } else {
            cfg.rho + cfg.c_post
        };
        let b = brownian_path(rng, p, 1.0);
        for (d, &bu) in dev.iter_mut().zip(&b) {
            *d = coef * *d + cfg.omega * bu;
        }
        paths.push(baseline.iter().zip(&dev).map(|(&m, &d)| m + d).collect());
    }
    let fts = FunctionalTimeSeries::from_rows(grid, &paths)?;
    Ok((fts, tau))
}

/// Generates the normalized-change series: n curves, break at
/// `true_tau = ceil(n/2)` (the first affected curve is `true_tau + 1`).
pub fn gen_far1(cfg: &Far1Config) -> Result<SimulatedSeries> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    gen_far1_with(cfg, &mut rng)
}

fn gen_far1_with(cfg: &Far1Config, rng: &mut ChaCha8Rng) -> Result<SimulatedSeries> {
    let (latent, tau) = far1_latent_with(cfg, rng)?;
    let grid = latent.grid().clone();
    let rows: Vec<Vec<f64>> = (1..=cfg.n)
        .map(|t| {
            let prev = latent.curve(t - 1);
            let cur = latent.curve(t);
            prev.iter()
                .zip(&cur)
                .map(|(&a, &b)| (a - b).abs() / (a + 0.1).abs())
                .collect()
        })
        .collect();
    let fts = FunctionalTimeSeries::from_rows(grid, &rows)?;
    let mut injection_scale = vec![0.0; cfg.n];
    for (t, v) in injection_scale.iter_mut().enumerate() {
        if t + 1 > tau {
            *v = 1.0;
        }
    }
    Ok(SimulatedSeries {
        fts,
        true_tau: tau,
        c_magnitude: 0.0,
        break_curve: None,
        injection_scale,
        redraws: 0,
    })
}

/// Break magnitude for a target signal-to-noise ratio:
/// `c = snr * trace / (p_frac * (1 - p_frac))`.
pub fn snr_to_c(snr: f64, p_frac: f64, trace_lrc: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&p_frac) || p_frac == 0.0 {
        return Err(Error::InvalidConfig(
            "break fraction must lie strictly between 0 and 1".into(),
        ));
    }
    if !snr.is_finite() || snr < 0.0 || !trace_lrc.is_finite() || trace_lrc <= 0.0 {
        return Err(Error::InvalidConfig(
            "snr must be nonnegative and the trace positive".into(),
        ));
    }
    Ok(snr * trace_lrc / (p_frac * (1.0 - p_frac)))
}

/// Inverse of [`snr_to_c`].
pub fn snr_from_c(c: f64, p_frac: f64, trace_lrc: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&p_frac) || p_frac == 0.0 {
        return Err(Error::InvalidConfig(
            "break fraction must lie strictly between 0 and 1".into(),
        ));
    }
    if !trace_lrc.is_finite() || trace_lrc <= 0.0 {
        return Err(Error::InvalidConfig("trace must be positive".into()));
    }
    Ok(c * p_frac * (1.0 - p_frac) / trace_lrc)
}

/// First `count` elements of the Fourier system
/// {1, sqrt2 sin(2 pi w u), sqrt2 cos(2 pi w u)} evaluated on the grid.
pub(crate) fn fourier_system(grid: &Grid, count: usize) -> Vec<Vec<f64>> {
    use std::f64::consts::{PI, SQRT_2};
    (0..count)
        .map(|k| {
            grid.points()
                .iter()
                .map(|&u| {
                    if k == 0 {
                        1.0
                    } else {
                        let w = k.div_ceil(2) as f64;
                        if k % 2 == 1 {
                            SQRT_2 * (2.0 * PI * w * u).sin()
                        } else {
                            SQRT_2 * (2.0 * PI * w * u).cos()
                        }
                    }
                })
                .collect()
        })
        .collect()
}

fn spectral_radius(a: &DMatrix<f64>) -> f64 {
    a.complex_eigenvalues()
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max)
}

/// Abrupt mean break on a basis-expansion series.
pub fn gen_var_abrupt(cfg: &VarScoreConfig) -> Result<SimulatedSeries> {
    if cfg.alpha.is_some() {
        return Err(Error::InvalidConfig(
            "abrupt generator takes no gradual exponent".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    gen_var_with(cfg, &mut rng)
}

/// Gradual mean break: the injected function is additionally scaled by
/// `sqrt(t) * n^alpha / sqrt(n)` at each post-break time t.
pub fn gen_var_gradual(cfg: &VarScoreConfig) -> Result<SimulatedSeries> {
    if cfg.alpha.is_none() {
        return Err(Error::InvalidConfig(
            "gradual generator requires an exponent".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    gen_var_with(cfg, &mut rng)
}

fn gen_var_with(cfg: &VarScoreConfig, rng: &mut ChaCha8Rng) -> Result<SimulatedSeries> {
    cfg.validate()?;
    let n = cfg.n;
    let k = cfg.k_basis;
    let grid = Grid::unit(cfg.grid_points)?;
    let system = fourier_system(&grid, k);

    // Draw order is fixed: basis resampling, coefficient matrix (with
    // redraws), break time, score innovations, then white noise.
    let basis: Vec<&Vec<f64>> = (0..k).map(|_| &system[rng.gen_range(0..k)]).collect();

    let mut redraws = 0usize;
    let a = loop {
        let mut a = DMatrix::<f64>::zeros(k, k);
        match cfg.a_structure {
            AStructure::Diag => {
                for i in 0..k {
                    a[(i, i)] = rng.gen_range(-0.5..0.5);
                }
            }
            AStructure::Band => {
                for i in 0..k {
                    for j in 0..k {
                        if i.abs_diff(j) <= 3 {
                            a[(i, j)] = rng.gen_range(-0.3..0.3);
                        }
                    }
                }
            }
        }
        if spectral_radius(&a) < 1.0 {
            break a;
        }
        redraws += 1;
    };

    let tau = rng.gen_range(0.25 * n as f64..0.75 * n as f64).round() as usize;

    let innovation = |rng: &mut ChaCha8Rng| -> Vec<f64> {
        match cfg.a_structure {
            AStructure::Diag => {
                // Unit-variance sequence with correlation rho^|i-j| across
                // components: a stationary AR(1) walk over the index.
                let rho = cfg.rho_corr;
                let scale = (1.0 - rho * rho).sqrt();
                let mut xi = Vec::with_capacity(k);
                let mut prev: f64 = rng.sample(StandardNormal);
                xi.push(prev);
                for _ in 1..k {
                    prev = rho * prev + scale * rng.sample::<f64, _>(StandardNormal);
                    xi.push(prev);
                }
                xi
            }
            AStructure::Band => (0..k).map(|_| rng.sample(StandardNormal)).collect(),
        }
    };

    let mut scores = Vec::with_capacity(n);
    let mut beta = innovation(rng);
    scores.push(beta.clone());
    for _ in 1..n {
        let xi = innovation(rng);
        let mut next = vec![0.0f64; k];
        for i in 0..k {
            let mut acc = xi[i];
            for j in 0..k {
                let coef = a[(i, j)];
                if coef != 0.0 {
                    acc += coef * beta[j];
                }
            }
            next[i] = acc;
        }
        scores.push(next.clone());
        beta = next;
    }

    let p = grid.len();
    let mut eps: Vec<Vec<f64>> = Vec::with_capacity(n);
    for score in &scores {
        let mut row = vec![0.0f64; p];
        for (j, &b) in score.iter().enumerate() {
            for (r, &phi) in row.iter_mut().zip(basis[j].iter()) {
                *r += b * phi;
            }
        }
        for r in row.iter_mut() {
            *r += cfg.zeta_sd * rng.sample::<f64, _>(StandardNormal);
        }
        eps.push(row);
    }

    // Break magnitude from the target SNR and this replication's errors.
    // The noise-energy summary is the plain diagonal sum of the discretized
    // long-run covariance (one term per grid point, no quadrature weights),
    // so the implied break magnitude scales with the grid resolution.
    let eps_fts = FunctionalTimeSeries::from_rows(grid.clone(), &eps)?;
    let bandwidth = plugin_bandwidth(&eps_fts, Default::default())?;
    let lrc = long_run_covariance(&eps_fts, &KernelSpec::new(Default::default(), bandwidth)?)?;
    let p_frac = tau as f64 / n as f64;
    let c = snr_to_c(cfg.snr, p_frac, lrc.matrix.trace())?;

    // Break direction: scaled sum of the first break_k basis functions,
    // normalized to unit quadrature norm before applying sqrt(c).
    let mut delta: Vec<f64> = vec![0.0; p];
    for basis_fn in basis.iter().take(cfg.break_k) {
        for (d, &phi) in delta.iter_mut().zip(basis_fn.iter()) {
            *d += phi;
        }
    }
    let norm = crate::fda::norm(&delta, &grid)?;
    if norm <= 0.0 {
        return Err(Error::EstimationFailed(
            "degenerate break direction".into(),
        ));
    }
    let scale = c.sqrt() / norm;
    for d in delta.iter_mut() {
        *d *= scale;
    }

    let mut injection_scale = vec![0.0f64; n];
    for (idx, s) in injection_scale.iter_mut().enumerate() {
        let t = idx + 1;
        if t > tau {
            *s = match cfg.alpha {
                None => 1.0,
                Some(alpha) => (t as f64).sqrt() * (n as f64).powf(alpha) / (n as f64).sqrt(),
            };
        }
    }

    let mut x_rows = eps;
    for (idx, row) in x_rows.iter_mut().enumerate() {
        let s = injection_scale[idx];
        if s != 0.0 {
            for (v, &d) in row.iter_mut().zip(&delta) {
                *v += s * d;
            }
        }
    }
    let mut mean = vec![0.0f64; p];
    for row in &x_rows {
        for (m, &v) in mean.iter_mut().zip(row.iter()) {
            *m += v;
        }
    }
    for m in mean.iter_mut() {
        *m /= n as f64;
    }
    for row in x_rows.iter_mut() {
        for (v, &m) in row.iter_mut().zip(&mean) {
            *v += m;
        }
    }

    let fts = FunctionalTimeSeries::from_rows(grid, &x_rows)?;
    Ok(SimulatedSeries {
        fts,
        true_tau: tau,
        c_magnitude: c,
        break_curve: Some(delta),
        injection_scale,
        redraws,
    })
}

/// Which generator a Monte Carlo run draws from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DgpSpec {
    Far1(Far1Config),
    VarAbrupt(VarScoreConfig),
    VarGradual(VarScoreConfig),
}

impl DgpSpec {
    fn generate(&self, rng: &mut ChaCha8Rng) -> Result<SimulatedSeries> {
        match self {
            DgpSpec::Far1(cfg) => gen_far1_with(cfg, rng),
            DgpSpec::VarAbrupt(cfg) => {
                if cfg.alpha.is_some() {
                    return Err(Error::InvalidConfig(
                        "abrupt generator takes no gradual exponent".into(),
                    ));
                }
                gen_var_with(cfg, rng)
            }
            DgpSpec::VarGradual(cfg) => {
                if cfg.alpha.is_none() {
                    return Err(Error::InvalidConfig(
                        "gradual generator requires an exponent".into(),
                    ));
                }
                gen_var_with(cfg, rng)
            }
        }
    }
}

/// Aggregate detection accuracy over replications.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct McSummary {
    pub replications: usize,
    pub completed: usize,
    pub failures: usize,
    pub mean_tau_hat: f64,
    pub median_tau_hat: f64,
    pub mean_true_tau: f64,
    pub median_true_tau: f64,
    /// Replications with estimated stopping time at or past the truth.
    pub count_at_or_after: usize,
    pub total_redraws: usize,
}

fn median(sorted: &[f64]) -> f64 {
    let m = sorted.len();
    if m % 2 == 1 {
        sorted[m / 2]
    } else {
        0.5 * (sorted[m / 2 - 1] + sorted[m / 2])
    }
}

/// Runs `replications` independent generate-and-detect rounds. Each
/// replication uses its own counter-based substream of the master seed, so
/// results do not depend on thread scheduling; configs' own seeds are
/// ignored here.
pub fn run_monte_carlo(spec: &DgpSpec, replications: usize, master_seed: u64) -> Result<McSummary> {
    if replications == 0 {
        return Err(Error::InvalidConfig("need at least one replication".into()));
    }
    let outcomes: Vec<Result<(usize, usize, usize)>> = (0..replications)
        .into_par_iter()
        .map(|rep| {
            let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
            rng.set_stream(rep as u64 + 1);
            let sim = spec.generate(&mut rng)?;
            let detection = stopping_time(&sim.fts, KernelChoice::default())?;
            Ok((
                detection.breakpoint.stopping_time,
                sim.true_tau,
                sim.redraws,
            ))
        })
        .collect();

    let mut tau_hats = Vec::with_capacity(replications);
    let mut true_taus = Vec::with_capacity(replications);
    let mut failures = 0usize;
    let mut count_at_or_after = 0usize;
    let mut total_redraws = 0usize;
    for outcome in outcomes {
        match outcome {
            Ok((tau_hat, true_tau, redraws)) => {
                if tau_hat >= true_tau {
                    count_at_or_after += 1;
                }
                tau_hats.push(tau_hat as f64);
                true_taus.push(true_tau as f64);
                total_redraws += redraws;
            }
            Err(_) => failures += 1,
        }
    }
    if tau_hats.is_empty() {
        return Err(Error::EstimationFailed(
            "every replication failed".into(),
        ));
    }
    tau_hats.sort_by(|a, b| a.partial_cmp(b).unwrap());
    true_taus.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let completed = tau_hats.len();
    Ok(McSummary {
        replications,
        completed,
        failures,
        mean_tau_hat: tau_hats.iter().sum::<f64>() / completed as f64,
        median_tau_hat: median(&tau_hats),
        mean_true_tau: true_taus.iter().sum::<f64>() / completed as f64,
        median_true_tau: median(&true_taus),
        count_at_or_after,
        total_redraws,
    })
}

/// Cartesian experiment grid as read from a run configuration file.
#[derive(Debug, Clone, Deserialize)]
pub struct ExperimentGrid {
    pub dgp: String,
    pub n: Vec<usize>,
    #[serde(default)]
    pub omega: Vec<f64>,
    #[serde(default)]
    pub snr: Vec<f64>,
    #[serde(default)]
    pub alpha: Vec<f64>,
    #[serde(default)]
    pub a_structure: Vec<AStructure>,
    #[serde(default = "default_break_k")]
    pub break_k: usize,
    pub replications: usize,
    pub seed: u64,
}

fn default_break_k() -> usize {
    1
}

/// One expanded grid cell.
#[derive(Debug, Clone)]
pub struct ExperimentCase {
    pub label: String,
    pub spec: DgpSpec,
}

impl ExperimentGrid {
    /// Expands the grid into labeled cases, validating the combination of
    /// keys for the chosen generator.
    pub fn cases(&self) -> Result<Vec<ExperimentCase>> {
        let mut cases = Vec::new();
        match self.dgp.as_str() {
            "far1" => {
                if self.omega.is_empty() {
                    return Err(Error::InvalidConfig("far1 grid needs omega values".into()));
                }
                for &n in &self.n {
                    for &omega in &self.omega {
                        cases.push(ExperimentCase {
                            label: format!("far1 n={n} omega={omega}"),
                            spec: DgpSpec::Far1(Far1Config::new(n, omega, self.seed)),
                        });
                    }
                }
            }
            "var_abrupt" | "var_gradual" => {
                let gradual = self.dgp == "var_gradual";
                if self.snr.is_empty() {
                    return Err(Error::InvalidConfig("grid needs snr values".into()));
                }
                if self.a_structure.is_empty() {
                    return Err(Error::InvalidConfig(
                        "grid needs at least one coefficient structure".into(),
                    ));
                }
                if gradual && self.alpha.is_empty() {
                    return Err(Error::InvalidConfig(
                        "gradual grid needs alpha values".into(),
                    ));
                }
                let alphas: Vec<Option<f64>> = if gradual {
                    self.alpha.iter().copied().map(Some).collect()
                } else {
                    vec![None]
                };
                for &n in &self.n {
                    for &structure in &self.a_structure {
                        for &snr in &self.snr {
                            for &alpha in &alphas {
                                let mut cfg =
                                    VarScoreConfig::new(n, structure, snr, self.seed);
                                cfg.break_k = self.break_k;
                                cfg.alpha = alpha;
                                let tag = match structure {
                                    AStructure::Diag => "diag",
                                    AStructure::Band => "band",
                                };
                                let label = match alpha {
                                    Some(a) => format!(
                                        "{} {tag} n={n} snr={snr} alpha={a}",
                                        self.dgp
                                    ),
                                    None => format!("{} {tag} n={n} snr={snr}", self.dgp),
                                };
                                let spec = if gradual {
                                    DgpSpec::VarGradual(cfg)
                                } else {
                                    DgpSpec::VarAbrupt(cfg)
                                };
                                cases.push(ExperimentCase { label, spec });
                            }
                        }
                    }
                }
            }
            other => {
                return Err(Error::InvalidConfig(format!(
                    "unknown generator '{other}'"
                )));
            }
        }
        Ok(cases)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fda::inner_product;

    #[test]
    fn far1_shapes_and_break_time() {
        let cfg = Far1Config::new(400, 0.1, 9);
        let sim = gen_far1(&cfg).unwrap();
        assert_eq!(sim.true_tau, 200);
        assert_eq!(sim.fts.n(), 400);
        assert_eq!(sim.fts.p(), 101);
        assert_eq!(sim.injection_scale[199], 0.0);
        assert_eq!(sim.injection_scale[200], 1.0);
        assert!(sim.fts.values().iter().all(|v| v.is_finite()));
    }

    #[test]
    fn far1_noise_free_is_the_baseline_curve() {
        // With omega = 0 the deviation recursion stays at zero: every latent
        // path equals 10u(1-u) exactly and every relative-change curve is 0.
        let cfg = Far1Config::new(10, 0.0, 4);
        let grid = Grid::unit(101).unwrap();
        let baseline: Vec<f64> = grid.points().iter().map(|&u| 10.0 * u * (1.0 - u)).collect();
        let (latent, tau) = far1_latent_paths(&cfg).unwrap();
        assert_eq!(tau, 5);
        for t in 0..=10 {
            assert_eq!(latent.curve(t), baseline.as_slice(), "latent {t}");
        }
        let sim = gen_far1(&cfg).unwrap();
        assert!(sim.fts.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn far1_deviation_recursion_is_exact_across_coefficients() {
        // Two runs on the same seed share the same noise paths, and the
        // deviations from the baseline obey dev_t = coef_t dev_{t-1} + noise:
        // recover the noise from one run and rebuild the other. A mismatch in
        // the recursion shape or in the regime-switch index would break the
        // reconstruction from t = 1 onward.
        let grid = Grid::unit(101).unwrap();
        let baseline: Vec<f64> = grid.points().iter().map(|&u| 10.0 * u * (1.0 - u)).collect();
        let mut cfg_a = Far1Config::new(12, 0.7, 99);
        cfg_a.rho = 0.3;
        cfg_a.c_post = 0.4;
        let mut cfg_b = Far1Config::new(12, 0.7, 99);
        cfg_b.rho = 0.1;
        cfg_b.c_post = 0.6;
        let (lat_a, tau) = far1_latent_paths(&cfg_a).unwrap();
        let (lat_b, tau_b) = far1_latent_paths(&cfg_b).unwrap();
        assert_eq!(tau, 6);
        assert_eq!(tau, tau_b);
        let dev = |lat: &FunctionalTimeSeries, t: usize| -> Vec<f64> {
            lat.curve(t)
                .iter()
                .zip(&baseline)
                .map(|(&x, &m)| x - m)
                .collect()
        };
        let mut rebuilt = dev(&lat_b, 0);
        assert_eq!(rebuilt, dev(&lat_a, 0), "shared start deviation");
        for t in 1..=12usize {
            let (coef_a, coef_b) = if t <= tau {
                (cfg_a.rho, cfg_b.rho)
            } else {
                (cfg_a.rho + cfg_a.c_post, cfg_b.rho + cfg_b.c_post)
            };
            let prev_a = dev(&lat_a, t - 1);
            let cur_a = dev(&lat_a, t);
            for (i, r) in rebuilt.iter_mut().enumerate() {
                let noise = cur_a[i] - coef_a * prev_a[i];
                *r = coef_b * *r + noise;
            }
            let actual = dev(&lat_b, t);
            for (i, (&r, &a)) in rebuilt.iter().zip(&actual).enumerate() {
                assert!((r - a).abs() < 1e-9, "t={t} i={i}: {r} vs {a}");
            }
            rebuilt = actual;
        }
    }

    #[test]
    fn far1_second_regime_has_stronger_dependence() {
        let cfg = Far1Config::new(600, 0.5, 11);
        let (latent, tau) = far1_latent_paths(&cfg).unwrap();
        let mid = 50;
        let series: Vec<f64> = (0..=600).map(|t| latent.curve(t)[mid]).collect();
        let lag1 = |xs: &[f64]| {
            let m = xs.iter().sum::<f64>() / xs.len() as f64;
            let num: f64 = xs.windows(2).map(|w| (w[0] - m) * (w[1] - m)).sum();
            let den: f64 = xs.iter().map(|x| (x - m) * (x - m)).sum();
            num / den
        };
        let pre = lag1(&series[..=tau]);
        let post = lag1(&series[tau + 1..]);
        assert!(
            post > pre + 0.2,
            "pre {pre:.3} post {post:.3} not clearly separated"
        );
    }

    #[test]
    fn far1_rejects_explosive_config() {
        let mut cfg = Far1Config::new(50, 0.1, 1);
        cfg.c_post = 0.9;
        assert!(gen_far1(&cfg).is_err());
    }

    #[test]
    fn snr_arithmetic() {
        assert!((snr_to_c(0.1, 0.5, 1.0).unwrap() - 0.4).abs() < 1e-15);
        for (snr, p, tr) in [(0.1, 0.3, 2.7), (0.01, 0.61, 15.2), (1.5, 0.25, 0.4)] {
            let c = snr_to_c(snr, p, tr).unwrap();
            let back = snr_from_c(c, p, tr).unwrap();
            assert!((back - snr).abs() < 1e-12);
        }
        assert!(snr_to_c(0.1, 0.0, 1.0).is_err());
        assert!(snr_to_c(0.1, 1.0, 1.0).is_err());
    }

    #[test]
    fn fourier_system_is_orthonormal_under_quadrature() {
        let grid = Grid::unit(101).unwrap();
        let system = fourier_system(&grid, 21);
        for i in 0..21 {
            for j in i..21 {
                let ip = inner_product(&system[i], &system[j], &grid).unwrap();
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!(
                    (ip - expect).abs() < 1e-3,
                    "<phi_{i}, phi_{j}> = {ip}"
                );
            }
        }
    }

    #[test]
    fn abrupt_break_has_norm_c_and_interior_tau() {
        for seed in 0..10u64 {
            let cfg = VarScoreConfig::new(100, AStructure::Band, 0.1, seed);
            let sim = gen_var_abrupt(&cfg).unwrap();
            assert!(sim.true_tau >= 25 && sim.true_tau <= 75, "{}", sim.true_tau);
            let delta = sim.break_curve.as_ref().unwrap();
            let grid = sim.fts.grid();
            let norm_sq = inner_product(delta, delta, grid).unwrap();
            assert!(
                (norm_sq - sim.c_magnitude).abs() < 1e-8,
                "norm^2 {norm_sq} vs c {}",
                sim.c_magnitude
            );
        }
    }

    #[test]
    fn break_scales_with_snr_on_shared_seed() {
        let low = VarScoreConfig::new(100, AStructure::Diag, 0.01, 42);
        let high = VarScoreConfig::new(100, AStructure::Diag, 0.1, 42);
        let a = gen_var_abrupt(&low).unwrap();
        let b = gen_var_abrupt(&high).unwrap();
        assert_eq!(a.true_tau, b.true_tau);
        let ratio = b.c_magnitude / a.c_magnitude;
        assert!((ratio - 10.0).abs() < 1e-9, "c ratio {ratio}");
        let grid = a.fts.grid();
        let na = crate::fda::norm(a.break_curve.as_ref().unwrap(), grid).unwrap();
        let nb = crate::fda::norm(b.break_curve.as_ref().unwrap(), grid).unwrap();
        assert!((nb / na - 10f64.sqrt()).abs() < 1e-9);
    }

    #[test]
    fn zero_snr_injects_nothing() {
        let cfg = VarScoreConfig::new(60, AStructure::Band, 0.0, 3);
        let sim = gen_var_abrupt(&cfg).unwrap();
        assert_eq!(sim.c_magnitude, 0.0);
        let delta = sim.break_curve.unwrap();
        assert!(delta.iter().all(|&d| d == 0.0));
    }

    #[test]
    fn diag_structure_never_redraws() {
        for seed in 0..20u64 {
            let cfg = VarScoreConfig::new(40, AStructure::Diag, 0.1, seed);
            let sim = gen_var_abrupt(&cfg).unwrap();
            assert_eq!(sim.redraws, 0);
        }
    }

    #[test]
    fn gradual_injection_is_monotone_in_alpha_and_matches_formula() {
        let base = VarScoreConfig::new(100, AStructure::Band, 0.1, 17);
        let lo = gen_var_gradual(&base.gradual(0.1)).unwrap();
        let hi = gen_var_gradual(&base.gradual(0.45)).unwrap();
        assert_eq!(lo.true_tau, hi.true_tau);
        let tau = lo.true_tau;
        for t in (tau + 1)..=100 {
            let slo = lo.injection_scale[t - 1];
            let shi = hi.injection_scale[t - 1];
            assert!(shi > slo, "t={t}: {shi} vs {slo}");
            let expect = (t as f64).sqrt() * 100f64.powf(0.1) / 10.0;
            assert!((slo - expect).abs() < 1e-12);
        }
        assert!(lo.injection_scale[..tau].iter().all(|&s| s == 0.0));
    }

    #[test]
    fn gradual_requires_alpha_and_abrupt_rejects_it() {
        let cfg = VarScoreConfig::new(60, AStructure::Band, 0.1, 1);
        assert!(gen_var_gradual(&cfg).is_err());
        assert!(gen_var_abrupt(&cfg.gradual(0.3)).is_err());
        assert!(gen_var_gradual(&cfg.gradual(0.6)).is_err());
    }

    #[test]
    fn monte_carlo_is_deterministic() {
        let spec = DgpSpec::Far1(Far1Config::new(24, 0.5, 0));
        let a = run_monte_carlo(&spec, 4, 99).unwrap();
        let b = run_monte_carlo(&spec, 4, 99).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.completed + a.failures, 4);
        assert!(a.count_at_or_after <= a.completed);
    }

    #[test]
    fn experiment_grid_expands_the_product() {
        let grid = ExperimentGrid {
            dgp: "var_gradual".into(),
            n: vec![50, 100],
            omega: vec![],
            snr: vec![0.01, 0.1],
            alpha: vec![0.05, 0.45],
            a_structure: vec![AStructure::Band],
            break_k: 1,
            replications: 10,
            seed: 5,
        };
        let cases = grid.cases().unwrap();
        assert_eq!(cases.len(), 8);
        assert!(cases.iter().all(|c| matches!(c.spec, DgpSpec::VarGradual(_))));

        let bad = ExperimentGrid {
            dgp: "far1".into(),
            n: vec![50],
            omega: vec![],
            snr: vec![],
            alpha: vec![],
            a_structure: vec![],
            break_k: 1,
            replications: 1,
            seed: 0,
        };
        assert!(bad.cases().is_err());
    }

    #[test]
    fn grid_parses_from_toml() {
        let text = r#"
            dgp = "far1"
            n = [101, 201]
            omega = [0.1, 0.5, 0.9]
            replications = 1000
            seed = 20260817
        "#;
        let grid: ExperimentGrid = toml::from_str(text).unwrap();
        assert_eq!(grid.cases().unwrap().len(), 6);
    }
}
