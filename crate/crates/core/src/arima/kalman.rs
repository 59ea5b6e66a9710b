//! Exact Gaussian likelihood of an ARMA model through the state-space
//! innovations recursion, with the innovation variance concentrated out.

const LN_2PI: f64 = 1.8378770664093453;

/// Variance floor guarding degenerate (perfectly fit) series.
pub const SIGMA2_FLOOR: f64 = 1e-12;

/// Filter output: maximized log-likelihood, concentrated innovation
/// variance, and optionally the one-step prediction errors.
#[derive(Debug, Clone)]
pub struct FilterResult {
    pub loglik: f64,
    pub sigma2: f64,
    pub innovations: Vec<f64>,
}

/// Workspace for repeated likelihood evaluations of ARMA models with state
/// dimension `m = max(p, q+1)`; reused across optimizer steps to avoid
/// allocation in the hot loop.
pub struct ArmaFilter {
    m: usize,
    phi: Vec<f64>,
    r: Vec<f64>,
    p: Vec<f64>,
    tp: Vec<f64>,
    x: Vec<f64>,
    k: Vec<f64>,
    // Dense solve buffers for the stationary covariance system.
    sys: Vec<f64>,
    rhs: Vec<f64>,
    piv: Vec<usize>,
}

impl ArmaFilter {
    pub fn new(max_p: usize, max_q: usize) -> Self {
        let m = max_p.max(max_q + 1).max(1);
        let dim = m * (m + 1) / 2;
        Self {
            m,
            phi: vec![0.0; m],
            r: vec![0.0; m],
            p: vec![0.0; m * m],
            tp: vec![0.0; m * m],
            x: vec![0.0; m],
            k: vec![0.0; m],
            sys: vec![0.0; dim * dim],
            rhs: vec![0.0; dim],
            piv: vec![0; dim],
        }
    }

    /// Loads AR/MA coefficients, padding the state dimension.
    fn load(&mut self, ar: &[f64], ma: &[f64]) {
        let m = ar.len().max(ma.len() + 1).max(1);
        self.m = m;
        self.phi.clear();
        self.phi.resize(m, 0.0);
        self.phi[..ar.len()].copy_from_slice(ar);
        self.r.clear();
        self.r.resize(m, 0.0);
        self.r[0] = 1.0;
        self.r[1..=ma.len()].copy_from_slice(ma);
        if self.p.len() < m * m {
            self.p.resize(m * m, 0.0);
        }
        let dim = m * (m + 1) / 2;
        if self.rhs.len() < dim {
            self.sys.resize(dim * dim, 0.0);
            self.rhs.resize(dim, 0.0);
            self.piv.resize(dim, 0);
        }
    }

    /// Stationary state covariance solving `P = T P T' + R R'` in packed
    /// symmetric form. `None` when the system is numerically singular
    /// (roots at or inside the unit circle).
    fn stationary_cov(&mut self) -> Option<()> {
        let m = self.m;
        if m == 1 {
            let denom = 1.0 - self.phi[0] * self.phi[0];
            if denom.is_nan() || denom <= 1e-12 {
                return None;
            }
            self.p[0] = self.r[0] * self.r[0] / denom;
            return self.p[0].is_finite().then_some(());
        }
        let dim = m * (m + 1) / 2;
        let idx = |i: usize, j: usize| -> usize {
            // packed upper triangle, i <= j
            let (i, j) = if i <= j { (i, j) } else { (j, i) };
            i * m - i * (i + 1) / 2 + j
        };
        let sys = &mut self.sys[..dim * dim];
        sys.fill(0.0);
        let rhs = &mut self.rhs[..dim];
        // Equation for P[i][j]: P[i][j] - (T P T')[i][j] = (RR')[i][j].
        // T has phi in column 0 and a superdiagonal of ones, so
        // (T P T')[i][j] = phi_i phi_j P00 + phi_i P[0][j+1] + phi_j P[i+1][0]
        //                  + P[i+1][j+1] (terms present when in range).
        for i in 0..m {
            for j in i..m {
                let e = idx(i, j);
                sys[e * dim + e] += 1.0;
                sys[e * dim + idx(0, 0)] -= self.phi[i] * self.phi[j];
                if j + 1 < m {
                    sys[e * dim + idx(0, j + 1)] -= self.phi[i];
                }
                if i + 1 < m {
                    sys[e * dim + idx(0, i + 1)] -= self.phi[j];
                }
                if i + 1 < m && j + 1 < m {
                    sys[e * dim + idx(i + 1, j + 1)] -= 1.0;
                }
                rhs[e] = self.r[i] * self.r[j];
            }
        }
        solve_dense(sys, rhs, &mut self.piv[..dim], dim)?;
        for i in 0..m {
            for j in 0..m {
                let v = rhs[idx(i, j)];
                if !v.is_finite() {
                    return None;
                }
                self.p[i * m + j] = v;
            }
        }
        Some(())
    }

    /// Concentrated log-likelihood of centered observations
    /// `z_t - mean`. Returns `None` for numerically invalid parameters.
    pub fn loglik(&mut self, ar: &[f64], ma: &[f64], z: &[f64], mean: f64) -> Option<f64> {
        let mut ssq = 0.0;
        let mut sum_ln_f = 0.0;
        self.pass(ar, ma, z, mean, |v, f| {
            ssq += v * v / f;
            sum_ln_f += f.ln();
        })?;
        Self::concentrate(z.len(), ssq, sum_ln_f).map(|(ll, _)| ll)
    }

    /// As [`loglik`](Self::loglik) but also collects the one-step
    /// prediction errors.
    pub fn filter(
        &mut self,
        ar: &[f64],
        ma: &[f64],
        z: &[f64],
        mean: f64,
    ) -> Option<FilterResult> {
        let mut innov = Vec::with_capacity(z.len());
        let mut ssq = 0.0;
        let mut sum_ln_f = 0.0;
        self.pass(ar, ma, z, mean, |v, f| {
            innov.push(v);
            ssq += v * v / f;
            sum_ln_f += f.ln();
        })?;
        let (loglik, sigma2) = Self::concentrate(z.len(), ssq, sum_ln_f)?;
        Some(FilterResult {
            loglik,
            sigma2,
            innovations: innov,
        })
    }

    fn concentrate(n: usize, ssq: f64, sum_ln_f: f64) -> Option<(f64, f64)> {
        let n = n as f64;
        let sigma2 = (ssq / n).max(SIGMA2_FLOOR);
        let loglik = -0.5 * n * (LN_2PI + 1.0 + sigma2.ln()) - 0.5 * sum_ln_f;
        loglik.is_finite().then_some((loglik, sigma2))
    }

    /// One full filtering pass, invoking `on_step(v_t, F_t)` per
    /// observation.
    fn pass(
        &mut self,
        ar: &[f64],
        ma: &[f64],
        z: &[f64],
        mean: f64,
        mut on_step: impl FnMut(f64, f64),
    ) -> Option<()> {
        if z.is_empty() {
            return None;
        }
        self.load(ar, ma);
        self.stationary_cov()?;
        let m = self.m;
        self.x.clear();
        self.x.resize(m, 0.0);
        if self.tp.len() < m * m {
            self.tp.resize(m * m, 0.0);
        }
        if self.k.len() < m {
            self.k.resize(m, 0.0);
        }

        for &obs in z {
            let y = obs - mean;
            let f = self.p[0];
            if f <= 1e-8 || !f.is_finite() {
                return None;
            }
            let v = y - self.x[0];
            on_step(v, f);

            // tp = T * P, exploiting T's companion structure.
            for i in 0..m {
                for j in 0..m {
                    let mut acc = self.phi[i] * self.p[j];
                    if i + 1 < m {
                        acc += self.p[(i + 1) * m + j];
                    }
                    self.tp[i * m + j] = acc;
                }
            }
            // Gain and state update: x <- T x + (T P Z')/F * v.
            let x0 = self.x[0];
            for i in 0..m {
                self.k[i] = self.tp[i * m] / f;
            }
            for i in 0..m {
                let mut acc = self.phi[i] * x0 + self.k[i] * v;
                if i + 1 < m {
                    acc += self.x[i + 1];
                }
                self.k[i] *= f; // stash T P Z' for the P update
                self.x[i] = acc;
            }
            // P <- T P T' + R R' - (T P Z')(T P Z')'/F, symmetrized.
            for i in 0..m {
                for j in i..m {
                    let mut acc = self.phi[j] * self.tp[i * m];
                    if j + 1 < m {
                        acc += self.tp[i * m + j + 1];
                    }
                    acc += self.r[i] * self.r[j] - self.k[i] * self.k[j] / f;
                    self.p[i * m + j] = acc;
                    self.p[j * m + i] = acc;
                }
            }
        }
        Some(())
    }
}

/// In-place Gaussian elimination with partial pivoting; solution lands in
/// `rhs`. `None` on a (near-)singular system.
fn solve_dense(a: &mut [f64], rhs: &mut [f64], piv: &mut [usize], dim: usize) -> Option<()> {
    for (i, p) in piv.iter_mut().enumerate().take(dim) {
        *p = i;
    }
    for col in 0..dim {
        let mut best = col;
        let mut best_val = a[col * dim + col].abs();
        for row in col + 1..dim {
            let v = a[row * dim + col].abs();
            if v > best_val {
                best = row;
                best_val = v;
            }
        }
        if best_val.is_nan() || best_val <= 1e-12 {
            return None;
        }
        if best != col {
            for j in 0..dim {
                a.swap(col * dim + j, best * dim + j);
            }
            rhs.swap(col, best);
        }
        let pivot = a[col * dim + col];
        for row in col + 1..dim {
            let factor = a[row * dim + col] / pivot;
            if factor == 0.0 {
                continue;
            }
            for j in col..dim {
                a[row * dim + j] -= factor * a[col * dim + j];
            }
            rhs[row] -= factor * rhs[col];
        }
    }
    for col in (0..dim).rev() {
        let mut acc = rhs[col];
        for j in col + 1..dim {
            acc -= a[col * dim + j] * rhs[j];
        }
        rhs[col] = acc / a[col * dim + col];
    }
    Some(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};
    use rand_distr::StandardNormal;

    /// ARMA autocovariances through the MA(infinity) expansion: an
    /// independent route to the exact Gaussian likelihood.
    fn arma_autocov(ar: &[f64], ma: &[f64], sigma2: f64, max_lag: usize) -> Vec<f64> {
        let horizon = 2000 + max_lag;
        let mut psi = vec![0.0; horizon];
        psi[0] = 1.0;
        for j in 1..horizon {
            let mut acc = if j <= ma.len() { ma[j - 1] } else { 0.0 };
            for (i, &phi) in ar.iter().enumerate() {
                if j > i {
                    acc += phi * psi[j - 1 - i];
                }
            }
            psi[j] = acc;
        }
        (0..=max_lag)
            .map(|k| {
                let mut acc = 0.0;
                for j in 0..horizon - k {
                    acc += psi[j] * psi[j + k];
                }
                sigma2 * acc
            })
            .collect()
    }

    /// Exact multivariate normal log-density with Toeplitz ARMA covariance,
    /// by Cholesky factorization.
    fn mvn_loglik(z: &[f64], gamma: &[f64]) -> f64 {
        let n = z.len();
        let mut l = vec![0.0f64; n * n];
        for i in 0..n {
            for j in 0..=i {
                let mut acc = gamma[i - j];
                for k in 0..j {
                    acc -= l[i * n + k] * l[j * n + k];
                }
                if i == j {
                    l[i * n + i] = acc.sqrt();
                } else {
                    l[i * n + j] = acc / l[j * n + j];
                }
            }
        }
        // Solve L y = z, accumulate quadratic form and log-determinant.
        let mut y = vec![0.0f64; n];
        for i in 0..n {
            let mut acc = z[i];
            for k in 0..i {
                acc -= l[i * n + k] * y[k];
            }
            y[i] = acc / l[i * n + i];
        }
        let quad: f64 = y.iter().map(|v| v * v).sum();
        let logdet: f64 = (0..n).map(|i| l[i * n + i].ln()).sum::<f64>() * 2.0;
        -0.5 * (n as f64 * super::LN_2PI + logdet + quad)
    }

    /// Profile the filter's concentrated likelihood back to a given sigma2.
    fn unconcentrated_loglik(
        filter: &mut ArmaFilter,
        ar: &[f64],
        ma: &[f64],
        z: &[f64],
        sigma2: f64,
    ) -> f64 {
        // loglik(sigma2) = -n/2 (ln 2pi sigma2) - 1/2 sum ln F_t
        //                  - ssq/(2 sigma2)
        let mut ssq = 0.0;
        let mut sum_ln_f = 0.0;
        filter
            .pass(ar, ma, z, 0.0, |v, f| {
                ssq += v * v / f;
                sum_ln_f += f.ln();
            })
            .unwrap();
        let n = z.len() as f64;
        -0.5 * n * (super::LN_2PI + sigma2.ln()) - 0.5 * sum_ln_f - 0.5 * ssq / sigma2
    }

    #[test]
    fn likelihood_matches_exact_gaussian_for_ar1() {
        let mut rng = StdRng::seed_from_u64(11);
        let z: Vec<f64> = (0..20).map(|_| rng.sample(StandardNormal)).collect();
        let ar = [0.6];
        let gamma = arma_autocov(&ar, &[], 1.0, 19);
        let want = mvn_loglik(&z, &gamma);
        let mut filter = ArmaFilter::new(1, 0);
        let got = unconcentrated_loglik(&mut filter, &ar, &[], &z, 1.0);
        assert!((got - want).abs() < 1e-8, "{got} vs {want}");
    }

    #[test]
    fn likelihood_matches_exact_gaussian_for_arma11() {
        let mut rng = StdRng::seed_from_u64(23);
        let z: Vec<f64> = (0..25).map(|_| rng.sample(StandardNormal)).collect();
        let ar = [0.5];
        let ma = [-0.4];
        let gamma = arma_autocov(&ar, &ma, 1.0, 24);
        let want = mvn_loglik(&z, &gamma);
        let mut filter = ArmaFilter::new(1, 1);
        let got = unconcentrated_loglik(&mut filter, &ar, &ma, &z, 1.0);
        assert!((got - want).abs() < 1e-8, "{got} vs {want}");
    }

    #[test]
    fn likelihood_matches_exact_gaussian_for_arma22() {
        let mut rng = StdRng::seed_from_u64(37);
        let z: Vec<f64> = (0..30).map(|_| rng.sample(StandardNormal)).collect();
        let ar = [0.4, -0.3];
        let ma = [0.25, 0.1];
        let gamma = arma_autocov(&ar, &ma, 1.0, 29);
        let want = mvn_loglik(&z, &gamma);
        let mut filter = ArmaFilter::new(2, 2);
        let got = unconcentrated_loglik(&mut filter, &ar, &ma, &z, 1.0);
        assert!((got - want).abs() < 1e-8, "{got} vs {want}");
    }

    #[test]
    fn innovations_are_one_step_errors_for_pure_ar() {
        // For AR(1) after the first step, v_t = z_t - phi z_{t-1} exactly.
        let z = [1.0, 0.5, -0.2, 0.8, 0.1];
        let ar = [0.7];
        let mut filter = ArmaFilter::new(1, 0);
        let res = filter.filter(&ar, &[], &z, 0.0).unwrap();
        for t in 1..z.len() {
            assert!((res.innovations[t] - (z[t] - 0.7 * z[t - 1])).abs() < 1e-12);
        }
        assert!((res.innovations[0] - z[0]).abs() < 1e-12);
    }

    #[test]
    fn near_unit_root_is_rejected_cleanly() {
        let z = [1.0, 2.0, 3.0, 4.0];
        let mut filter = ArmaFilter::new(1, 0);
        assert!(filter.loglik(&[1.0], &[], &z, 0.0).is_none());
    }

    #[test]
    fn perfect_fit_hits_variance_floor() {
        let z = [0.0; 12];
        let mut filter = ArmaFilter::new(1, 0);
        let res = filter.filter(&[0.5], &[], &z, 0.0).unwrap();
        assert_eq!(res.sigma2, SIGMA2_FLOOR);
    }
}
