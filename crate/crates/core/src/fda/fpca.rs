//! Functional principal component analysis of a covariance surface.
//!
//! The integral operator with kernel `C` is discretized as
//! `W^{1/2} C W^{1/2}` (W = diagonal quadrature weights), eigendecomposed,
//! and eigenvectors are mapped back through `W^{-1/2}` so eigenfunctions are
//! orthonormal in the quadrature L2 inner product.

use nalgebra::{DMatrix, DVector};

use super::{mean_function, CovarianceSurface, FunctionalTimeSeries, SurfaceKind};
use crate::{Error, Result};

/// Full eigendecomposition of a weighted covariance surface: all
/// eigenvalues sorted descending (negatives clamped to zero) and the
/// matching L2-orthonormal eigenfunctions as columns.
#[derive(Debug, Clone)]
pub struct EigenPairs {
    pub eigenvalues: Vec<f64>,
    /// `p x p`; column k evaluates eigenfunction k on the grid.
    pub eigenfunctions: DMatrix<f64>,
    /// How many negative numerical eigenvalues were clamped to zero.
    pub clamped: usize,
}

/// Fitted principal component model for a functional time series.
#[derive(Debug, Clone)]
pub struct FpcaModel {
    /// All eigenvalues of the surface, descending, negatives clamped.
    pub eigenvalues: Vec<f64>,
    /// `p x k` retained eigenfunctions (columns), L2-orthonormal.
    pub eigenfunctions: DMatrix<f64>,
    /// `n x k` scores: projections of centered curves on eigenfunctions.
    pub scores: DMatrix<f64>,
    /// Pointwise mean curve.
    pub mean: Vec<f64>,
    /// `n x p` residual curves after removing mean and retained components.
    pub residuals: DMatrix<f64>,
    /// Which surface the basis came from.
    pub surface: SurfaceKind,
    /// Count of negative numerical eigenvalues clamped to zero.
    pub clamped: usize,
}

impl FpcaModel {
    /// Number of retained components.
    pub fn k(&self) -> usize {
        self.eigenfunctions.ncols()
    }

    /// Score series of component `k` in time order.
    pub fn score_series(&self, k: usize) -> Vec<f64> {
        self.scores.column(k).iter().copied().collect()
    }

    /// Eigenfunction `k` on the grid.
    pub fn eigenfunction(&self, k: usize) -> Vec<f64> {
        self.eigenfunctions.column(k).iter().copied().collect()
    }
}

/// Eigendecomposition of the quadrature-weighted surface. Tolerates mild
/// asymmetry (floating error); rejects surfaces asymmetric beyond 1e-8
/// relative to their largest entry.
pub fn weighted_eigen(surface: &CovarianceSurface) -> Result<EigenPairs> {
    let asym = surface.max_asymmetry();
    if asym > 1e-8 {
        return Err(Error::NotSymmetric { max_asym: asym });
    }
    let p = surface.grid.len();
    if surface.matrix.nrows() != p || surface.matrix.ncols() != p {
        return Err(Error::DimensionMismatch(
            "surface matrix must be square and match its grid".into(),
        ));
    }
    let w = surface.grid.weights();
    let sqrt_w: Vec<f64> = w.iter().map(|&x| x.sqrt()).collect();

    let mut s = surface.matrix.clone();
    // Symmetrize residual floating error, then weight.
    for j in 0..p {
        for i in 0..j {
            let v = 0.5 * (s[(i, j)] + s[(j, i)]);
            s[(i, j)] = v;
            s[(j, i)] = v;
        }
    }
    for j in 0..p {
        for i in 0..p {
            s[(i, j)] *= sqrt_w[i] * sqrt_w[j];
        }
    }

    let eig = s.symmetric_eigen();
    let mut order: Vec<usize> = (0..p).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .partial_cmp(&eig.eigenvalues[a])
            .expect("eigenvalues are finite")
    });

    let mut eigenvalues = Vec::with_capacity(p);
    let mut clamped = 0;
    let mut funcs = DMatrix::<f64>::zeros(p, p);
    for (dst, &src) in order.iter().enumerate() {
        let lambda = eig.eigenvalues[src];
        if lambda < 0.0 {
            clamped += 1;
            eigenvalues.push(0.0);
        } else {
            eigenvalues.push(lambda);
        }
        // Map back to L2-orthonormal coordinates and fix the sign so the
        // largest-magnitude value is positive (first index on ties).
        let mut col = DVector::from_fn(p, |i, _| eig.eigenvectors[(i, src)] / sqrt_w[i]);
        let mut lead = 0;
        for i in 1..p {
            if col[i].abs() > col[lead].abs() {
                lead = i;
            }
        }
        if col[lead] < 0.0 {
            col.neg_mut();
        }
        funcs.set_column(dst, &col);
    }

    Ok(EigenPairs {
        eigenvalues,
        eigenfunctions: funcs,
        clamped,
    })
}

/// Principal component model with `k` retained components from the given
/// surface. Scores project the centered curves; residuals are what the
/// retained components leave unexplained.
pub fn fpca(
    fts: &FunctionalTimeSeries,
    surface: &CovarianceSurface,
    k: usize,
) -> Result<FpcaModel> {
    let pairs = weighted_eigen(surface)?;
    fpca_from_eigen(fts, surface.kind, pairs, k)
}

/// Assembles the model once an eigendecomposition is available.
pub(crate) fn fpca_from_eigen(
    fts: &FunctionalTimeSeries,
    surface: SurfaceKind,
    pairs: EigenPairs,
    k: usize,
) -> Result<FpcaModel> {
    let p = fts.p();
    if pairs.eigenfunctions.nrows() != p {
        return Err(Error::DimensionMismatch(
            "eigenfunctions must match the series grid".into(),
        ));
    }
    if k == 0 || k > p {
        return Err(Error::InvalidConfig(format!(
            "component count {k} outside 1..={p}"
        )));
    }
    let n = fts.n();
    let mean = mean_function(fts);
    let grid = fts.grid();
    let w = grid.weights();

    let funcs = pairs.eigenfunctions.columns(0, k).into_owned();
    let mut xc = fts.values().clone();
    for j in 0..p {
        let mj = mean[j];
        for i in 0..n {
            xc[(i, j)] -= mj;
        }
    }
    // scores[t][c] = sum_j w_j Xc[t][j] funcs[j][c]
    let mut weighted = xc.clone();
    for j in 0..p {
        let wj = w[j];
        for i in 0..n {
            weighted[(i, j)] *= wj;
        }
    }
    let scores = &weighted * &funcs;
    let residuals = &xc - &scores * funcs.transpose();

    Ok(FpcaModel {
        eigenvalues: pairs.eigenvalues,
        eigenfunctions: funcs,
        scores,
        mean,
        residuals,
        surface,
        clamped: pairs.clamped,
    })
}

/// Eigenvalue-ratio choice of the component count: minimizes
/// `lambda_{k+1}/lambda_k` over ratios above the vanishing threshold
/// `1/ln(max(lambda_1, n))`, capping candidates at eigenvalues no smaller
/// than the average; ties take the smallest k, and the result is >= 1.
pub fn select_k(eigenvalues: &[f64], n: usize) -> Result<usize> {
    if eigenvalues.len() < 2 {
        return Err(Error::DimensionMismatch(
            "need at least 2 eigenvalues to pick a component count".into(),
        ));
    }
    if n < 2 {
        return Err(Error::SeriesTooShort { len: n, min: 2 });
    }
    if eigenvalues
        .windows(2)
        .any(|w| w[1] > w[0] || w[0] < 0.0 || !w[0].is_finite())
    {
        return Err(Error::InvalidConfig(
            "eigenvalues must be finite, nonnegative, descending".into(),
        ));
    }
    let lambda1 = eigenvalues[0];
    if lambda1 <= 0.0 {
        return Ok(1);
    }
    let total: f64 = eigenvalues.iter().sum();
    let floor = total / n as f64;
    let mut k_max = eigenvalues.iter().take_while(|&&l| l >= floor).count();
    k_max = k_max.clamp(1, eigenvalues.len() - 1);

    let threshold = 1.0 / (lambda1.max(n as f64)).ln();
    let mut best_k = 1;
    let mut best = f64::INFINITY;
    for k in 1..=k_max {
        let lk = eigenvalues[k - 1];
        let crit = if lk / lambda1 >= threshold {
            eigenvalues[k] / lk
        } else {
            1.0
        };
        if crit < best {
            best = crit;
            best_k = k;
        }
    }
    Ok(best_k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fda::{autocovariance_surface, inner_product, Grid};
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};
    use rand_distr::StandardNormal;

    /// Independent cyclic-Jacobi eigensolver used as an oracle.
    fn jacobi_eigen(a: &DMatrix<f64>) -> Vec<f64> {
        let p = a.nrows();
        let mut m = a.clone();
        for _sweep in 0..100 {
            let mut off = 0.0f64;
            for q in 0..p {
                for r in (q + 1)..p {
                    off += m[(q, r)] * m[(q, r)];
                }
            }
            if off < 1e-26 {
                break;
            }
            for q in 0..p {
                for r in (q + 1)..p {
                    if m[(q, r)].abs() < 1e-300 {
                        continue;
                    }
                    let theta = (m[(r, r)] - m[(q, q)]) / (2.0 * m[(q, r)]);
                    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                    let c = 1.0 / (t * t + 1.0).sqrt();
                    let s = t * c;
                    for i in 0..p {
                        let aiq = m[(i, q)];
                        let air = m[(i, r)];
                        m[(i, q)] = c * aiq - s * air;
                        m[(i, r)] = s * aiq + c * air;
                    }
                    for i in 0..p {
                        let aqi = m[(q, i)];
                        let ari = m[(r, i)];
                        m[(q, i)] = c * aqi - s * ari;
                        m[(r, i)] = s * aqi + c * ari;
                    }
                }
            }
        }
        let mut evs: Vec<f64> = (0..p).map(|i| m[(i, i)]).collect();
        evs.sort_by(|a, b| b.partial_cmp(a).unwrap());
        evs
    }

    fn rank1_series(n: usize, p: usize, scores: impl Fn(usize) -> f64) -> FunctionalTimeSeries {
        use std::f64::consts::PI;
        let grid = Grid::unit(p).unwrap();
        let func: Vec<f64> = grid
            .points()
            .iter()
            .map(|&u| 2.0f64.sqrt() * (2.0 * PI * u).sin())
            .collect();
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|t| func.iter().map(|&f| scores(t) * f).collect())
            .collect();
        FunctionalTimeSeries::from_rows(grid, &rows).unwrap()
    }

    #[test]
    fn eigenvalues_match_jacobi_oracle_on_toy_surface() {
        let mut rng = StdRng::seed_from_u64(42);
        let grid = Grid::unit(3).unwrap();
        let rows: Vec<Vec<f64>> = (0..4)
            .map(|_| (0..3).map(|_| rng.sample(StandardNormal)).collect())
            .collect();
        let fts = FunctionalTimeSeries::from_rows(grid.clone(), &rows).unwrap();
        let surf = autocovariance_surface(&fts, 0).unwrap();

        let pairs = weighted_eigen(&surf).unwrap();

        // Oracle: weight the surface independently and run Jacobi.
        let w = grid.weights();
        let p = grid.len();
        let mut s = surf.matrix.clone();
        for j in 0..p {
            for i in 0..p {
                s[(i, j)] *= w[i].sqrt() * w[j].sqrt();
            }
        }
        let oracle = jacobi_eigen(&s);
        for (got, want) in pairs.eigenvalues.iter().zip(oracle.iter()) {
            assert!((got - want.max(0.0)).abs() < 1e-10, "{got} vs {want}");
        }
    }

    #[test]
    fn rank1_recovers_the_single_direction() {
        use std::f64::consts::PI;
        let mut rng = StdRng::seed_from_u64(5);
        let n = 40;
        let p = 51;
        let grid = Grid::unit(p).unwrap();
        let func: Vec<f64> = grid
            .points()
            .iter()
            .map(|&u| 2.0f64.sqrt() * (2.0 * PI * u).sin())
            .collect();
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|_| {
                let b: f64 = rng.sample::<f64, _>(StandardNormal) * 3.0;
                func.iter().map(|&f| b * f).collect()
            })
            .collect();
        let fts = FunctionalTimeSeries::from_rows(grid.clone(), &rows).unwrap();
        let surf = autocovariance_surface(&fts, 0).unwrap();
        let model = fpca(&fts, &surf, 1).unwrap();

        assert!(model.eigenvalues[1] / model.eigenvalues[0] < 1e-8);
        let got = model.eigenfunction(0);
        let same: f64 = got
            .iter()
            .zip(func.iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        let flipped: f64 = got
            .iter()
            .zip(func.iter())
            .map(|(a, b)| (a + b).abs())
            .fold(0.0, f64::max);
        assert!(same.min(flipped) < 1e-6, "sup dev {}", same.min(flipped));
    }

    #[test]
    fn eigenfunctions_are_orthonormal_and_reconstruct() {
        let mut rng = StdRng::seed_from_u64(9);
        let n = 12;
        let p = 9;
        let grid = Grid::unit(p).unwrap();
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..p).map(|_| rng.sample(StandardNormal)).collect())
            .collect();
        let fts = FunctionalTimeSeries::from_rows(grid.clone(), &rows).unwrap();
        let surf = autocovariance_surface(&fts, 0).unwrap();
        let model = fpca(&fts, &surf, p).unwrap();

        for a in 0..p {
            let fa = model.eigenfunction(a);
            for b in 0..p {
                let fb = model.eigenfunction(b);
                let ip = inner_product(&fa, &fb, &grid).unwrap();
                let want = if a == b { 1.0 } else { 0.0 };
                assert!((ip - want).abs() < 1e-8, "({a},{b}) -> {ip}");
            }
        }

        // Full-rank reconstruction: mean + sum_k score * eigenfunction.
        for t in 0..n {
            for j in 0..p {
                let mut acc = model.mean[j];
                for k in 0..p {
                    acc += model.scores[(t, k)] * model.eigenfunctions[(j, k)];
                }
                assert!((acc - fts.values()[(t, j)]).abs() < 1e-10);
                assert!(model.residuals[(t, j)].abs() < 1e-10);
            }
        }
    }

    #[test]
    fn scores_are_centered() {
        let mut rng = StdRng::seed_from_u64(13);
        let n = 30;
        let p = 7;
        let grid = Grid::unit(p).unwrap();
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..p).map(|_| rng.sample(StandardNormal)).collect())
            .collect();
        let fts = FunctionalTimeSeries::from_rows(grid, &rows).unwrap();
        let surf = autocovariance_surface(&fts, 0).unwrap();
        let model = fpca(&fts, &surf, 3).unwrap();
        for k in 0..3 {
            let total: f64 = model.score_series(k).iter().sum();
            assert!(total.abs() < 1e-8 * n as f64, "component {k}: {total}");
        }
    }

    #[test]
    fn constant_series_gives_zero_spectrum() {
        let grid = Grid::unit(6).unwrap();
        let rows: Vec<Vec<f64>> = (0..8).map(|_| vec![3.25; 6]).collect();
        let fts = FunctionalTimeSeries::from_rows(grid, &rows).unwrap();
        let surf = autocovariance_surface(&fts, 0).unwrap();
        let model = fpca(&fts, &surf, 1).unwrap();
        assert!(model.eigenvalues.iter().all(|&l| l == 0.0));
        assert!(model.residuals.iter().all(|&r| r.abs() < 1e-12));
        assert!(model.scores.iter().all(|&s| s.abs() < 1e-12));
    }

    #[test]
    fn asymmetric_surface_rejected() {
        let grid = Grid::unit(3).unwrap();
        let mut m = DMatrix::<f64>::identity(3, 3);
        m[(0, 2)] = 0.5;
        let surf = CovarianceSurface {
            grid,
            matrix: m,
            kind: SurfaceKind::LongRun,
        };
        assert!(matches!(
            weighted_eigen(&surf),
            Err(Error::NotSymmetric { .. })
        ));
    }

    #[test]
    fn select_k_dominant_first_component() {
        let k = select_k(&[10.0, 0.001, 0.0009, 0.0008], 100).unwrap();
        assert_eq!(k, 1);
    }

    #[test]
    fn select_k_two_strong_components() {
        let k = select_k(&[5.0, 4.9, 0.01, 0.009], 100).unwrap();
        assert_eq!(k, 2);
    }

    #[test]
    fn select_k_zero_spectrum_defaults_to_one() {
        assert_eq!(select_k(&[0.0, 0.0, 0.0], 50).unwrap(), 1);
    }

    #[test]
    fn select_k_is_scale_invariant() {
        let base = vec![4.0, 1.0, 0.2, 0.01, 0.001];
        let k0 = select_k(&base, 80).unwrap();
        let scaled: Vec<f64> = base.iter().map(|l| l * 4.0).collect();
        // Multiplying every curve by c multiplies eigenvalues by c^2.
        assert_eq!(select_k(&scaled, 80).unwrap(), k0);
    }

    #[test]
    fn eigenvalues_scale_quadratically_with_the_series() {
        let fts = rank1_series(20, 21, |t| (t as f64 * 0.7).sin() * 2.0 + 0.3);
        let surf = autocovariance_surface(&fts, 0).unwrap();
        let model = fpca(&fts, &surf, 1).unwrap();

        let scaled_rows: Vec<Vec<f64>> = (0..fts.n())
            .map(|t| fts.curve(t).iter().map(|v| 2.0 * v).collect())
            .collect();
        let scaled =
            FunctionalTimeSeries::from_rows(fts.grid().clone(), &scaled_rows).unwrap();
        let surf2 = autocovariance_surface(&scaled, 0).unwrap();
        let model2 = fpca(&scaled, &surf2, 1).unwrap();

        assert!(
            (model2.eigenvalues[0] / model.eigenvalues[0] - 4.0).abs() < 1e-8,
            "ratio {}",
            model2.eigenvalues[0] / model.eigenvalues[0]
        );
    }
}
