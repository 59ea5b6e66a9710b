//! Evaluation grid with trapezoid quadrature weights.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Common evaluation grid for all curves: strictly increasing points plus
/// the trapezoid weights used for every integral in the crate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    points: Vec<f64>,
    weights: Vec<f64>,
}

impl Grid {
    /// Builds a grid from strictly increasing, finite points (at least 2).
    pub fn new(points: Vec<f64>) -> Result<Self> {
        if points.len() < 2
            || points.iter().any(|x| !x.is_finite())
            || points.windows(2).any(|w| w[1] <= w[0])
        {
            return Err(Error::InvalidGrid);
        }
        let p = points.len();
        let mut weights = vec![0.0; p];
        weights[0] = (points[1] - points[0]) / 2.0;
        weights[p - 1] = (points[p - 1] - points[p - 2]) / 2.0;
        for i in 1..p - 1 {
            weights[i] = (points[i + 1] - points[i - 1]) / 2.0;
        }
        Ok(Self { points, weights })
    }

    /// Equispaced grid of `p` points covering `[a, b]`.
    pub fn equispaced(a: f64, b: f64, p: usize) -> Result<Self> {
        if p < 2 || b <= a || a.is_nan() || b.is_nan() {
            return Err(Error::InvalidGrid);
        }
        let step = (b - a) / (p - 1) as f64;
        Ok(Self::new((0..p).map(|i| a + step * i as f64).collect())
            .expect("equispaced points are strictly increasing"))
    }

    /// Unit-interval grid with `p` points; the default for simulations.
    pub fn unit(p: usize) -> Result<Self> {
        Self::equispaced(0.0, 1.0, p)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    /// Trapezoid quadrature weights; all positive, summing to the span.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Length of the observation interval.
    pub fn span(&self) -> f64 {
        self.points[self.points.len() - 1] - self.points[0]
    }
}

/// Trapezoid approximation of the L2 inner product `∫ f(u) g(u) du`.
pub fn inner_product(f: &[f64], g: &[f64], grid: &Grid) -> Result<f64> {
    if f.len() != grid.len() || g.len() != grid.len() {
        return Err(Error::DimensionMismatch(format!(
            "inner product needs curves of grid length {}, got {} and {}",
            grid.len(),
            f.len(),
            g.len()
        )));
    }
    let w = grid.weights();
    let mut acc = 0.0;
    for i in 0..f.len() {
        acc += w[i] * f[i] * g[i];
    }
    Ok(acc)
}

/// Quadrature L2 norm of a curve.
pub fn norm(f: &[f64], grid: &Grid) -> Result<f64> {
    Ok(inner_product(f, f, grid)?.max(0.0).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_degenerate_grids() {
        assert!(Grid::new(vec![0.0]).is_err());
        assert!(Grid::new(vec![0.0, 0.0]).is_err());
        assert!(Grid::new(vec![0.0, 1.0, 0.5]).is_err());
        assert!(Grid::new(vec![0.0, f64::NAN]).is_err());
    }

    #[test]
    fn weights_are_positive_and_sum_to_span() {
        let g = Grid::new(vec![0.0, 0.1, 0.4, 1.0]).unwrap();
        assert!(g.weights().iter().all(|&w| w > 0.0));
        let total: f64 = g.weights().iter().sum();
        assert!((total - g.span()).abs() < 1e-12);

        let g = Grid::unit(101).unwrap();
        let total: f64 = g.weights().iter().sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn inner_product_of_unit_constants_is_span() {
        let g = Grid::unit(51).unwrap();
        let ones = vec![1.0; g.len()];
        let ip = inner_product(&ones, &ones, &g).unwrap();
        assert!((ip - 1.0).abs() < 1e-12);
    }

    #[test]
    fn inner_product_linear_against_constant() {
        // ∫ u du over [0,1] = 1/2; trapezoid weights are exact for this.
        let g = Grid::unit(101).unwrap();
        let f: Vec<f64> = g.points().to_vec();
        let ones = vec![1.0; g.len()];
        let ip = inner_product(&f, &ones, &g).unwrap();
        assert!((ip - 0.5).abs() < 1e-6);
    }

    #[test]
    fn sin_cos_near_orthogonal() {
        use std::f64::consts::PI;
        let g = Grid::unit(101).unwrap();
        let f: Vec<f64> = g.points().iter().map(|&u| (2.0 * PI * u).sin()).collect();
        let h: Vec<f64> = g.points().iter().map(|&u| (2.0 * PI * u).cos()).collect();
        let ip = inner_product(&f, &h, &g).unwrap();
        assert!(ip.abs() < 1e-3, "got {ip}");
    }

    #[test]
    fn mismatched_lengths_error() {
        let g = Grid::unit(5).unwrap();
        assert!(inner_product(&[1.0; 4], &[1.0; 5], &g).is_err());
    }
}
