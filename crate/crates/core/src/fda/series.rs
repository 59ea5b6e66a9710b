//! Container for a functional time series observed on a common grid.

use nalgebra::DMatrix;

use super::Grid;
use crate::{Error, Result};

/// `n` curves observed at the `p` points of a shared grid; row `t` of
/// `values` is the curve at time `t`. `time_index` carries the 1-based
/// original time labels so detections can be reported on the input scale
/// even for sub-windows.
#[derive(Debug, Clone, PartialEq)]
pub struct FunctionalTimeSeries {
    grid: Grid,
    values: DMatrix<f64>,
    time_index: Vec<usize>,
}

impl FunctionalTimeSeries {
    /// Wraps an `n x p` matrix of curve evaluations; labels times `1..=n`.
    pub fn new(grid: Grid, values: DMatrix<f64>) -> Result<Self> {
        let labels = (1..=values.nrows()).collect();
        Self::with_time_index(grid, values, labels)
    }

    /// As [`new`](Self::new) with explicit strictly increasing time labels.
    pub fn with_time_index(
        grid: Grid,
        values: DMatrix<f64>,
        time_index: Vec<usize>,
    ) -> Result<Self> {
        if values.nrows() == 0 {
            return Err(Error::EmptyInput);
        }
        if values.ncols() != grid.len() {
            return Err(Error::DimensionMismatch(format!(
                "curves have {} points but grid has {}",
                values.ncols(),
                grid.len()
            )));
        }
        if time_index.len() != values.nrows() {
            return Err(Error::DimensionMismatch(format!(
                "{} time labels for {} curves",
                time_index.len(),
                values.nrows()
            )));
        }
        if time_index.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidConfig(
                "time labels must be strictly increasing".into(),
            ));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidConfig(
                "curve values must be finite".into(),
            ));
        }
        Ok(Self {
            grid,
            values,
            time_index,
        })
    }

    /// Builds from per-curve rows.
    pub fn from_rows(grid: Grid, rows: &[Vec<f64>]) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::EmptyInput);
        }
        let p = grid.len();
        if rows.iter().any(|r| r.len() != p) {
            return Err(Error::DimensionMismatch(
                "all curves must match the grid length".into(),
            ));
        }
        let values = DMatrix::from_fn(rows.len(), p, |i, j| rows[i][j]);
        Self::new(grid, values)
    }

    /// Number of curves.
    pub fn n(&self) -> usize {
        self.values.nrows()
    }

    /// Number of grid points per curve.
    pub fn p(&self) -> usize {
        self.values.ncols()
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub fn time_index(&self) -> &[usize] {
        &self.time_index
    }

    /// Curve at row `t` (0-based) as an owned vector.
    pub fn curve(&self, t: usize) -> Vec<f64> {
        self.values.row(t).iter().copied().collect()
    }

    /// The first `len` curves as a new series, keeping time labels.
    pub fn prefix(&self, len: usize) -> Result<Self> {
        self.window(0, len)
    }

    /// Curves `start..start + len` (0-based rows) as a new series.
    pub fn window(&self, start: usize, len: usize) -> Result<Self> {
        if len == 0 {
            return Err(Error::EmptyInput);
        }
        if start + len > self.n() {
            return Err(Error::DimensionMismatch(format!(
                "window {}..{} out of {} curves",
                start,
                start + len,
                self.n()
            )));
        }
        Ok(Self {
            grid: self.grid.clone(),
            values: self.values.rows(start, len).into_owned(),
            time_index: self.time_index[start..start + len].to_vec(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy() -> FunctionalTimeSeries {
        let grid = Grid::unit(3).unwrap();
        FunctionalTimeSeries::from_rows(
            grid,
            &[
                vec![1.0, 2.0, 3.0],
                vec![4.0, 5.0, 6.0],
                vec![7.0, 8.0, 9.0],
            ],
        )
        .unwrap()
    }

    #[test]
    fn shape_and_labels() {
        let fts = toy();
        assert_eq!(fts.n(), 3);
        assert_eq!(fts.p(), 3);
        assert_eq!(fts.time_index(), &[1, 2, 3]);
        assert_eq!(fts.curve(1), vec![4.0, 5.0, 6.0]);
    }

    #[test]
    fn prefix_keeps_labels() {
        let fts = toy();
        let head = fts.prefix(2).unwrap();
        assert_eq!(head.n(), 2);
        assert_eq!(head.time_index(), &[1, 2]);
        assert!(fts.prefix(4).is_err());
        assert!(fts.prefix(0).is_err());
    }

    #[test]
    fn rejects_ragged_and_nonfinite() {
        let grid = Grid::unit(3).unwrap();
        assert!(
            FunctionalTimeSeries::from_rows(grid.clone(), &[vec![1.0, 2.0]]).is_err()
        );
        assert!(FunctionalTimeSeries::from_rows(
            grid,
            &[vec![1.0, f64::NAN, 2.0]]
        )
        .is_err());
    }
}
