//! Functional-data building blocks: evaluation grids with quadrature,
//! curve collections, autocovariance and long-run covariance surfaces, and
//! functional principal component analysis.

mod covariance;
mod fpca;
mod grid;
mod series;

pub use covariance::{
    autocovariance_surface, long_run_covariance, mean_function, plugin_bandwidth,
    CovarianceSurface, KernelKind, KernelSpec, SurfaceKind,
};
pub use fpca::{fpca, select_k, weighted_eigen, EigenPairs, FpcaModel};
pub(crate) use fpca::fpca_from_eigen;
pub use grid::{inner_product, norm, Grid};
pub use series::FunctionalTimeSeries;
