//! Estimation of the optimal stopping time of a monitored process from a
//! functional time series of curves.
//!
//! The pipeline: fit a dynamic functional principal component model to the
//! curves observed so far, forecast the next curve, accumulate integrated
//! squared forecast errors over rolling windows, and locate a single
//! structural break in the differenced error sequence by least squares. A
//! nonparametric bootstrap quantifies the uncertainty of the detected
//! stopping time, and a simulation harness calibrates the procedure on
//! synthetic processes with known break locations.
//!
//! ```
//! use stoptime_core::detector::stopping_time;
//! use stoptime_core::forecast::KernelChoice;
//! use stoptime_core::simulate::{gen_far1, Far1Config};
//!
//! let sim = gen_far1(&Far1Config::new(20, 0.5, 3))?;
//! let det = stopping_time(&sim.fts, KernelChoice::default())?;
//! assert_eq!(det.breakpoint.stopping_time, det.breakpoint.break_index - 2);
//! # Ok::<(), stoptime_core::Error>(())
//! ```

pub mod arima;
pub mod bootstrap;
pub mod detector;
pub mod error;
pub mod fda;
pub mod forecast;
pub mod simulate;

pub use error::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
