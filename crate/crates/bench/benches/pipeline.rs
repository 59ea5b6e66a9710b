//! Benchmarks of the pipeline's hot paths: covariance surface estimation,
//! eigendecomposition, score-model fitting, rolling forecast errors, break
//! search, and a small bootstrap run.

use criterion::{criterion_group, criterion_main, Criterion};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use rand_distr::StandardNormal;

use stoptime_core::arima::{auto_arima, fit_arima};
use stoptime_core::bootstrap::{bootstrap_stopping_distribution, BootstrapConfig};
use stoptime_core::detector::{detect_breakpoint, rolling_isfe, IsfeSeries, WindowScheme};
use stoptime_core::fda::{
    fpca, long_run_covariance, FunctionalTimeSeries, Grid, KernelKind, KernelSpec,
};
use stoptime_core::forecast::KernelChoice;

fn random_series(n: usize, p: usize, seed: u64) -> FunctionalTimeSeries {
    let mut rng = StdRng::seed_from_u64(seed);
    let grid = Grid::unit(p).unwrap();
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(n);
    let mut prev = vec![0.0f64; p];
    for _ in 0..n {
        let row: Vec<f64> = prev
            .iter()
            .map(|v| 0.5 * v + rng.sample::<f64, _>(StandardNormal))
            .collect();
        prev = row.clone();
        rows.push(row);
    }
    FunctionalTimeSeries::from_rows(grid, &rows).unwrap()
}

fn ar1(n: usize, phi: f64, seed: u64) -> Vec<f64> {
    let mut rng = StdRng::seed_from_u64(seed);
    let mut x = 0.0f64;
    (0..n)
        .map(|_| {
            x = phi * x + rng.sample::<f64, _>(StandardNormal);
            x
        })
        .collect()
}

fn bench_long_run_covariance(c: &mut Criterion) {
    let fts = random_series(40, 101, 1);
    let kernel = KernelSpec::new(KernelKind::Bartlett, 3.0).unwrap();
    c.bench_function("long_run_covariance_40x101", |b| {
        b.iter(|| long_run_covariance(&fts, &kernel).unwrap())
    });
}

fn bench_fpca(c: &mut Criterion) {
    let fts = random_series(40, 101, 2);
    let kernel = KernelSpec::new(KernelKind::Bartlett, 3.0).unwrap();
    let surface = long_run_covariance(&fts, &kernel).unwrap();
    c.bench_function("fpca_101_grid_3_components", |b| {
        b.iter(|| fpca(&fts, &surface, 3).unwrap())
    });
}

fn bench_arima(c: &mut Criterion) {
    let y = ar1(100, 0.6, 3);
    c.bench_function("fit_arima_100_obs_1_0_0", |b| {
        b.iter(|| fit_arima(&y, 1, 0, 0, false).unwrap())
    });
    let short = ar1(50, 0.6, 4);
    c.bench_function("auto_arima_50_obs", |b| {
        b.iter(|| auto_arima(&short).unwrap())
    });
}

fn bench_rolling_isfe(c: &mut Criterion) {
    let fts = random_series(20, 51, 5);
    c.bench_function("rolling_isfe_20_curves", |b| {
        b.iter(|| rolling_isfe(&fts, KernelChoice::default(), WindowScheme::default()).unwrap())
    });
}

fn bench_detect_breakpoint(c: &mut Criterion) {
    let mut rng = StdRng::seed_from_u64(6);
    let errors: Vec<f64> = (0..200).map(|_| rng.gen_range(0.0..10.0)).collect();
    let isfe = IsfeSeries {
        holdout_index: (4..204).collect(),
        errors,
    };
    c.bench_function("detect_breakpoint_200_errors", |b| {
        b.iter(|| detect_breakpoint(&isfe, 2).unwrap())
    });
}

fn bench_bootstrap(c: &mut Criterion) {
    let fts = random_series(16, 51, 7);
    let cfg = BootstrapConfig {
        replications: 20,
        seed: 1,
        ..BootstrapConfig::default()
    };
    c.bench_function("bootstrap_16_curves_20_reps", |b| {
        b.iter(|| bootstrap_stopping_distribution(&fts, &cfg).unwrap())
    });
}

criterion_group!(
    benches,
    bench_long_run_covariance,
    bench_fpca,
    bench_arima,
    bench_rolling_isfe,
    bench_detect_breakpoint,
    bench_bootstrap
);
criterion_main!(benches);
