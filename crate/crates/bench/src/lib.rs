//! Fixtures shared by the estimator benchmarks.

use monollr::{generate, DgpSpec, EstimatorConfig, RegressionSample, Window};

/// One realization of the sine design with `n` points and noise 0.1.
pub fn sine_sample(n: usize) -> RegressionSample {
    generate(&DgpSpec::new(n, 0.1, 17), 0).expect("valid design")
}

/// Bandwidth `b` (observation counts) on a sample of size `n`.
pub fn config(b: f64, n: usize, window: Window) -> EstimatorConfig {
    EstimatorConfig::from_counts(b, n)
        .expect("positive bandwidth")
        .with_window(window)
}
