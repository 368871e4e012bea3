//! Monotone local linear estimation of conditional distribution functions.

// Negated comparisons such as `!(h > 0.0)` are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bandwidth;
pub mod bootstrap;
pub mod error;
pub mod estimators;
pub mod io;
pub mod kernel;
pub mod sample;
pub mod sim;

pub use bandwidth::{secondary_bandwidth, select_bandwidth, BandwidthUnits, CvConfig, CvResult};
pub use bootstrap::{lmf_bootstrap, BootstrapSummary};
pub use error::{Error, Result};
pub use estimators::{
    cdf_smooth, cdf_step, distribution, ll_density, ll_mean, monotone_cdf_alg1,
    monotone_density_alg2, nw_mean, point_predict, quantile, DistributionEstimate, EstimatorConfig,
    GridSpec, LocalFit, Method, MonotoneAlgorithm,
};
pub use io::{resolve_seed, ColumnRef, DatasetFile};
pub use kernel::{
    local_weights, smoothing_pair, KernelFamily, SmoothingKernel, WeightMode, WeightVector,
};
pub use sample::{RegressionSample, Window};
pub use sim::{
    generate, ks_statistic, run_experiment, DgpSpec, ErrorKind, EvalPoint, ExperimentConfig,
    ExperimentReport, PointReport, VarianceKind,
};
