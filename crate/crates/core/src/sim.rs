//! Simulation experiments: data-generating processes, the KS metric and the
//! experiment runner.
//!
//! Each realization draws a sample from the model `Y_i = sin(w x_i) +
//! sigma(x_i) e_i` on `x_i = i / n`. At every evaluation point the
//! observation there is held out, the estimators are fitted to the rest, and
//! the held-out responses across realizations form the reference
//! distribution.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp1, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::{
    distribution, point_predict, DistributionEstimate, EstimatorConfig, Method,
};
use crate::sample::{RegressionSample, Window};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorKind {
    /// Standard normal errors.
    #[default]
    Gaussian,
    /// `chi^2_2 / 2 - 1`: mean 0, variance 1, right-skewed.
    CenteredChisq2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VarianceKind {
    /// `sigma(x) = tau`.
    #[default]
    Homoskedastic,
    /// `sigma(x) = tau x`.
    LinearInX,
}

fn default_frequency() -> f64 {
    1.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DgpSpec {
    pub n: usize,
    pub tau: f64,
    #[serde(default)]
    pub error_kind: ErrorKind,
    #[serde(default)]
    pub variance_kind: VarianceKind,
    #[serde(default)]
    pub seed: u64,
    /// `w` in the mean function `sin(w x)`.
    #[serde(default = "default_frequency")]
    pub mean_frequency: f64,
}

impl DgpSpec {
    pub fn new(n: usize, tau: f64, seed: u64) -> Self {
        DgpSpec {
            n,
            tau,
            error_kind: ErrorKind::Gaussian,
            variance_kind: VarianceKind::Homoskedastic,
            seed,
            mean_frequency: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::invalid(format!(
                "the design needs n >= 2, got {}",
                self.n
            )));
        }
        if !(self.tau >= 0.0) || !self.tau.is_finite() {
            return Err(Error::invalid(format!(
                "tau must be nonnegative, got {}",
                self.tau
            )));
        }
        if !self.mean_frequency.is_finite() {
            return Err(Error::invalid("mean frequency must be finite"));
        }
        Ok(())
    }

    pub fn mean(&self, x: f64) -> f64 {
        (self.mean_frequency * x).sin()
    }

    pub fn sigma(&self, x: f64) -> f64 {
        match self.variance_kind {
            VarianceKind::Homoskedastic => self.tau,
            VarianceKind::LinearInX => self.tau * x,
        }
    }
}

/// Realization `realization` of the model; each realization has its own
/// random stream, so adding realizations leaves earlier ones unchanged.
pub fn generate(dgp: &DgpSpec, realization: usize) -> Result<RegressionSample> {
    dgp.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(dgp.seed);
    rng.set_stream(realization as u64);
    let n = dgp.n as f64;
    let xs: Vec<f64> = (1..=dgp.n).map(|i| i as f64 / n).collect();
    let ys = xs
        .iter()
        .map(|&x| {
            let e: f64 = match dgp.error_kind {
                ErrorKind::Gaussian => rng.sample(StandardNormal),
                ErrorKind::CenteredChisq2 => rng.sample::<f64, _>(Exp1) - 1.0,
            };
            dgp.mean(x) + dgp.sigma(x) * e
        })
        .collect();
    RegressionSample::new(xs, ys)
}

/// Largest distance between the estimated cdf and the empirical cdf of
/// `observed`, taken over both one-sided limits at every jump.
pub fn ks_statistic(est: &DistributionEstimate, observed: &[f64]) -> f64 {
    let mut sorted = observed.to_vec();
    sorted.sort_by(f64::total_cmp);
    ks_sorted(est, &sorted)
}

fn ks_sorted(est: &DistributionEstimate, sorted: &[f64]) -> f64 {
    let n = sorted.len() as f64;
    let mut sup = 0.0f64;
    let mut k = 0;
    while k < sorted.len() {
        let v = sorted[k];
        let below = k as f64 / n;
        while k < sorted.len() && sorted[k] == v {
            k += 1;
        }
        let at = k as f64 / n;
        let f = est.cdf_at(v);
        sup = sup.max((f - below).abs()).max((f - at).abs());
    }
    sup
}

/// Lower empirical quantile `sorted[ceil(alpha n) - 1]`.
pub fn empirical_quantile(sorted: &[f64], alpha: f64) -> f64 {
    let k = (alpha * sorted.len() as f64).ceil() as usize;
    sorted[k.clamp(1, sorted.len()) - 1]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvalPoint {
    /// 1-based design index.
    pub index: usize,
    #[serde(default)]
    pub window: Window,
}

impl EvalPoint {
    /// Last design point with only data to its left.
    pub fn boundary(n: usize) -> Self {
        EvalPoint {
            index: n,
            window: Window::OneSidedLeft,
        }
    }

    pub fn interior(index: usize) -> Self {
        EvalPoint {
            index,
            window: Window::TwoSided,
        }
    }
}

fn default_methods() -> Vec<Method> {
    Method::ALL.to_vec()
}

fn default_bandwidths() -> Vec<f64> {
    (1..=14).map(|k| 10.0 * k as f64).collect()
}

fn default_levels() -> Vec<f64> {
    vec![0.1, 0.5, 0.9]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub dgp: DgpSpec,
    pub realizations: usize,
    pub eval_points: Vec<EvalPoint>,
    /// Bandwidths in observation counts.
    #[serde(default = "default_bandwidths")]
    pub bandwidths: Vec<f64>,
    #[serde(default = "default_methods")]
    pub methods: Vec<Method>,
    #[serde(default = "default_levels")]
    pub quantile_levels: Vec<f64>,
    /// Kernel, smoothing and monotone settings; `h`, `h0` and the window are
    /// set per cell.
    #[serde(default)]
    pub estimator: EstimatorConfig,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        self.dgp.validate()?;
        if self.realizations == 0 {
            return Err(Error::invalid("at least one realization is required"));
        }
        if self.eval_points.is_empty() {
            return Err(Error::invalid("no evaluation points"));
        }
        if let Some(p) = self
            .eval_points
            .iter()
            .find(|p| p.index == 0 || p.index > self.dgp.n)
        {
            return Err(Error::invalid(format!(
                "evaluation index {} outside 1..={}",
                p.index, self.dgp.n
            )));
        }
        if self.bandwidths.is_empty()
            || self
                .bandwidths
                .iter()
                .any(|&b| !(b > 0.0) || !b.is_finite())
        {
            return Err(Error::invalid(
                "bandwidths must be a nonempty list of positive values",
            ));
        }
        if self.methods.is_empty() {
            return Err(Error::invalid("no methods requested"));
        }
        if self.quantile_levels.iter().any(|&a| !(a > 0.0 && a < 1.0)) {
            return Err(Error::invalid("quantile levels must lie in (0, 1)"));
        }
        Ok(())
    }

    fn cell_config(&self, b: f64, window: Window) -> EstimatorConfig {
        let h = b / self.dgp.n as f64;
        EstimatorConfig {
            h,
            h0: h * h,
            window,
            ..self.estimator
        }
    }
}

/// Results for one `(b, method)` pair at one evaluation point. Statistics
/// are `None` when the method does not produce them or when any
/// realization failed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub b: f64,
    pub method: Method,
    pub ks: Option<f64>,
    pub bias: Option<f64>,
    pub mse: Option<f64>,
    /// Estimated quantiles per realization, one row per level.
    pub quantiles: Vec<Vec<f64>>,
    /// Realizations in which the estimator failed.
    pub failures: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointReport {
    pub eval_point: EvalPoint,
    pub x: f64,
    /// Held-out responses in realization order.
    pub held_out: Vec<f64>,
    /// Lower empirical quantiles of the held-out responses.
    pub true_quantiles: Vec<f64>,
    pub cells: Vec<Cell>,
}

impl PointReport {
    pub fn cell(&self, b: f64, method: Method) -> Option<&Cell> {
        self.cells.iter().find(|c| c.b == b && c.method == method)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub bandwidths: Vec<f64>,
    pub methods: Vec<Method>,
    pub quantile_levels: Vec<f64>,
    pub points: Vec<PointReport>,
}

impl ExperimentReport {
    /// Number of cells with at least one failed realization.
    pub fn infeasible_cells(&self) -> usize {
        self.points
            .iter()
            .flat_map(|p| &p.cells)
            .filter(|c| c.failures > 0)
            .count()
    }
}

/// Outcome of one cell in one realization.
#[derive(Debug, Clone)]
struct Trial {
    ks: Option<f64>,
    error: f64,
    quantiles: Vec<f64>,
}

fn run_trial(
    reduced: &RegressionSample,
    x: f64,
    held: f64,
    truth: &[f64],
    cfg: &EstimatorConfig,
    method: Method,
    levels: &[f64],
) -> Result<Trial> {
    if method == Method::Ll {
        let pred = point_predict(reduced, x, cfg, method)?;
        return Ok(Trial {
            ks: None,
            error: pred - held,
            quantiles: Vec::new(),
        });
    }
    let est = distribution(reduced, x, cfg, method)?;
    let pred = match method {
        Method::Llm => est.mean(),
        _ => point_predict(reduced, x, cfg, method)?,
    };
    let quantiles = levels
        .iter()
        .map(|&a| est.quantile(a))
        .collect::<Result<_>>()?;
    Ok(Trial {
        ks: Some(ks_sorted(&est, truth)),
        error: pred - held,
        quantiles,
    })
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let r_count = cfg.realizations;

    // First pass: the held-out responses define the reference distributions.
    let held: Vec<Vec<f64>> = (0..r_count)
        .into_par_iter()
        .map(|r| {
            let s = generate(&cfg.dgp, r)?;
            Ok(cfg
                .eval_points
                .iter()
                .map(|p| s.ys()[p.index - 1])
                .collect())
        })
        .collect::<Result<_>>()?;
    let truths: Vec<Vec<f64>> = (0..cfg.eval_points.len())
        .map(|k| {
            let mut v: Vec<f64> = held.iter().map(|h| h[k]).collect();
            v.sort_by(f64::total_cmp);
            v
        })
        .collect();

    let cells: Vec<(usize, f64, Method)> = (0..cfg.eval_points.len())
        .flat_map(|k| {
            cfg.bandwidths
                .iter()
                .flat_map(move |&b| cfg.methods.iter().map(move |&m| (k, b, m)))
        })
        .collect();

    // Second pass: fit every cell in every realization.
    let trials: Vec<Vec<Result<Trial>>> = (0..r_count)
        .into_par_iter()
        .map(|r| {
            let s = generate(&cfg.dgp, r)?;
            let reduced: Vec<RegressionSample> = cfg
                .eval_points
                .iter()
                .map(|p| s.without(p.index - 1))
                .collect::<Result<_>>()?;
            Ok(cells
                .iter()
                .map(|&(k, b, method)| {
                    let p = cfg.eval_points[k];
                    let x = s.xs()[p.index - 1];
                    run_trial(
                        &reduced[k],
                        x,
                        held[r][k],
                        &truths[k],
                        &cfg.cell_config(b, p.window),
                        method,
                        &cfg.quantile_levels,
                    )
                })
                .collect())
        })
        .collect::<Result<_>>()?;

    let n = cfg.dgp.n as f64;
    let mut points: Vec<PointReport> = cfg
        .eval_points
        .iter()
        .enumerate()
        .map(|(k, &p)| PointReport {
            eval_point: p,
            x: p.index as f64 / n,
            held_out: held.iter().map(|h| h[k]).collect(),
            true_quantiles: cfg
                .quantile_levels
                .iter()
                .map(|&a| empirical_quantile(&truths[k], a))
                .collect(),
            cells: Vec::new(),
        })
        .collect();

    for (c, &(k, b, method)) in cells.iter().enumerate() {
        let ok: Vec<&Trial> = trials.iter().filter_map(|t| t[c].as_ref().ok()).collect();
        let failures = r_count - ok.len();
        let complete = failures == 0;
        let mean =
            |f: &dyn Fn(&Trial) -> f64| ok.iter().map(|t| f(t)).sum::<f64>() / r_count as f64;
        let ks = (complete && method != Method::Ll).then(|| mean(&|t| t.ks.unwrap_or(f64::NAN)));
        let bias = complete.then(|| mean(&|t| t.error));
        let mse = complete.then(|| mean(&|t| t.error * t.error));
        let quantiles = (0..cfg.quantile_levels.len())
            .map(|j| {
                trials
                    .iter()
                    .map(|t| {
                        t[c].as_ref()
                            .ok()
                            .and_then(|t| t.quantiles.get(j).copied())
                            .unwrap_or(f64::NAN)
                    })
                    .collect()
            })
            .collect();
        let quantiles = if method == Method::Ll {
            Vec::new()
        } else {
            quantiles
        };
        points[k].cells.push(Cell {
            b,
            method,
            ks,
            bias,
            mse,
            quantiles,
            failures,
        });
    }

    Ok(ExperimentReport {
        bandwidths: cfg.bandwidths.clone(),
        methods: cfg.methods.clone(),
        quantile_levels: cfg.quantile_levels.clone(),
        points,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_noise_is_the_mean() {
        let s = generate(&DgpSpec::new(50, 0.0, 3), 0).unwrap();
        for (&x, &y) in s.xs().iter().zip(s.ys()) {
            assert_eq!(y, x.sin());
        }
        assert_eq!(s.xs()[49], 1.0);
    }

    #[test]
    fn realizations_are_stable() {
        let dgp = DgpSpec::new(20, 0.1, 9);
        assert_eq!(generate(&dgp, 4).unwrap(), generate(&dgp, 4).unwrap());
        assert_ne!(generate(&dgp, 4).unwrap(), generate(&dgp, 5).unwrap());
    }

    #[test]
    fn empirical_quantiles() {
        let v = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(empirical_quantile(&v, 0.1), 1.0);
        assert_eq!(empirical_quantile(&v, 0.25), 1.0);
        assert_eq!(empirical_quantile(&v, 0.26), 2.0);
        assert_eq!(empirical_quantile(&v, 0.9), 4.0);
    }

    #[test]
    fn ks_disjoint_support() {
        let est = DistributionEstimate {
            grid: vec![-1.0, 0.0, 1e-9, 2.0],
            cdf: vec![0.0, 0.0, 1.0, 1.0],
            density: None,
            x_eval: 0.0,
            monotone: true,
        };
        assert_eq!(ks_statistic(&est, &[1.0]), 1.0);
        assert_eq!(ks_statistic(&est, &[-0.5, 1.0]), 0.5);
    }

    #[test]
    fn smoke_experiment_shape() {
        let cfg = ExperimentConfig {
            dgp: DgpSpec::new(101, 0.1, 1),
            realizations: 1,
            eval_points: vec![EvalPoint::boundary(101), EvalPoint::interior(30)],
            bandwidths: vec![20.0],
            methods: vec![Method::Llm],
            quantile_levels: vec![0.5],
            estimator: EstimatorConfig::default(),
        };
        let report = run_experiment(&cfg).unwrap();
        assert_eq!(report.points.len(), 2);
        for p in &report.points {
            assert_eq!(p.cells.len(), 1);
            let c = &p.cells[0];
            assert!(c.ks.unwrap() >= 0.0 && c.ks.unwrap() <= 1.0);
            assert_eq!(c.quantiles, vec![vec![c.quantiles[0][0]]]);
            assert!(c.mse.unwrap() >= c.bias.unwrap().powi(2) - 1e-12);
        }
        assert_eq!(report, run_experiment(&cfg).unwrap());
    }
}
