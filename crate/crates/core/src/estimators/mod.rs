//! Conditional mean, distribution, density and quantile estimators.
//!
//! Every estimator applies the configured [`Window`] at the evaluation
//! point, builds one set of local weights and normalizes by their sum.

mod grid;
mod monotone;

pub use grid::{DistributionEstimate, GridSpec, DEFAULT_GRID_MARGIN, DEFAULT_GRID_POINTS};

use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::kernel::{local_weights, KernelFamily, SmoothingKernel, WeightMode, WeightVector};
use crate::sample::{RegressionSample, Window};
use grid::SmoothedMixture;

/// How the local linear distribution estimate is made monotone.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MonotoneAlgorithm {
    /// Running maximum of the raw cdf, rescaled to end at 1.
    #[default]
    RunningMax,
    /// Positive part of the raw density, renormalized and integrated.
    ClippedDensity,
}

/// Estimator settings shared by every method.
///
/// `h` is in regressor units; [`EstimatorConfig::from_counts`] converts a
/// bandwidth given as a number of observations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EstimatorConfig {
    pub family: KernelFamily,
    pub h: f64,
    pub h0: f64,
    pub mode: WeightMode,
    pub window: Window,
    /// `None` picks the default grid around the responses.
    pub grid: Option<GridSpec>,
    pub smoothing: SmoothingKernel,
    pub algorithm: MonotoneAlgorithm,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        EstimatorConfig {
            family: KernelFamily::default(),
            h: 0.05,
            h0: 0.0025,
            mode: WeightMode::default(),
            window: Window::default(),
            grid: None,
            smoothing: SmoothingKernel::default(),
            algorithm: MonotoneAlgorithm::default(),
        }
    }
}

impl EstimatorConfig {
    /// `h = b / n` and `h0 = b^2 / n^2`.
    pub fn from_counts(b: f64, n: usize) -> Result<Self> {
        if !(b > 0.0) || !b.is_finite() {
            return Err(Error::invalid(format!(
                "bandwidth b must be positive, got {b}"
            )));
        }
        if n == 0 {
            return Err(Error::invalid("sample size must be positive"));
        }
        let h = b / n as f64;
        Ok(EstimatorConfig {
            h,
            h0: h * h,
            ..EstimatorConfig::default()
        })
    }

    pub fn with_h(mut self, h: f64) -> Self {
        self.h = h;
        self
    }

    pub fn with_h0(mut self, h0: f64) -> Self {
        self.h0 = h0;
        self
    }

    pub fn with_family(mut self, family: KernelFamily) -> Self {
        self.family = family;
        self
    }

    pub fn with_mode(mut self, mode: WeightMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn with_window(mut self, window: Window) -> Self {
        self.window = window;
        self
    }

    pub fn with_grid(mut self, grid: GridSpec) -> Self {
        self.grid = Some(grid);
        self
    }

    pub fn with_smoothing(mut self, smoothing: SmoothingKernel) -> Self {
        self.smoothing = smoothing;
        self
    }

    pub fn with_algorithm(mut self, algorithm: MonotoneAlgorithm) -> Self {
        self.algorithm = algorithm;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.h > 0.0) || !self.h.is_finite() {
            return Err(Error::invalid(format!(
                "bandwidth h must be positive, got {}",
                self.h
            )));
        }
        if !(self.h0 > 0.0) || !self.h0.is_finite() {
            return Err(Error::invalid(format!(
                "secondary bandwidth h0 must be positive, got {}",
                self.h0
            )));
        }
        if let Some(grid) = &self.grid {
            grid.validate()?;
        }
        Ok(())
    }

    fn grid_points(&self, ys: &[f64]) -> Result<Vec<f64>> {
        let spec = match self.grid {
            Some(spec) => spec,
            None => GridSpec::around(ys, self.h0)?,
        };
        Ok(spec.points())
    }
}

/// The four estimators compared throughout.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    /// Local constant (Nadaraya-Watson) weights.
    Lc,
    /// Hansen-adjusted local linear weights.
    Llh,
    /// Monotone-corrected local linear.
    Llm,
    /// Raw local linear; not a distribution in general.
    Ll,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::Lc, Method::Llh, Method::Llm, Method::Ll];
    /// The methods that yield proper distribution estimates.
    pub const DISTRIBUTIONS: [Method; 3] = [Method::Lc, Method::Llh, Method::Llm];

    pub fn weight_mode(self) -> WeightMode {
        match self {
            Method::Lc => WeightMode::LocalConstant,
            Method::Llh => WeightMode::Hansen,
            Method::Llm | Method::Ll => WeightMode::LocalLinear,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Method::Lc => "lc",
            Method::Llh => "llh",
            Method::Llm => "llm",
            Method::Ll => "ll",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "lc" | "nw" => Ok(Method::Lc),
            "llh" | "hansen" => Ok(Method::Llh),
            "llm" => Ok(Method::Llm),
            "ll" | "ll-raw" | "ll_raw" => Ok(Method::Ll),
            other => Err(Error::invalid(format!("unknown method `{other}`"))),
        }
    }
}

/// Local weights at one point together with the responses they apply to.
#[derive(Debug, Clone)]
pub struct LocalFit {
    ys: Vec<f64>,
    weights: WeightVector,
    total: f64,
}

impl LocalFit {
    pub fn new(
        sample: &RegressionSample,
        x: f64,
        cfg: &EstimatorConfig,
        mode: WeightMode,
    ) -> Result<Self> {
        cfg.validate()?;
        let local = sample.windowed(x, cfg.window)?;
        let weights = local_weights(x, local.xs(), cfg.h, cfg.family, mode)?;
        let total = weights.checked_sum()?;
        Ok(LocalFit {
            ys: local.ys().to_vec(),
            weights,
            total,
        })
    }

    pub fn weights(&self) -> &WeightVector {
        &self.weights
    }

    pub fn responses(&self) -> &[f64] {
        &self.ys
    }

    /// `sum w_i Y_i / sum w_i`.
    pub fn mean(&self) -> f64 {
        // Normalizing first keeps a lone surviving weight exactly 1.
        self.weights
            .weights
            .iter()
            .zip(&self.ys)
            .map(|(w, y)| (w / self.total) * y)
            .sum()
    }

    /// `sum w_i 1{Y_i <= y} / sum w_i`.
    pub fn step_cdf(&self, y: f64) -> f64 {
        self.weights
            .weights
            .iter()
            .zip(&self.ys)
            .filter(|(_, &yi)| yi <= y)
            .map(|(w, _)| w)
            .sum::<f64>()
            / self.total
    }

    fn mixture(&self, cfg: &EstimatorConfig) -> SmoothedMixture {
        SmoothedMixture::new(
            &self.ys,
            &self.weights.weights,
            self.total,
            cfg.h0,
            cfg.smoothing,
        )
    }

    /// `sum w_i Lambda((y - Y_i) / h0) / sum w_i`.
    pub fn smooth_cdf(&self, y: f64, cfg: &EstimatorConfig) -> f64 {
        self.mixture(cfg).cdf(y)
    }
}

/// Nadaraya-Watson mean.
pub fn nw_mean(sample: &RegressionSample, x: f64, cfg: &EstimatorConfig) -> Result<f64> {
    Ok(LocalFit::new(sample, x, cfg, WeightMode::LocalConstant)?.mean())
}

/// Local linear mean; Hansen-adjusted when `cfg.mode` asks for it.
pub fn ll_mean(sample: &RegressionSample, x: f64, cfg: &EstimatorConfig) -> Result<f64> {
    let mode = match cfg.mode {
        WeightMode::Hansen => WeightMode::Hansen,
        _ => WeightMode::LocalLinear,
    };
    Ok(LocalFit::new(sample, x, cfg, mode)?.mean())
}

/// Weighted empirical cdf at `y` with `cfg.mode` weights. Local linear
/// values may leave `[0, 1]`.
pub fn cdf_step(sample: &RegressionSample, x: f64, y: f64, cfg: &EstimatorConfig) -> Result<f64> {
    Ok(LocalFit::new(sample, x, cfg, cfg.mode)?.step_cdf(y))
}

/// Smoothed weighted cdf at `y` with `cfg.mode` weights.
pub fn cdf_smooth(sample: &RegressionSample, x: f64, y: f64, cfg: &EstimatorConfig) -> Result<f64> {
    Ok(LocalFit::new(sample, x, cfg, cfg.mode)?.smooth_cdf(y, cfg))
}

/// Derivative of the smoothed cdf on every point of `grid`, with `cfg.mode`
/// weights. Local linear values may be negative.
pub fn ll_density(
    sample: &RegressionSample,
    x: f64,
    grid: &GridSpec,
    cfg: &EstimatorConfig,
) -> Result<Vec<f64>> {
    grid.validate()?;
    let fit = LocalFit::new(sample, x, cfg, cfg.mode)?;
    let mixture = fit.mixture(cfg);
    Ok(grid.points().into_iter().map(|y| mixture.pdf(y)).collect())
}

/// Monotone local linear cdf by running maximum.
pub fn monotone_cdf_alg1(
    sample: &RegressionSample,
    x: f64,
    cfg: &EstimatorConfig,
) -> Result<DistributionEstimate> {
    let fit = LocalFit::new(sample, x, cfg, WeightMode::LocalLinear)?;
    let grid = cfg.grid_points(fit.responses())?;
    monotone::running_max(grid, &fit.mixture(cfg), x)
}

/// Monotone local linear cdf and density by clipping the density.
pub fn monotone_density_alg2(
    sample: &RegressionSample,
    x: f64,
    cfg: &EstimatorConfig,
) -> Result<DistributionEstimate> {
    let fit = LocalFit::new(sample, x, cfg, WeightMode::LocalLinear)?;
    let grid = cfg.grid_points(fit.responses())?;
    monotone::clipped_density(grid, &fit.mixture(cfg), x)
}

/// Smallest grid point whose cdf reaches `u`.
pub fn quantile(est: &DistributionEstimate, u: f64) -> Result<f64> {
    est.quantile(u)
}

/// Grid-sampled distribution estimate for `method`.
///
/// LC and LLH estimates are rescaled by their value at the last grid point
/// so that they end at exactly 1; LLM uses `cfg.algorithm`; LL is the raw
/// smoothed cdf with `monotone = false`.
pub fn distribution(
    sample: &RegressionSample,
    x: f64,
    cfg: &EstimatorConfig,
    method: Method,
) -> Result<DistributionEstimate> {
    match method {
        Method::Llm => match cfg.algorithm {
            MonotoneAlgorithm::RunningMax => monotone_cdf_alg1(sample, x, cfg),
            MonotoneAlgorithm::ClippedDensity => monotone_density_alg2(sample, x, cfg),
        },
        Method::Ll => {
            let fit = LocalFit::new(sample, x, cfg, WeightMode::LocalLinear)?;
            let grid = cfg.grid_points(fit.responses())?;
            let mixture = fit.mixture(cfg);
            let cdf = grid.iter().map(|&y| mixture.cdf(y)).collect();
            Ok(DistributionEstimate {
                grid,
                cdf,
                density: None,
                x_eval: x,
                monotone: false,
            })
        }
        Method::Lc | Method::Llh => {
            let fit = LocalFit::new(sample, x, cfg, method.weight_mode())?;
            let grid = cfg.grid_points(fit.responses())?;
            // Nonnegative weights make this monotone already; the running max
            // only absorbs rounding.
            monotone::running_max(grid, &fit.mixture(cfg), x)
        }
    }
}

/// Point prediction (center of location) for `method`.
///
/// LC and LLH return the weighted mean, which is the mean of their smoothed
/// distribution for a symmetric `Lambda`; LLM integrates its monotone
/// distribution over the grid.
pub fn point_predict(
    sample: &RegressionSample,
    x: f64,
    cfg: &EstimatorConfig,
    method: Method,
) -> Result<f64> {
    match method {
        Method::Llm => Ok(distribution(sample, x, cfg, Method::Llm)?.mean()),
        _ => Ok(LocalFit::new(sample, x, cfg, method.weight_mode())?.mean()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(xs: &[f64], ys: &[f64]) -> RegressionSample {
        RegressionSample::new(xs.to_vec(), ys.to_vec()).unwrap()
    }

    fn cfg(h: f64, h0: f64) -> EstimatorConfig {
        EstimatorConfig::default().with_h(h).with_h0(h0)
    }

    #[test]
    fn from_counts_units() {
        let c = EstimatorConfig::from_counts(50.0, 1000).unwrap();
        assert!((c.h - 0.05).abs() < 1e-15);
        assert!((c.h0 - 0.0025).abs() < 1e-15);
        assert!(EstimatorConfig::from_counts(0.0, 10).is_err());
        assert!(cfg(0.1, 0.0).validate().is_err());
    }

    #[test]
    fn two_point_extrapolation() {
        let s = sample(&[0.0, 1.0], &[3.0, 5.0]);
        let c = cfg(1.0, 0.01);
        // omega = (x2 - x) / (x2 - x1) = -1
        assert!((ll_mean(&s, 2.0, &c).unwrap() - 7.0).abs() < 1e-12);
        assert_eq!(
            ll_mean(&s, 2.0, &c.with_mode(WeightMode::Hansen)).unwrap(),
            5.0
        );
        // Y1 < y < Y2 gives the raw weight on Y1
        assert!((cdf_step(&s, 2.0, 4.0, &c).unwrap() + 1.0).abs() < 1e-12);
    }

    #[test]
    fn rectangular_nw_is_window_average() {
        let xs: Vec<f64> = (1..=8).map(f64::from).collect();
        let ys = [1.0, 4.0, 2.0, 8.0, 16.0, 3.0, 7.0, 5.0];
        let s = sample(&xs, &ys);
        let c = cfg(1.5, 0.1).with_family(KernelFamily::Rectangular);
        // window |x - 3.5| < 0.75 holds x = 3, 4
        assert_eq!(nw_mean(&s, 3.5, &c).unwrap(), 5.0);
    }

    #[test]
    fn running_max_removes_dip() {
        // Normalized weights (-0.2, 1.2) on responses (0, 1).
        let s = sample(&[0.0, 1.0], &[0.0, 1.0]);
        // omega = (x2 - x) / (x2 - x1) = -0.2
        let x = 1.2;
        let fit = LocalFit::new(&s, x, &cfg(10.0, 1e-3), WeightMode::LocalLinear).unwrap();
        let w = fit.weights().normalized().unwrap();
        assert!((w[0] + 0.2).abs() < 1e-3, "{w:?}");
        let c = cfg(10.0, 1e-3).with_grid(GridSpec::with_points(-0.5, 1.5, 4001).unwrap());
        let est = monotone_cdf_alg1(&s, x, &c).unwrap();
        est.check_monotone().unwrap();
        assert_eq!(est.cdf_at(0.5), 0.0);
        assert!(est.cdf_at(1.01) > 0.999);
        let alt = monotone_density_alg2(&s, x, &c).unwrap();
        alt.check_monotone().unwrap();
        assert!(alt.cdf_at(0.5) < 1e-9);
    }

    #[test]
    fn constant_responses() {
        let xs: Vec<f64> = (0..30).map(|i| i as f64 / 30.0).collect();
        let s = sample(&xs, &[2.5; 30]);
        let c = cfg(0.1, 0.01);
        for method in Method::ALL {
            let p = point_predict(&s, 0.5, &c, method).unwrap();
            assert!((p - 2.5).abs() < 1e-6, "{method}: {p}");
        }
        let est = distribution(&s, 1.1, &c, Method::Llm).unwrap();
        assert!((est.quantile(0.5).unwrap() - 2.5).abs() <= est.step());
        let y = 2.51;
        let expect = SmoothingKernel::Normal.cdf((y - 2.5) / 0.01);
        assert!((cdf_smooth(&s, 0.5, y, &c).unwrap() - expect).abs() < 1e-12);
    }

    #[test]
    fn lc_prediction_equals_nw() {
        let xs = [0.1, 0.25, 0.3, 0.55, 0.9];
        let ys = [1.0, -0.5, 2.0, 0.25, 3.0];
        let s = sample(&xs, &ys);
        let c = cfg(0.2, 0.04);
        assert_eq!(
            point_predict(&s, 0.95, &c, Method::Lc).unwrap(),
            nw_mean(&s, 0.95, &c).unwrap()
        );
    }

    #[test]
    fn one_sided_window_applies() {
        let s = sample(&[0.1, 0.2, 0.3], &[1.0, 2.0, 100.0]);
        let c = cfg(0.1, 0.01).with_window(Window::OneSidedLeft);
        let two = nw_mean(&s, 0.3, &cfg(0.1, 0.01)).unwrap();
        let one = nw_mean(&s, 0.3, &c).unwrap();
        assert!(one < 2.0 && two > 2.0);
    }

    #[test]
    fn method_parsing() {
        assert_eq!("ll-raw".parse::<Method>().unwrap(), Method::Ll);
        assert_eq!("LLM".parse::<Method>().unwrap(), Method::Llm);
        assert!("foo".parse::<Method>().is_err());
        assert_eq!(serde_json::to_string(&Method::Llh).unwrap(), "\"llh\"");
    }
}
