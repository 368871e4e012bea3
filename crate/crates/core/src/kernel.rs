//! Kernels and local weights.
//!
//! Three weight families are built from a kernel `K` and a bandwidth `h`
//! (regressor units), with `K~_i = K((x - x_i) / h) / h`:
//!
//! * local constant: `K~_i`;
//! * local linear: `K~_i * (1 - beta * (x - x_i))`, where
//!   `beta = sum K~_i (x - x_i) / sum K~_i (x - x_i)^2`;
//! * Hansen-adjusted: the local linear weights with every entry for which
//!   `beta * (x - x_i) > 1` set to zero.
//!
//! Weights are returned unnormalized. Consumers divide by the weight sum.

use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// Kernel `K` used for the regressor-direction weights.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelFamily {
    /// Standard normal density.
    #[default]
    Gaussian,
    /// `0.75 (1 - u^2)` on `|u| <= 1`.
    Epanechnikov,
    /// `1{|u| < 1/2}`.
    Rectangular,
}

impl KernelFamily {
    pub fn eval(self, u: f64) -> f64 {
        match self {
            KernelFamily::Gaussian => INV_SQRT_2PI * (-0.5 * u * u).exp(),
            KernelFamily::Epanechnikov => {
                if u.abs() <= 1.0 {
                    0.75 * (1.0 - u * u)
                } else {
                    0.0
                }
            }
            KernelFamily::Rectangular => {
                if u.abs() < 0.5 {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            KernelFamily::Gaussian => "gaussian",
            KernelFamily::Epanechnikov => "epanechnikov",
            KernelFamily::Rectangular => "rectangular",
        }
    }
}

impl fmt::Display for KernelFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for KernelFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "gaussian" | "normal" => Ok(KernelFamily::Gaussian),
            "epanechnikov" => Ok(KernelFamily::Epanechnikov),
            "rectangular" | "uniform" => Ok(KernelFamily::Rectangular),
            other => Err(Error::invalid(format!("unknown kernel family `{other}`"))),
        }
    }
}

/// Which weight family to build.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightMode {
    LocalConstant,
    #[default]
    LocalLinear,
    Hansen,
}

/// Local weights at one evaluation point.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector {
    pub weights: Vec<f64>,
    pub mode: WeightMode,
    pub x_eval: f64,
    /// The local slope scaling `beta`; `None` for local-constant weights.
    pub slope: Option<f64>,
}

impl WeightVector {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn sum(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn abs_sum(&self) -> f64 {
        self.weights.iter().map(|w| w.abs()).sum()
    }

    /// The weight sum, rejected when it is a vanishing fraction of the
    /// absolute mass (local linear weights can cancel).
    pub fn checked_sum(&self) -> Result<f64> {
        let sum = self.sum();
        let mass = self.abs_sum();
        if !(sum.abs() >= 1e-12 * mass) || sum == 0.0 {
            return Err(Error::NearSingularNormalization { sum, mass });
        }
        Ok(sum)
    }

    /// Weights divided by their sum.
    pub fn normalized(&self) -> Result<Vec<f64>> {
        let sum = self.checked_sum()?;
        Ok(self.weights.iter().map(|w| w / sum).collect())
    }
}

/// Local weights of `xs` around `x_eval`.
///
/// Fails with [`Error::DegenerateWeights`] when no sample point carries
/// kernel mass, or (local linear and Hansen modes) when every in-window
/// point coincides with `x_eval`, leaving the slope undefined.
pub fn local_weights(
    x_eval: f64,
    xs: &[f64],
    h: f64,
    family: KernelFamily,
    mode: WeightMode,
) -> Result<WeightVector> {
    if xs.is_empty() {
        return Err(Error::invalid(
            "local weights need at least one sample point",
        ));
    }
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::invalid(format!(
            "bandwidth must be positive and finite, got {h}"
        )));
    }
    if !x_eval.is_finite() {
        return Err(Error::invalid("evaluation point must be finite"));
    }

    let scaled: Vec<f64> = xs
        .iter()
        .map(|&xi| family.eval((x_eval - xi) / h) / h)
        .collect();
    if scaled.iter().all(|&k| k == 0.0) {
        return Err(Error::DegenerateWeights(
            "no sample mass inside the kernel window",
        ));
    }

    if mode == WeightMode::LocalConstant {
        return Ok(WeightVector {
            weights: scaled,
            mode,
            x_eval,
            slope: None,
        });
    }

    let (mut zeroth, mut first, mut second) = (0.0, 0.0, 0.0);
    for (&k, &xi) in scaled.iter().zip(xs) {
        let d = x_eval - xi;
        zeroth += k;
        first += k * d;
        second += k * d * d;
    }
    if second == 0.0 {
        return Err(Error::DegenerateWeights(
            "local slope undefined: every in-window design point equals the evaluation point",
        ));
    }
    // The weights sum to (S0 S2 - S1^2) / S2, the kernel-weighted spread of
    // the design; when it vanishes the weights cancel to rounding noise.
    if zeroth * second - first * first <= 1e-12 * zeroth * second {
        return Err(Error::DegenerateWeights(
            "local slope undefined: the in-window design points share one value",
        ));
    }
    let beta = first / second;

    let weights: Vec<f64> = scaled
        .iter()
        .zip(xs)
        .map(|(&k, &xi)| {
            let lever = beta * (x_eval - xi);
            if mode == WeightMode::Hansen && lever > 1.0 {
                0.0
            } else {
                k * (1.0 - lever)
            }
        })
        .collect();

    if weights.iter().all(|&w| w == 0.0) {
        return Err(Error::DegenerateWeights("all local linear weights vanish"));
    }
    Ok(WeightVector {
        weights,
        mode,
        x_eval,
        slope: Some(beta),
    })
}

/// The smooth distribution function `Lambda` and its density `lambda`
/// replacing the indicator in the smoothed CDF estimators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SmoothingKernel {
    #[default]
    Normal,
    Logistic,
}

impl SmoothingKernel {
    pub fn cdf(self, z: f64) -> f64 {
        match self {
            SmoothingKernel::Normal => 0.5 * libm::erfc(-z * FRAC_1_SQRT_2),
            SmoothingKernel::Logistic => {
                if z >= 0.0 {
                    1.0 / (1.0 + (-z).exp())
                } else {
                    let e = z.exp();
                    e / (1.0 + e)
                }
            }
        }
    }

    pub fn pdf(self, z: f64) -> f64 {
        match self {
            SmoothingKernel::Normal => INV_SQRT_2PI * (-0.5 * z * z).exp(),
            SmoothingKernel::Logistic => {
                let e = (-z.abs()).exp();
                e / ((1.0 + e) * (1.0 + e))
            }
        }
    }

    /// Beyond `|z| > tail_cutoff()` the cdf equals 0 or 1 to below 1e-17.
    pub fn tail_cutoff(self) -> f64 {
        match self {
            SmoothingKernel::Normal => 8.5,
            SmoothingKernel::Logistic => 40.0,
        }
    }

    /// Standard deviation of the distribution `Lambda`.
    pub fn std_dev(self) -> f64 {
        match self {
            SmoothingKernel::Normal => 1.0,
            SmoothingKernel::Logistic => PI / 3f64.sqrt(),
        }
    }
}

/// The default smoothing pair: standard normal cdf and density.
pub fn smoothing_pair() -> SmoothingKernel {
    SmoothingKernel::default()
}
