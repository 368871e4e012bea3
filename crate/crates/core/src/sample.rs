use serde::{Deserialize, Serialize};
use std::borrow::Cow;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Paired design points and responses.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionSample {
    xs: Vec<f64>,
    ys: Vec<f64>,
}

impl RegressionSample {
    pub fn new(xs: Vec<f64>, ys: Vec<f64>) -> Result<Self> {
        if xs.len() != ys.len() {
            return Err(Error::invalid(format!(
                "regressor and response lengths differ ({} vs {})",
                xs.len(),
                ys.len()
            )));
        }
        if xs.is_empty() {
            return Err(Error::invalid(
                "sample must contain at least one observation",
            ));
        }
        if let Some(i) = xs.iter().chain(&ys).position(|v| !v.is_finite()) {
            let (which, idx) = if i < xs.len() {
                ("regressor", i)
            } else {
                ("response", i - xs.len())
            };
            return Err(Error::invalid(format!("non-finite {which} at index {idx}")));
        }
        Ok(RegressionSample { xs, ys })
    }

    pub fn xs(&self) -> &[f64] {
        &self.xs
    }

    pub fn ys(&self) -> &[f64] {
        &self.ys
    }

    pub fn len(&self) -> usize {
        self.xs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }

    /// The sample with observation `index` deleted.
    pub fn without(&self, index: usize) -> Result<Self> {
        if index >= self.len() {
            return Err(Error::invalid(format!(
                "index {index} out of range for {} observations",
                self.len()
            )));
        }
        if self.len() < 2 {
            return Err(Error::invalid("cannot delete the only observation"));
        }
        let mut xs = self.xs.clone();
        let mut ys = self.ys.clone();
        xs.remove(index);
        ys.remove(index);
        Ok(RegressionSample { xs, ys })
    }

    /// Same observations with responses replaced.
    pub fn with_responses(&self, ys: Vec<f64>) -> Result<Self> {
        RegressionSample::new(self.xs.clone(), ys)
    }

    /// Restrict to the observations the window admits at `x`.
    pub fn windowed(&self, x: f64, window: Window) -> Result<Cow<'_, Self>> {
        match window {
            Window::TwoSided => Ok(Cow::Borrowed(self)),
            Window::OneSidedLeft => {
                let (xs, ys): (Vec<f64>, Vec<f64>) = self
                    .xs
                    .iter()
                    .zip(&self.ys)
                    .filter(|(&xi, _)| xi < x)
                    .map(|(&xi, &yi)| (xi, yi))
                    .unzip();
                if xs.is_empty() {
                    return Err(Error::DegenerateWeights(
                        "no design points strictly left of the evaluation point",
                    ));
                }
                Ok(Cow::Owned(RegressionSample { xs, ys }))
            }
        }
    }
}

/// Which observations an estimate at `x` may use.
///
/// `TwoSided` uses every observation supplied; when predicting a held-out
/// observation, callers delete it first (see [`RegressionSample::without`]).
/// `OneSidedLeft` keeps only design points strictly below `x`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Window {
    #[default]
    #[serde(alias = "two_sided_exclude_target")]
    TwoSided,
    OneSidedLeft,
}

impl fmt::Display for Window {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Window::TwoSided => "two-sided",
            Window::OneSidedLeft => "one-sided",
        })
    }
}

impl FromStr for Window {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "two-sided" | "two_sided" | "2" => Ok(Window::TwoSided),
            "one-sided" | "one_sided_left" | "one-sided-left" | "1" => Ok(Window::OneSidedLeft),
            other => Err(Error::invalid(format!("unknown window `{other}`"))),
        }
    }
}
