//! Local leave-one-out cross-validation of the bandwidth.
//!
//! For an evaluation point `x`, the `m` design points nearest `x` are
//! predicted in turn from the sample with that observation deleted, and the
//! squared prediction errors are summed per candidate bandwidth.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::{point_predict, EstimatorConfig, Method};
use crate::sample::{RegressionSample, Window};

/// Unit in which candidate bandwidths are given.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BandwidthUnits {
    /// Number of observations `b`; `h = b / n`.
    #[default]
    Counts,
    /// Regressor units; the candidate is `h` itself.
    Regressor,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvConfig {
    pub m: usize,
    pub candidates: Vec<f64>,
    pub method: Method,
    pub window: Window,
    #[serde(default)]
    pub units: BandwidthUnits,
    /// Fixed secondary bandwidth. When absent it follows each candidate:
    /// `b^2 / n^2` for counts, `(h / span)^2` for regressor units, where
    /// `span` is the range of the design points.
    #[serde(default)]
    pub h0: Option<f64>,
}

impl CvConfig {
    /// `m = max(20, ceil(0.05 n))` (at most `n - 1`) and `b = 10, 20, ..., 140`.
    pub fn default_for(n: usize, method: Method) -> Self {
        let m = 20usize
            .max((0.05 * n as f64).ceil() as usize)
            .min(n.saturating_sub(1));
        CvConfig {
            m,
            candidates: (1..=14).map(|k| 10.0 * k as f64).collect(),
            method,
            window: Window::TwoSided,
            units: BandwidthUnits::Counts,
            h0: None,
        }
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        if self.m < 2 || self.m + 1 > n {
            return Err(Error::invalid(format!(
                "neighbourhood size m = {} must lie in 2..={}",
                self.m,
                n.saturating_sub(1)
            )));
        }
        if self.candidates.is_empty() {
            return Err(Error::invalid("no candidate bandwidths"));
        }
        if self
            .candidates
            .iter()
            .any(|&b| !(b > 0.0) || !b.is_finite())
        {
            return Err(Error::invalid(
                "candidate bandwidths must be positive and finite",
            ));
        }
        if self.candidates.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::invalid(
                "candidate bandwidths must be strictly ascending",
            ));
        }
        if let Some(h0) = self.h0 {
            if !(h0 > 0.0) || !h0.is_finite() {
                return Err(Error::invalid(format!(
                    "secondary bandwidth must be positive, got {h0}"
                )));
            }
        }
        Ok(())
    }

    /// Estimator settings for candidate `b` on `sample`.
    pub fn config_for(
        &self,
        b: f64,
        sample: &RegressionSample,
        template: &EstimatorConfig,
    ) -> EstimatorConfig {
        let (h, h0) = match self.units {
            BandwidthUnits::Counts => {
                let n = sample.len();
                (b / n as f64, secondary_bandwidth(b, n))
            }
            BandwidthUnits::Regressor => {
                let span = span(sample.xs());
                let scaled = if span > 0.0 { b / span } else { b };
                (b, scaled * scaled)
            }
        };
        EstimatorConfig {
            h,
            h0: self.h0.unwrap_or(h0),
            window: self.window,
            ..*template
        }
    }
}

fn span(xs: &[f64]) -> f64 {
    let (lo, hi) = xs
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| {
            (lo.min(x), hi.max(x))
        });
    hi - lo
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvResult {
    pub best_b: f64,
    /// `(b, Err)` for every feasible candidate, in candidate order.
    pub err_by_b: Vec<(f64, f64)>,
    pub infeasible: Vec<f64>,
}

impl CvResult {
    pub fn err(&self, b: f64) -> Option<f64> {
        self.err_by_b.iter().find(|(c, _)| *c == b).map(|&(_, e)| e)
    }
}

/// `h0 = b^2 / n^2`.
pub fn secondary_bandwidth(b: f64, n: usize) -> f64 {
    let h = b / n as f64;
    h * h
}

/// Indices of the `m` design points nearest `x`; ties go to the lower index.
pub fn nearest_indices(xs: &[f64], x: f64, m: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..xs.len()).collect();
    order.sort_by(|&i, &j| {
        (xs[i] - x)
            .abs()
            .total_cmp(&(xs[j] - x).abs())
            .then(i.cmp(&j))
    });
    order.truncate(m);
    order
}

/// Delete-one prediction error summed over the neighbourhood of `x`.
pub fn cv_error(
    sample: &RegressionSample,
    neighbours: &[usize],
    cfg: &EstimatorConfig,
    method: Method,
) -> Result<f64> {
    let mut err = 0.0;
    for &g in neighbours {
        let reduced = sample.without(g)?;
        let pred = point_predict(&reduced, sample.xs()[g], cfg, method)?;
        let r = pred - sample.ys()[g];
        err += r * r;
    }
    Ok(err)
}

/// Candidate bandwidth minimizing the local delete-one error at `x`.
///
/// Candidates for which any prediction fails are reported as infeasible.
/// Ties go to the smallest candidate, where errors closer than `1e-12` times
/// the sum of squared neighbour responses count as tied (rounding alone
/// separates exact fits at different bandwidths).
pub fn select_bandwidth(
    sample: &RegressionSample,
    x: f64,
    cv: &CvConfig,
    template: &EstimatorConfig,
) -> Result<CvResult> {
    cv.validate(sample.len())?;
    let neighbours = nearest_indices(sample.xs(), x, cv.m);
    let errs: Vec<Result<f64>> = cv
        .candidates
        .par_iter()
        .map(|&b| {
            cv_error(
                sample,
                &neighbours,
                &cv.config_for(b, sample, template),
                cv.method,
            )
        })
        .collect();

    let scale: f64 = neighbours
        .iter()
        .map(|&g| sample.ys()[g] * sample.ys()[g])
        .sum();
    let slack = 1e-12 * scale.max(f64::MIN_POSITIVE);
    let mut err_by_b = Vec::new();
    let mut infeasible = Vec::new();
    let mut best: Option<(f64, f64)> = None;
    for (&b, err) in cv.candidates.iter().zip(errs) {
        match err {
            Ok(e) if e.is_finite() => {
                err_by_b.push((b, e));
                if best.is_none_or(|(_, be)| e < be - slack) {
                    best = Some((b, e));
                }
            }
            Ok(_) => infeasible.push(b),
            Err(Error::InvalidInput(msg)) => return Err(Error::InvalidInput(msg)),
            Err(_) => infeasible.push(b),
        }
    }
    match best {
        Some((best_b, _)) => Ok(CvResult {
            best_b,
            err_by_b,
            infeasible,
        }),
        None => Err(Error::AllCandidatesInfeasible),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn secondary_rule() {
        assert!((secondary_bandwidth(50.0, 1001) - 2500.0 / 1_002_001.0).abs() < 1e-18);
        assert_eq!(secondary_bandwidth(7.0, 7), 1.0);
        assert!((secondary_bandwidth(10.0, 100) - 0.01).abs() < 1e-15);
    }

    #[test]
    fn nearest_ties_to_lower_index() {
        let xs = [0.0, 1.0, 2.0, 3.0, 4.0];
        assert_eq!(nearest_indices(&xs, 2.5, 3), vec![2, 3, 1]);
        assert_eq!(nearest_indices(&xs, 2.0, 3), vec![2, 1, 3]);
    }

    #[test]
    fn default_config() {
        let cv = CvConfig::default_for(1001, Method::Llm);
        assert_eq!(cv.m, 51);
        assert_eq!(cv.candidates.len(), 14);
        assert_eq!(CvConfig::default_for(100, Method::Ll).m, 20);
        assert_eq!(CvConfig::default_for(10, Method::Ll).m, 9);
        cv.validate(1001).unwrap();
        assert!(cv.validate(51).is_err());
    }

    #[test]
    fn noiseless_linear_picks_smallest() {
        let xs: Vec<f64> = (1..=60).map(|i| i as f64 / 60.0).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 1.0 - 2.0 * x).collect();
        let s = RegressionSample::new(xs, ys).unwrap();
        let mut cv = CvConfig::default_for(60, Method::Ll);
        cv.candidates = vec![5.0, 10.0, 20.0];
        let res = select_bandwidth(&s, 0.5, &cv, &EstimatorConfig::default()).unwrap();
        assert_eq!(res.best_b, 5.0);
        assert!(res.err_by_b.iter().all(|&(_, e)| e < 1e-20));
    }

    #[test]
    fn regressor_units() {
        let s = RegressionSample::new(vec![10.0, 20.0, 30.0], vec![0.0; 3]).unwrap();
        let cv = CvConfig {
            units: BandwidthUnits::Regressor,
            ..CvConfig::default_for(3, Method::Lc)
        };
        let c = cv.config_for(2.0, &s, &EstimatorConfig::default());
        assert_eq!(c.h, 2.0);
        assert!((c.h0 - 0.01).abs() < 1e-15);
    }
}
