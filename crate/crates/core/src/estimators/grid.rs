use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::SmoothingKernel;

pub const DEFAULT_GRID_POINTS: usize = 2001;
/// Default grid margin beyond the extreme responses, in units of `h0`.
pub const DEFAULT_GRID_MARGIN: f64 = 5.0;
const MAX_GRID_INTERVALS: f64 = 1e6;

/// Uniform response grid `lo, lo + step, ..., hi`.
///
/// When `step` does not divide `hi - lo` the realized step is shrunk so the
/// grid still ends exactly at `hi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub lo: f64,
    pub hi: f64,
    pub step: f64,
}

impl GridSpec {
    pub fn new(lo: f64, hi: f64, step: f64) -> Result<Self> {
        let spec = GridSpec { lo, hi, step };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_points(lo: f64, hi: f64, points: usize) -> Result<Self> {
        if points < 2 {
            return Err(Error::invalid("a grid needs at least two points"));
        }
        GridSpec::new(lo, hi, (hi - lo) / (points - 1) as f64)
    }

    /// `[min(ys) - 5 h0, max(ys) + 5 h0]` with 2001 points.
    pub fn around(ys: &[f64], h0: f64) -> Result<Self> {
        let (min, max) = ys
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &y| {
                (lo.min(y), hi.max(y))
            });
        if !min.is_finite() || !max.is_finite() {
            return Err(Error::invalid("grid needs finite responses"));
        }
        GridSpec::with_points(
            min - DEFAULT_GRID_MARGIN * h0,
            max + DEFAULT_GRID_MARGIN * h0,
            DEFAULT_GRID_POINTS,
        )
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lo.is_finite() && self.hi.is_finite() && self.lo < self.hi) {
            return Err(Error::invalid(format!(
                "grid bounds must satisfy lo < hi (got {}..{})",
                self.lo, self.hi
            )));
        }
        if !(self.step > 0.0) || !self.step.is_finite() {
            return Err(Error::invalid(format!(
                "grid step must be positive, got {}",
                self.step
            )));
        }
        if (self.hi - self.lo) / self.step > MAX_GRID_INTERVALS {
            return Err(Error::invalid("grid would exceed 1e6 intervals"));
        }
        Ok(())
    }

    pub fn intervals(&self) -> usize {
        (((self.hi - self.lo) / self.step) - 1e-9).ceil().max(1.0) as usize
    }

    pub fn points(&self) -> Vec<f64> {
        let n = self.intervals();
        let width = self.hi - self.lo;
        let mut pts: Vec<f64> = (0..n)
            .map(|k| self.lo + width * (k as f64 / n as f64))
            .collect();
        pts.push(self.hi);
        pts
    }
}

/// A conditional distribution sampled on a response grid at one `x`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistributionEstimate {
    pub grid: Vec<f64>,
    pub cdf: Vec<f64>,
    pub density: Option<Vec<f64>>,
    pub x_eval: f64,
    /// Set when `cdf` is a proper distribution function on the grid.
    pub monotone: bool,
}

impl DistributionEstimate {
    /// Linear interpolation between grid points, constant beyond the ends.
    pub fn cdf_at(&self, y: f64) -> f64 {
        let last = self.grid.len() - 1;
        if y <= self.grid[0] {
            return self.cdf[0];
        }
        if y >= self.grid[last] {
            return self.cdf[last];
        }
        let k = self.grid.partition_point(|&g| g <= y);
        let (g0, g1) = (self.grid[k - 1], self.grid[k]);
        let t = (y - g0) / (g1 - g0);
        self.cdf[k - 1] + t * (self.cdf[k] - self.cdf[k - 1])
    }

    /// Smallest grid point whose cdf reaches `u`.
    pub fn quantile(&self, u: f64) -> Result<f64> {
        if !self.monotone {
            return Err(Error::invalid(
                "quantiles need a monotone distribution estimate",
            ));
        }
        if !(u > 0.0 && u < 1.0) {
            return Err(Error::invalid(format!(
                "quantile level must lie in (0, 1), got {u}"
            )));
        }
        let last = *self.cdf.last().expect("nonempty grid");
        if u > last {
            return Err(Error::OutOfGridRange { u, last });
        }
        let k = self.cdf.partition_point(|&c| c < u);
        Ok(self.grid[k])
    }

    /// Mean of the distribution: the Stieltjes sum of `y dF` over the grid,
    /// with any mass at the first grid point placed there.
    pub fn mean(&self) -> f64 {
        let mut acc = self.cdf[0] * self.grid[0];
        for k in 1..self.grid.len() {
            acc += (self.cdf[k] - self.cdf[k - 1]) * 0.5 * (self.grid[k] + self.grid[k - 1]);
        }
        acc
    }

    /// Largest spacing between neighbouring grid points.
    pub fn step(&self) -> f64 {
        self.grid
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(0.0, f64::max)
    }

    /// Trapezoid integral of the density over the grid, if present.
    pub fn density_mass(&self) -> Option<f64> {
        self.density.as_ref().map(|f| trapezoid(&self.grid, f))
    }

    /// Check the invariants a monotone estimate promises.
    pub fn check_monotone(&self) -> Result<()> {
        if self.grid.len() != self.cdf.len() || self.grid.len() < 2 {
            return Err(Error::invalid("grid and cdf lengths differ"));
        }
        if self.grid.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::invalid("grid is not strictly ascending"));
        }
        if self.cdf.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::invalid("cdf decreases"));
        }
        if self.cdf[0] < 0.0 {
            return Err(Error::invalid("cdf starts below zero"));
        }
        let last = self.cdf[self.cdf.len() - 1];
        if (last - 1.0).abs() > 1e-9 {
            return Err(Error::invalid(format!("cdf ends at {last}, not 1")));
        }
        if let Some(mass) = self.density_mass() {
            if (mass - 1.0).abs() > 1e-6 {
                return Err(Error::invalid(format!("density integrates to {mass}")));
            }
        }
        Ok(())
    }
}

pub(crate) fn trapezoid(grid: &[f64], f: &[f64]) -> f64 {
    grid.windows(2)
        .zip(f.windows(2))
        .map(|(g, v)| 0.5 * (v[0] + v[1]) * (g[1] - g[0]))
        .sum()
}

/// Weighted mixture `sum w_j Lambda((y - Y_j) / h0) / sum w_j` with
/// responses sorted so that terms saturated at 0 or 1 are skipped.
#[derive(Debug, Clone)]
pub(crate) struct SmoothedMixture {
    ys: Vec<f64>,
    ws: Vec<f64>,
    /// `prefix[k]` = sum of the first `k` sorted weights.
    prefix: Vec<f64>,
    total: f64,
    h0: f64,
    kernel: SmoothingKernel,
    /// Exact arithmetic keeps the cdf in `[0, 1]`; enforce it under rounding.
    nonnegative: bool,
}

impl SmoothedMixture {
    pub(crate) fn new(
        ys: &[f64],
        weights: &[f64],
        total: f64,
        h0: f64,
        kernel: SmoothingKernel,
    ) -> Self {
        let mut pairs: Vec<(f64, f64)> = ys
            .iter()
            .zip(weights)
            .filter(|(_, &w)| w != 0.0)
            .map(|(&y, &w)| (y, w))
            .collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let (ys, ws): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
        let mut prefix = Vec::with_capacity(ws.len() + 1);
        prefix.push(0.0);
        let mut acc = 0.0;
        for &w in &ws {
            acc += w;
            prefix.push(acc);
        }
        let nonnegative = ws.iter().all(|&w| w >= 0.0);
        SmoothedMixture {
            ys,
            ws,
            prefix,
            total,
            h0,
            kernel,
            nonnegative,
        }
    }

    fn active_range(&self, y: f64) -> (usize, usize) {
        let reach = self.kernel.tail_cutoff() * self.h0;
        let lo = self.ys.partition_point(|&yj| yj < y - reach);
        let hi = self.ys.partition_point(|&yj| yj <= y + reach);
        (lo, hi)
    }

    pub(crate) fn cdf(&self, y: f64) -> f64 {
        let (lo, hi) = self.active_range(y);
        let mut acc = self.prefix[lo];
        for j in lo..hi {
            acc += self.ws[j] * self.kernel.cdf((y - self.ys[j]) / self.h0);
        }
        let value = acc / self.total;
        if self.nonnegative {
            value.clamp(0.0, 1.0)
        } else {
            value
        }
    }

    pub(crate) fn pdf(&self, y: f64) -> f64 {
        let (lo, hi) = self.active_range(y);
        let mut acc = 0.0;
        for j in lo..hi {
            acc += self.ws[j] * self.kernel.pdf((y - self.ys[j]) / self.h0);
        }
        acc / (self.total * self.h0)
    }
}
